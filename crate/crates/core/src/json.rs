//! JSON interchange format for operators, used by the CLI and fixtures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{Domain, LatticeOperator};
use crate::range::SiteRange;
use crate::symbol::LaurentSymbol;
use crate::CMat;

/// One symbol diagonal: fiber coefficient at a given offset, row-major
/// `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagonalDoc {
    pub offset: i64,
    pub entries: Vec<[f64; 2]>,
}

/// Serialized operator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorDoc {
    pub fiber_dim: usize,
    pub domain: String,
    pub left_diagonals: Vec<DiagonalDoc>,
    pub right_diagonals: Vec<DiagonalDoc>,
    pub window: [i64; 2],
    pub perturbation: Vec<[f64; 2]>,
}

fn mat_to_entries(m: &CMat<f64>) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

fn entries_to_mat(entries: &[[f64; 2]], rows: usize, cols: usize) -> Result<CMat<f64>> {
    if entries.len() != rows * cols {
        return Err(Error::Unsupported(format!(
            "expected {} matrix entries, got {}",
            rows * cols,
            entries.len()
        )));
    }
    Ok(CMat::<f64>::from_fn(rows, cols, |i, j| {
        let e = entries[i * cols + j];
        num_complex::Complex::new(e[0], e[1])
    }))
}

fn symbol_to_docs(sym: &LaurentSymbol<f64>) -> Vec<DiagonalDoc> {
    sym.diagonals()
        .iter()
        .map(|(k, c)| DiagonalDoc {
            offset: *k,
            entries: mat_to_entries(c),
        })
        .collect()
}

fn docs_to_symbol(docs: &[DiagonalDoc], fiber_dim: usize) -> Result<LaurentSymbol<f64>> {
    let mut sym = LaurentSymbol::zero(fiber_dim);
    for d in docs {
        sym.set_coeff(d.offset, entries_to_mat(&d.entries, fiber_dim, fiber_dim)?);
    }
    Ok(sym)
}

pub fn to_doc(op: &LatticeOperator<f64>) -> OperatorDoc {
    let w = op.window();
    OperatorDoc {
        fiber_dim: op.fiber_dim(),
        domain: match op.domain() {
            Domain::FullLine => "full_line".into(),
            Domain::HalfLine => "half_line".into(),
        },
        left_diagonals: symbol_to_docs(op.left_background()),
        right_diagonals: symbol_to_docs(op.right_background()),
        window: [w.lo, w.hi],
        perturbation: mat_to_entries(op.perturbation()),
    }
}

pub fn from_doc(doc: &OperatorDoc) -> Result<LatticeOperator<f64>> {
    let domain = match doc.domain.as_str() {
        "full_line" => Domain::FullLine,
        "half_line" => Domain::HalfLine,
        other => return Err(Error::Unsupported(format!("unknown domain `{other}`"))),
    };
    let window = SiteRange::new(doc.window[0], doc.window[1]);
    let n = window.len() * doc.fiber_dim;
    LatticeOperator::from_parts(
        domain,
        docs_to_symbol(&doc.left_diagonals, doc.fiber_dim)?,
        docs_to_symbol(&doc.right_diagonals, doc.fiber_dim)?,
        window,
        entries_to_mat(&doc.perturbation, n, n)?,
    )
}

pub fn to_json(op: &LatticeOperator<f64>) -> String {
    serde_json::to_string_pretty(&to_doc(op)).expect("operator serialization")
}

pub fn from_json(s: &str) -> Result<LatticeOperator<f64>> {
    let doc: OperatorDoc =
        serde_json::from_str(s).map_err(|e| Error::Unsupported(format!("bad JSON: {e}")))?;
    from_doc(&doc)
}
