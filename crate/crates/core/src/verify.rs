//! Theorem-verification runners over corpus cases, shared by the CLI and
//! the acceptance tests: each runner checks one exact identity per case.

use serde::{Deserialize, Serialize};

use crate::cone::{
    exp_map, pairing_even, pairing_odd, z2_pairing, ODD_PAIRING_SIGN,
};
use crate::corpus::CorpusCase;
use crate::error::Result;
use crate::flow::{
    flow_report, kramers_check, phi_equivalence_check, sf_pair, sf_via_pair_index,
    spectral_flow, winding_number, z2_flow_of_path, FlowOptions, OperatorPath,
};
use crate::fredholm::{fredholm_index, z2_index};
use crate::operator::{Domain, LatticeOperator};
use crate::range::SiteRange;
use crate::spectrum::{discrete_spectrum, hermitian_eigenvalues};
use crate::{CMat, C};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Op = LatticeOperator<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
    Skipped,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CaseResult {
    pub id: String,
    pub theorem: String,
    pub status: Status,
    pub detail: String,
}

pub const THEOREMS: [&str; 7] = [
    "t31",
    "secondproof",
    "t71",
    "t43",
    "t44",
    "z2pair",
    "kramers",
];

/// Run one theorem check on one case; engine failures become
/// `Status::Error` with the message in `detail`.
pub fn run_case(theorem: &str, case: &CorpusCase) -> CaseResult {
    let outcome = match theorem {
        "t31" => t31(case),
        "secondproof" => secondproof(case),
        "t71" => t71(case),
        "t43" => t43(case),
        "t44" => t44(case),
        "z2pair" => z2pair(case),
        "kramers" => kramers(case),
        other => Ok(Some((false, format!("unknown theorem `{other}`")))),
    };
    let (status, detail) = match outcome {
        Ok(None) => (Status::Skipped, "not applicable to this case".into()),
        Ok(Some((true, d))) => (Status::Pass, d),
        Ok(Some((false, d))) => (Status::Fail, d),
        Err(e) => (Status::Error, e.to_string()),
    };
    CaseResult {
        id: case.id.clone(),
        theorem: theorem.into(),
        status,
        detail,
    }
}

type Outcome = Result<Option<(bool, String)>>;

fn base_symmetry(case: &CorpusCase) -> Op {
    Op::standard_symmetry(case.base.fiber_dim())
}

/// `Ind(T) = -SF(F, U_T)` (with the expected index cross-checked when the
/// construction pins it).
fn t31(case: &CorpusCase) -> Outcome {
    let t = case.build_reference()?;
    let u = case.build_dilation()?;
    let f = base_symmetry(case);
    let ind = fredholm_index(&t)?;
    let flow = sf_pair(&f, &u)?;
    let mut pass = flow == -ind;
    let mut detail = format!("Ind(T) = {ind}, SF(F,U) = {flow}");
    if let Some(expected) = case.expected_index {
        if ind != expected {
            pass = false;
            detail.push_str(&format!(", expected Ind = {expected}"));
        }
    }
    Ok(Some((pass, detail)))
}

/// `SF(path) = Ind(P(0), P(1))` — the projection-pair oracle.
fn secondproof(case: &CorpusCase) -> Outcome {
    let u = case.build_dilation()?;
    let f = base_symmetry(case);
    let path = OperatorPath::canonical(&f, &u)?;
    let flow = flow_report(&path)?.flow;
    let oracle = sf_via_pair_index(&path, 0.0, 1.0)?;
    Ok(Some((
        flow == oracle,
        format!("SF = {flow}, Ind(P(0),P(1)) = {oracle}"),
    )))
}

/// `Ind_2(T) = SF_2(F, U_T)` for odd-symmetric cases.
fn t71(case: &CorpusCase) -> Outcome {
    let Some(ctx) = case.symmetry_context() else {
        return Ok(None);
    };
    let t = case.build_reference()?;
    let u = case.build_dilation()?;
    let f = base_symmetry(case);
    let z2i = z2_index(&t, &ctx)?;
    let z2f = crate::flow::z2_spectral_flow(&f, &u, &ctx)?;
    let mut pass = z2i == z2f;
    let mut detail = format!("Ind_2(T) = {z2i}, SF_2(F,U) = {z2f}");
    if let Some(expected) = case.expected_z2 {
        if z2i != expected {
            pass = false;
            detail.push_str(&format!(", expected Ind_2 = {expected}"));
        }
    }
    Ok(Some((pass, detail)))
}

/// Odd pairing: `Ind(PUP) = -SF(F, U)` with the globally calibrated sign.
fn t43(case: &CorpusCase) -> Outcome {
    let u = case.build_dilation()?;
    let f = base_symmetry(case);
    let pairing = pairing_odd(&f, &u)?;
    let flow = sf_pair(&f, &u)?;
    Ok(Some((
        pairing == ODD_PAIRING_SIGN * flow,
        format!("Ind(PUP) = {pairing}, SF(F,U) = {flow}"),
    )))
}

/// Seeded finite unitary rotation `W = exp(iH)` on the full line.
fn random_rotation(fiber_dim: usize, seed: u64) -> Result<Op> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = SiteRange::new(-2, 2);
    let n = w.len() * fiber_dim;
    let raw = CMat::<f64>::from_fn(n, n, |_, _| {
        C::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4))
    });
    let herm = (&raw + raw.adjoint()).map(|x| x * C::new(0.5, 0.0));
    let h = Op::finite(fiber_dim, Domain::FullLine, w, herm)?;
    crate::cone::exp_i_scaled(&h, 1.0)
}

/// Even triangle: `Wind(exp map) = SF(2P-1, F)` and
/// `Ind(PFP) = -SF(2P-1, F)` for a rotated half-line projection `P` and the
/// case's dilation as the unitary `F`.
fn t44(case: &CorpusCase) -> Outcome {
    let u = case.build_dilation()?;
    let d = case.base.fiber_dim();
    let w = random_rotation(d, case.seed ^ 0x5851f42d4c957f2d)?;
    let p = w
        .try_mul(&Op::half_line_projection(d))?
        .try_mul(&w.adjoint())?;
    let ind = pairing_even(&p, &u)?;
    let wind = winding_number(|s: f64| exp_map(&p, &u, s))?;
    let two_p = p.scale(C::new(2.0, 0.0));
    let g = two_p.try_sub(&Op::identity(d, Domain::FullLine))?;
    let flow = sf_pair(&g, &u)?;
    Ok(Some((
        wind == flow && ind == ODD_PAIRING_SIGN * flow,
        format!("Ind(PFP) = {ind}, Wind = {wind}, SF(2P-1,F) = {flow}"),
    )))
}

/// Z2 pairing: `Ind_2(PFP) = SF_2(2P-1, F)` for odd-symmetric cases.
fn z2pair(case: &CorpusCase) -> Outcome {
    let Some(ctx) = case.symmetry_context() else {
        return Ok(None);
    };
    let u = case.build_dilation()?;
    let p = Op::half_line_projection(2);
    let z2p = z2_pairing(&p, &u, &ctx)?;
    let f = base_symmetry(case);
    let z2f = crate::flow::z2_spectral_flow(&f, &u, &ctx)?;
    Ok(Some((
        z2p == z2f,
        format!("Ind_2(PFP) = {z2p}, SF_2(2P-1,F) = {z2f}"),
    )))
}

/// Kramers degeneracy at `s in {0, 1/2, 1}` of the odd canonical path, plus
/// the mid-path degenerate eigenvalue whenever `SF_2 = 1`.
fn kramers(case: &CorpusCase) -> Outcome {
    let Some(ctx) = case.symmetry_context() else {
        return Ok(None);
    };
    let u = case.build_dilation()?;
    let f = base_symmetry(case);
    let path = OperatorPath::odd(&f, &u, &ctx)?;
    let mut detail = String::new();
    let mut pass = true;
    let mut mid_count = 0usize;
    for s in [0.0, 0.5, 1.0] {
        let rep = kramers_check(&path.at(s), &u, &ctx, 1e-10)?;
        if s == 0.5 {
            mid_count = rep.multiplicities.iter().sum();
        }
        let ok = rep.all_even && rep.max_pair_overlap < 1e-8 && rep.max_partner_residual < 1e-8;
        pass &= ok;
        detail.push_str(&format!(
            "s={s}: mult={:?} overlap={:.1e} residual={:.1e}; ",
            rep.multiplicities, rep.max_pair_overlap, rep.max_partner_residual
        ));
    }
    let z2 = z2_flow_of_path(&path)?.flow_mod2.unwrap();
    if z2 == 1 && mid_count == 0 {
        pass = false;
        detail.push_str("SF_2 = 1 but no mid-path gap eigenvalue");
    }
    Ok(Some((pass, detail)))
}

/// Path independence plus grid doubling: canonical, bumped (seeded) and
/// double-resolution flows must coincide.
pub fn homotopy_check(case: &CorpusCase, n_paths: u64) -> Outcome {
    let u = case.build_dilation()?;
    let f = base_symmetry(case);
    let canonical = OperatorPath::canonical(&f, &u)?;
    let reference = flow_report(&canonical)?.flow;
    let mut opts = FlowOptions::default();
    opts.initial_segments *= 2;
    let doubled = spectral_flow(&canonical, 0.0, 1.0, opts)?.flow;
    if doubled != reference {
        return Ok(Some((
            false,
            format!("grid doubling changed the flow: {reference} vs {doubled}"),
        )));
    }
    for k in 0..n_paths {
        let path = OperatorPath::with_random_bump(&f, &u, case.seed ^ (0xb5 + k))?;
        let flow = flow_report(&path)?.flow;
        if flow != reference {
            return Ok(Some((
                false,
                format!("bumped path {k} gave {flow}, canonical gave {reference}"),
            )));
        }
    }
    Ok(Some((
        true,
        format!("flow = {reference} across {n_paths} paths and grid doubling"),
    )))
}

/// `SF(path) = Wind(s -> exp(i pi (F_s + 1)))`.
pub fn phi_check(case: &CorpusCase, bump_seed: Option<u64>) -> Outcome {
    let u = case.build_dilation()?;
    let f = base_symmetry(case);
    let path = match bump_seed {
        Some(seed) => OperatorPath::with_random_bump(&f, &u, seed)?,
        None => OperatorPath::canonical(&f, &u)?,
    };
    let (flow, wind) = phi_equivalence_check(&path)?;
    Ok(Some((
        flow == wind,
        format!("SF = {flow}, Wind(phi) = {wind}"),
    )))
}

/// Window exactness: eigenvalues of the canonical path in `(-1, 1)` agree
/// to 1e-12 between the margin-0 compression and a margin-20 dense solve.
pub fn window_exactness_check(case: &CorpusCase) -> Outcome {
    let u = case.build_dilation()?;
    let f = base_symmetry(case);
    let path = OperatorPath::canonical(&f, &u)?;
    let mut worst: f64 = 0.0;
    for s in [0.25, 0.5, 0.75] {
        let op = path.at(s);
        let ds = discrete_spectrum(&op, -1.0, 1.0, 1e-12)?;
        if ds.margin != 0 {
            return Ok(Some((false, format!("margin-0 solve not used at s={s}"))));
        }
        let (m, _) = op.window_compression(20);
        let wide = hermitian_eigenvalues(&m);
        // Compare eigenvalues safely inside the gap; ones hugging the
        // essential edge can drift across the interval boundary.
        for a in ds.eigenvalues.iter().filter(|v| v.abs() < 1.0 - 1e-6) {
            let nearest = wide
                .iter()
                .map(|b| (a - b).abs())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest);
        }
    }
    Ok(Some((
        worst < 1e-12,
        format!("max eigenvalue drift under margin 0 -> 20: {worst:.2e}"),
    )))
}

/// Aggregate of one theorem over a corpus.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub passed: usize,
    pub failed: usize,
    pub errored: usize,
    pub skipped: usize,
    pub results: Vec<CaseResult>,
}

pub fn run_theorem(theorem: &str, corpus: &[CorpusCase]) -> TheoremReport {
    let results: Vec<CaseResult> = corpus.iter().map(|c| run_case(theorem, c)).collect();
    summarize(theorem, results)
}

pub fn summarize(theorem: &str, results: Vec<CaseResult>) -> TheoremReport {
    let count = |s: Status| results.iter().filter(|r| r.status == s).count();
    TheoremReport {
        theorem: theorem.into(),
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        errored: count(Status::Error),
        skipped: count(Status::Skipped),
        results,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate, CorpusClass, ALL_CLASSES};

    #[test]
    fn t31_on_small_corpus() {
        let corpus = generate(9, 21, &ALL_CLASSES);
        let rep = run_theorem("t31", &corpus);
        assert_eq!(rep.failed + rep.errored, 0, "{:#?}", rep.results);
        assert_eq!(rep.passed, 9);
    }

    #[test]
    fn odd_theorems_on_odd_corpus() {
        let corpus = generate(4, 33, &[CorpusClass::Odd]);
        for th in ["t71", "z2pair", "kramers"] {
            let rep = run_theorem(th, &corpus);
            assert_eq!(rep.failed + rep.errored, 0, "{th}: {:#?}", rep.results);
            assert_eq!(rep.passed, 4, "{th}");
        }
    }

    #[test]
    fn pairing_theorems_on_small_corpus() {
        let corpus = generate(6, 77, &ALL_CLASSES);
        for th in ["secondproof", "t43", "t44"] {
            let rep = run_theorem(th, &corpus);
            assert_eq!(rep.failed + rep.errored, 0, "{th}: {:#?}", rep.results);
            assert_eq!(rep.passed, 6, "{th}");
        }
    }

    #[test]
    fn auxiliary_checks_pass() {
        let corpus = generate(3, 55, &[CorpusClass::Shift, CorpusClass::Perturbed]);
        for case in &corpus {
            let (ok, d) = homotopy_check(case, 2).unwrap().unwrap();
            assert!(ok, "homotopy {}: {d}", case.id);
            let (ok, d) = phi_check(case, None).unwrap().unwrap();
            assert!(ok, "phi {}: {d}", case.id);
            let (ok, d) = window_exactness_check(case).unwrap().unwrap();
            assert!(ok, "window {}: {d}", case.id);
        }
    }
}
