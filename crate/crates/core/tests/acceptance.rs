//! Acceptance suite: one test per release criterion, each printing a single
//! pass/fail line (run with `--nocapture` to see them on success).

use std::time::Instant;

use rayon::prelude::*;

use specflow::cone::{lift_projection, lift_unitary};
use specflow::corpus::{generate, CorpusCase, CorpusClass, DilationKind};
use specflow::dilation::{halmos, odd_shift_pair};
use specflow::flow::{flow_report, z2_flow_of_path, OperatorPath};
use specflow::fredholm::{fredholm_index, z2_index};
use specflow::operator::Domain;
use specflow::symmetry::SymmetryContext;
use specflow::verify::{
    homotopy_check, phi_check, run_case, window_exactness_check, CaseResult, Status,
};
use specflow::Op64;

const GENERIC: [CorpusClass; 3] = [
    CorpusClass::Shift,
    CorpusClass::Polar,
    CorpusClass::Perturbed,
];

fn conclude(name: &str, pass: bool, detail: &str) {
    println!("{name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn assert_all_pass(name: &str, results: &[CaseResult]) {
    let bad: Vec<&CaseResult> = results
        .iter()
        .filter(|r| matches!(r.status, Status::Fail | Status::Error))
        .collect();
    let passed = results.iter().filter(|r| r.status == Status::Pass).count();
    conclude(
        name,
        bad.is_empty(),
        &format!(
            "{passed}/{} cases{}",
            results.len(),
            bad.first()
                .map(|r| format!("; first failure {}: {}", r.id, r.detail))
                .unwrap_or_default()
        ),
    );
}

/// 102 generic cases, each expanded to all three generic dilation kinds.
fn expanded_generic_corpus() -> Vec<CorpusCase> {
    generate(102, 4242, &GENERIC)
        .into_iter()
        .flat_map(|c| {
            [
                DilationKind::Halmos,
                DilationKind::Polar,
                DilationKind::Randomized,
            ]
            .into_iter()
            .map(move |dk| {
                let mut v = c.clone();
                v.dilation = dk;
                v.id = format!("{}-{:?}", c.id, dk);
                v
            })
        })
        .collect()
}

fn run_all(theorem: &str, corpus: &[CorpusCase]) -> Vec<CaseResult> {
    corpus.par_iter().map(|c| run_case(theorem, c)).collect()
}

#[test]
fn criterion_1_shift_index_suite() {
    let start = Instant::now();
    for n in 1..=4i64 {
        let t = Op64::shift_power(1, Domain::HalfLine, n);
        assert_eq!(fredholm_index(&t).unwrap(), n, "Ind(S^{n})");
    }
    let ctx = SymmetryContext::<f64>::standard(2).unwrap();
    assert_eq!(z2_index(&odd_shift_pair(), &ctx).unwrap(), 1);
    let dt = start.elapsed();
    conclude(
        "criterion 1 (shift index suite)",
        dt.as_secs() < 10,
        &format!("Ind(S^n) = n for n=1..4, Ind_2(diag(S,S*)) = 1, {dt:.2?}"),
    );
}

#[test]
fn criterion_2_theorem_3_1_suite() {
    let start = Instant::now();
    let corpus = expanded_generic_corpus();
    let results = run_all("t31", &corpus);
    let dt = start.elapsed();
    assert!(dt.as_secs() < 300, "runtime budget exceeded: {dt:.2?}");
    assert_all_pass("criterion 2 (t31 suite)", &results);
}

#[test]
fn criterion_3_second_proof_oracle() {
    let corpus = expanded_generic_corpus();
    let results = run_all("secondproof", &corpus);
    assert_all_pass("criterion 3 (projection-pair oracle)", &results);
}

#[test]
fn criterion_4_theorem_7_1_suite() {
    let corpus = generate(52, 7171, &[CorpusClass::Odd]);
    assert!(corpus
        .iter()
        .any(|c| c.dilation == DilationKind::U0 && c.expected_z2 == Some(1)));
    let results = run_all("t71", &corpus);
    assert_all_pass("criterion 4 (t71 suite)", &results);
}

#[test]
fn criterion_5_kramers_suite() {
    let corpus = generate(52, 6161, &[CorpusClass::Odd]);
    let results = run_all("kramers", &corpus);
    assert_all_pass("criterion 5 (Kramers degeneracy suite)", &results);
}

#[test]
fn criterion_6_homotopy_invariance() {
    let corpus = generate(20, 2020, &GENERIC);
    let failures: Vec<String> = corpus
        .par_iter()
        .filter_map(|c| match homotopy_check(c, 20) {
            Ok(Some((true, _))) => None,
            Ok(Some((false, d))) => Some(format!("{}: {d}", c.id)),
            Ok(None) => Some(format!("{}: skipped", c.id)),
            Err(e) => Some(format!("{}: {e}", c.id)),
        })
        .collect();
    conclude(
        "criterion 6 (homotopy invariance, 20 cases x 20 paths)",
        failures.is_empty(),
        &failures.first().cloned().unwrap_or_else(|| "20/20 cases".into()),
    );
}

#[test]
fn criterion_7_mapping_cone_suite() {
    // lift residuals on 64-point grids, on exactly representable dilations
    let f = Op64::standard_symmetry(1);
    let mut worst: f64 = 0.0;
    for n in [1i64, -2, 3] {
        let u = halmos(&Op64::shift_power(1, Domain::HalfLine, n)).unwrap();
        let p = u.adjoint().try_mul(&f).unwrap().try_mul(&u).unwrap();
        let q = p
            .try_add(&Op64::identity(1, Domain::FullLine))
            .unwrap()
            .scale(specflow::C::new(0.5, 0.0));
        for k in 0..=64 {
            let s = k as f64 / 64.0;
            let lp = lift_projection(&q, &f, s).unwrap();
            worst = worst.max(lp.projection_defect());
            let lu = lift_unitary(&u, &f, s).unwrap();
            worst = worst.max(lu.unitarity_defect());
        }
    }
    assert!(worst < 1e-10, "lift residual {worst:.2e}");

    let corpus = generate(33, 4444, &GENERIC);
    let triangle = run_all("t44", &corpus);
    let odd_pairing = run_all("t43", &corpus);
    let bad = triangle
        .iter()
        .chain(odd_pairing.iter())
        .find(|r| r.status != Status::Pass);
    conclude(
        "criterion 7 (mapping-cone suite)",
        bad.is_none(),
        &format!(
            "lift residuals < 1e-10 on 64-pt grids, triangle + odd pairing on 33 cases{}",
            bad.map(|r| format!("; first failure {} {}: {}", r.theorem, r.id, r.detail))
                .unwrap_or_default()
        ),
    );
}

#[test]
fn criterion_8_phi_equivalence() {
    let corpus = generate(16, 8888, &GENERIC);
    let failures: Vec<String> = corpus
        .par_iter()
        .flat_map_iter(|c| {
            [None, Some(c.seed ^ 0xabcd)]
                .into_iter()
                .map(move |seed| (c, seed))
        })
        .filter_map(|(c, seed)| match phi_check(c, seed) {
            Ok(Some((true, _))) => None,
            Ok(Some((false, d))) => Some(format!("{}: {d}", c.id)),
            Ok(None) => Some(format!("{}: skipped", c.id)),
            Err(e) => Some(format!("{}: {e}", c.id)),
        })
        .collect();
    conclude(
        "criterion 8 (phi-equivalence on 32 paths)",
        failures.is_empty(),
        &failures.first().cloned().unwrap_or_else(|| "32/32 paths".into()),
    );
}

#[test]
fn criterion_9_window_exactness() {
    let corpus = generate(12, 9999, &GENERIC);
    let failures: Vec<String> = corpus
        .par_iter()
        .filter_map(|c| match window_exactness_check(c) {
            Ok(Some((true, _))) => None,
            Ok(Some((false, d))) => Some(format!("{}: {d}", c.id)),
            Ok(None) => Some(format!("{}: skipped", c.id)),
            Err(e) => Some(format!("{}: {e}", c.id)),
        })
        .collect();
    conclude(
        "criterion 9 (window exactness, margin 0 -> 20 at 1e-12)",
        failures.is_empty(),
        &failures.first().cloned().unwrap_or_else(|| "12/12 cases".into()),
    );
}

#[test]
fn u0_path_crosses_at_half() {
    // the U0 construction flows exactly one eigenvalue through 0 over [0, 1/2]
    let u = specflow::dilation::odd_symmetric_dilation_u0::<f64>();
    let f = Op64::standard_symmetry(2);
    let ctx = SymmetryContext::<f64>::standard(2).unwrap();
    let path = OperatorPath::odd(&f, &u, &ctx).unwrap();
    let rep = z2_flow_of_path(&path).unwrap();
    assert_eq!(rep.flow_mod2, Some(1));
    let full = flow_report(&path).unwrap();
    assert_eq!(full.flow.rem_euclid(2), 0, "full path flow must be even");
}
