//! Seeded, reproducible corpus of essentially unitary contractions and
//! their dilations, used by the theorem-verification runners and the CLI.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dilation;
use crate::error::{Error, Result};
use crate::operator::{Domain, LatticeOperator};
use crate::range::SiteRange;
use crate::symmetry::SymmetryContext;
use crate::{CMat, C};

type Op = LatticeOperator<f64>;

/// Base contraction recipe; all numeric parameters are stored so a case
/// regenerates bit-identically from its record alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BaseSpec {
    /// `T = S^n` (shift power on the half line).
    ShiftPower { n: i64 },
    /// `T = S^n (1 - c P_w)` with `P_w` the projection onto sites `0..=w`.
    PolarDeformed { n: i64, c: f64, width: i64 },
    /// `T = S^n exp(i H) (1 - c P_w)` with a seeded Hermitian `H` of the
    /// given window size.
    Perturbed { n: i64, c: f64, width: i64, hsize: i64 },
    /// `T = diag(S, S^*)` on fiber dimension 2 (odd symmetric).
    OddShiftPair,
    /// `T = I^* A^t I A` with `A = exp(i H) (S^m (x) 1_2)`; odd symmetric
    /// by construction.
    OddSiegel { m: i64, hsize: i64 },
}

impl BaseSpec {
    pub fn fiber_dim(&self) -> usize {
        match self {
            BaseSpec::ShiftPower { .. }
            | BaseSpec::PolarDeformed { .. }
            | BaseSpec::Perturbed { .. } => 1,
            BaseSpec::OddShiftPair | BaseSpec::OddSiegel { .. } => 2,
        }
    }

    pub fn is_odd_symmetric(&self) -> bool {
        matches!(self, BaseSpec::OddShiftPair | BaseSpec::OddSiegel { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DilationKind {
    Halmos,
    Polar,
    Randomized,
    U0,
}

/// One corpus entry.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorpusCase {
    pub id: String,
    pub seed: u64,
    pub base: BaseSpec,
    pub dilation: DilationKind,
    /// Fredholm index of the base contraction, where pinned by construction.
    pub expected_index: Option<i64>,
    /// Z2 index of the base contraction, where pinned by construction.
    pub expected_z2: Option<u8>,
}

/// Seeded Hermitian finite-window operator on the half line.
fn random_hermitian(fiber_dim: usize, window: SiteRange, rng: &mut ChaCha8Rng) -> Op {
    let n = window.len() * fiber_dim;
    let raw = CMat::<f64>::from_fn(n, n, |_, _| {
        C::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4))
    });
    let herm = (&raw + raw.adjoint()).map(|x| x * C::new(0.5, 0.0));
    Op::finite(fiber_dim, Domain::HalfLine, window, herm).unwrap()
}

/// Half-line projection onto sites `0..=w` (scalar fiber).
fn head_projection(fiber_dim: usize, w: i64) -> Op {
    let n = (w + 1) as usize * fiber_dim;
    Op::finite(
        fiber_dim,
        Domain::HalfLine,
        SiteRange::new(0, w),
        CMat::<f64>::identity(n, n),
    )
    .unwrap()
}

impl CorpusCase {
    /// Rebuild the base contraction (deterministic in `self`).
    pub fn build_base(&self) -> Result<Op> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        match &self.base {
            BaseSpec::ShiftPower { n } => Ok(Op::shift_power(1, Domain::HalfLine, *n)),
            BaseSpec::PolarDeformed { n, c, width } => {
                let s = Op::shift_power(1, Domain::HalfLine, *n);
                let damp = Op::identity(1, Domain::HalfLine)
                    .try_sub(&head_projection(1, *width).scale(C::new(*c, 0.0)))?;
                s.try_mul(&damp)
            }
            BaseSpec::Perturbed { n, c, width, hsize } => {
                let s = Op::shift_power(1, Domain::HalfLine, *n);
                let h = random_hermitian(1, SiteRange::new(0, *hsize), &mut rng);
                let w = crate::cone::exp_i_scaled(&h, 1.0)?;
                let damp = Op::identity(1, Domain::HalfLine)
                    .try_sub(&head_projection(1, *width).scale(C::new(*c, 0.0)))?;
                s.try_mul(&w)?.try_mul(&damp)
            }
            BaseSpec::OddShiftPair => Ok(dilation::odd_shift_pair()),
            BaseSpec::OddSiegel { m, hsize } => {
                let ctx = SymmetryContext::standard(2)?;
                let h = random_hermitian(2, SiteRange::new(0, *hsize), &mut rng);
                let w = crate::cone::exp_i_scaled(&h, 1.0)?;
                let a = w.try_mul(&Op::shift_power(2, Domain::HalfLine, *m))?;
                crate::cone::siegel_sample(&a, &ctx)
            }
        }
    }

    /// Rebuild the dilation of the base contraction.
    pub fn build_dilation(&self) -> Result<Op> {
        let t = self.build_base()?;
        match self.dilation {
            DilationKind::Halmos => dilation::halmos(&t),
            DilationKind::Polar => dilation::polar(&t),
            DilationKind::Randomized => dilation::randomized(&t, self.seed ^ 0x9e3779b97f4a7c15),
            DilationKind::U0 => {
                if self.base != BaseSpec::OddShiftPair {
                    return Err(Error::UnknownCase(format!(
                        "{}: the U0 dilation is only defined for the shift pair",
                        self.id
                    )));
                }
                Ok(dilation::odd_symmetric_dilation_u0())
            }
        }
    }

    /// The operator the dilation actually compresses to: the polar dilation
    /// dilates the partial isometry `V` of `T = V|T|` (same index as `T`),
    /// all others dilate `T` itself.
    pub fn build_reference(&self) -> Result<Op> {
        let t = self.build_base()?;
        match self.dilation {
            DilationKind::Polar => dilation::polar_isometry(&t),
            _ => Ok(t),
        }
    }

    pub fn symmetry_context(&self) -> Option<SymmetryContext<f64>> {
        if self.base.is_odd_symmetric() {
            Some(SymmetryContext::standard(2).unwrap())
        } else {
            None
        }
    }
}

/// Corpus classes selectable from the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusClass {
    Shift,
    Polar,
    Perturbed,
    Odd,
}

pub const ALL_CLASSES: [CorpusClass; 4] = [
    CorpusClass::Shift,
    CorpusClass::Polar,
    CorpusClass::Perturbed,
    CorpusClass::Odd,
];

/// Generate `count` cases deterministically from a master seed, cycling
/// through the requested classes and (for non-odd classes) the three generic
/// dilation kinds.
pub fn generate(count: usize, master_seed: u64, classes: &[CorpusClass]) -> Vec<CorpusCase> {
    assert!(!classes.is_empty());
    let dilations = [
        DilationKind::Halmos,
        DilationKind::Polar,
        DilationKind::Randomized,
    ];
    let mut out = Vec::with_capacity(count);
    for idx in 0..count {
        let seed = master_seed
            .wrapping_mul(0x100000001b3)
            .wrapping_add(idx as u64 + 1)
            .wrapping_mul(0x9e3779b97f4a7c15);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let class = classes[idx % classes.len()];
        let (base, dilation) = match class {
            CorpusClass::Shift => {
                let n = rng.gen_range(1..=4i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
                (BaseSpec::ShiftPower { n }, dilations[idx % 3])
            }
            CorpusClass::Polar => {
                let n = rng.gen_range(1..=3i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
                let c = rng.gen_range(0.2..0.9);
                let width = rng.gen_range(0..=2i64);
                (BaseSpec::PolarDeformed { n, c, width }, dilations[idx % 3])
            }
            CorpusClass::Perturbed => {
                let n = rng.gen_range(1..=3i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
                let c = rng.gen_range(0.2..0.9);
                let width = rng.gen_range(0..=2i64);
                let hsize = rng.gen_range(1..=3i64);
                (
                    BaseSpec::Perturbed { n, c, width, hsize },
                    dilations[idx % 3],
                )
            }
            CorpusClass::Odd => {
                if idx % 4 == 0 {
                    let dk = if idx % 8 == 0 {
                        DilationKind::U0
                    } else {
                        DilationKind::Halmos
                    };
                    (BaseSpec::OddShiftPair, dk)
                } else {
                    let m = rng.gen_range(1..=3i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
                    let hsize = rng.gen_range(1..=2i64);
                    (BaseSpec::OddSiegel { m, hsize }, DilationKind::Halmos)
                }
            }
        };
        let expected_index = match &base {
            BaseSpec::ShiftPower { n }
            | BaseSpec::PolarDeformed { n, .. }
            | BaseSpec::Perturbed { n, .. } => Some(*n),
            BaseSpec::OddShiftPair => Some(0),
            // Ind(I^* A^t I A) = Ind(A^t) + Ind(A) = 0
            BaseSpec::OddSiegel { .. } => Some(0),
        };
        let expected_z2 = match &base {
            BaseSpec::OddShiftPair => Some(1),
            _ => None,
        };
        out.push(CorpusCase {
            id: format!("case-{idx:04}"),
            seed,
            base,
            dilation,
            expected_index,
            expected_z2,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fredholm::fredholm_index;

    #[test]
    fn generation_is_deterministic() {
        let a = generate(20, 7, &ALL_CLASSES);
        let b = generate(20, 7, &ALL_CLASSES);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = generate(20, 8, &ALL_CLASSES);
        assert_ne!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&c).unwrap()
        );
    }

    #[test]
    fn bases_have_expected_indices() {
        for case in generate(24, 3, &ALL_CLASSES) {
            let t = case.build_base().unwrap();
            if let Some(expected) = case.expected_index {
                assert_eq!(
                    fredholm_index(&t).unwrap(),
                    expected,
                    "case {} ({:?})",
                    case.id,
                    case.base
                );
            }
        }
    }

    #[test]
    fn dilations_validate() {
        for case in generate(16, 11, &ALL_CLASSES) {
            let t = case.build_reference().unwrap();
            let u = case.build_dilation().unwrap();
            let ctx = case.symmetry_context();
            crate::dilation::validate_dilation(&u, &t, ctx.as_ref(), 1e-8)
                .unwrap_or_else(|e| panic!("case {} failed: {e}", case.id));
        }
    }
}
