//! Unitary dilations of essentially unitary half-line contractions: the
//! compression of the dilation back to the half line recovers the operator.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fredholm::defect_operators;
use crate::operator::{Domain, LatticeOperator};
use crate::range::SiteRange;
use crate::spectrum::{hermitian_eigen, hermitian_sqrt_psd};
use crate::symbol::LaurentSymbol;
use crate::symmetry::SymmetryContext;
use crate::{r, CMat, Real, C};

/// Square root of a positive semidefinite zero-background operator;
/// exact because the operator is a finite block direct-summed with zero.
fn sqrt_finite<R: Real>(k: &LatticeOperator<R>) -> Result<LatticeOperator<R>> {
    if !k.has_zero_backgrounds(r::<R>(1e-10)) {
        return Err(Error::NonCompactDeviation(
            k.left_background()
                .norm_bound()
                .max(k.right_background().norm_bound())
                .to_f64()
                .unwrap_or(f64::NAN),
        ));
    }
    if k.window().is_empty() {
        return Ok(LatticeOperator::zero(k.fiber_dim(), k.domain()));
    }
    let s = hermitian_sqrt_psd(k.perturbation());
    LatticeOperator::finite(k.fiber_dim(), k.domain(), k.window(), s)
}

/// Halmos dilation `U = [[T, D_{T*}], [D_T, -T^*]]`, folded to the full
/// line with `T` on the sites `n >= 0`.
pub fn halmos<R: Real>(t: &LatticeOperator<R>) -> Result<LatticeOperator<R>> {
    if t.domain() != Domain::HalfLine {
        return Err(Error::DomainMismatch);
    }
    let norm = t.norm_est();
    if norm > R::one() + r::<R>(1e-8) {
        return Err(Error::NotContraction(norm.to_f64().unwrap_or(f64::NAN)));
    }
    let (kl, kr) = defect_operators(t)?;
    let dl = sqrt_finite(&kl)?;
    let dr = sqrt_finite(&kr)?;
    LatticeOperator::fold(t, &dr, &dl, &t.adjoint().neg())
}

/// Polar dilation: Halmos dilation of the partial isometry `V = T |T|^+`
/// from the polar decomposition of `T`.
pub fn polar<R: Real>(t: &LatticeOperator<R>) -> Result<LatticeOperator<R>> {
    halmos(&polar_isometry(t)?)
}

/// Partial isometry of the polar decomposition, `V = T |T|^+`. Since
/// `T^* T = 1 - K_L` with finite `K_L`, both `|T|` and its pseudo-inverse
/// are identity plus a finite block, so `V` stays in the class exactly.
pub fn polar_isometry<R: Real>(t: &LatticeOperator<R>) -> Result<LatticeOperator<R>> {
    let (kl, _) = defect_operators(t)?;
    if kl.window().is_empty() {
        return Ok(t.clone()); // already an isometry
    }
    let d = t.fiber_dim();
    let w = kl.window();
    let n = w.len() * d;
    let block = CMat::<R>::identity(n, n) - kl.perturbation();
    // Rank decision on the eigenvalues of T^* T itself: true kernel
    // directions sit at rounding level there, while under a square root
    // they would be smeared up to ~sqrt(eps).
    let (vals, vecs) = hermitian_eigen(&block);
    let rank_tol = r::<R>(1e-10);
    let mut dinv = CMat::<R>::zeros(n, n);
    for (i, v) in vals.iter().enumerate() {
        if *v > rank_tol {
            dinv[(i, i)] = C::<R>::new(R::one() / v.sqrt(), R::zero());
        } else if *v > rank_tol * r::<R>(1e-4) {
            return Err(Error::IllConditionedKernel(v.to_f64().unwrap_or(f64::NAN)));
        }
    }
    let pinv_block = &vecs * dinv * vecs.adjoint();
    let correction = LatticeOperator::finite(
        d,
        t.domain(),
        w,
        pinv_block - CMat::<R>::identity(n, n),
    )?;
    let abs_pinv = LatticeOperator::identity(d, t.domain()).try_add(&correction)?;
    t.try_mul(&abs_pinv)
}

/// Unitary supported on the sites `n < 0` (identity elsewhere), drawn from
/// QR factors of a seeded random complex matrix.
fn random_negative_unitary<R: Real>(
    fiber_dim: usize,
    extent: i64,
    rng: &mut ChaCha8Rng,
) -> LatticeOperator<R> {
    let n = extent as usize * fiber_dim;
    let g = nalgebra::DMatrix::<num_complex::Complex<f64>>::from_fn(n, n, |_, _| {
        num_complex::Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let q = g.qr().q();
    let block = CMat::<R>::from_fn(n, n, |i, j| {
        let v = q[(i, j)];
        let base = C::<R>::new(r::<R>(v.re), r::<R>(v.im));
        if i == j {
            base - C::<R>::new(R::one(), R::zero())
        } else {
            base
        }
    });
    let id_sym = LaurentSymbol::identity(fiber_dim);
    LatticeOperator::from_parts(
        Domain::FullLine,
        id_sym.clone(),
        id_sym,
        SiteRange::new(-extent, -1),
        block,
    )
    .unwrap()
}

/// Randomized dilation `W_1 U_H W_2` with `U_H` the Halmos dilation and
/// `W_1, W_2` random unitaries supported strictly on `n < 0`; the half-line
/// compression is unchanged.
pub fn randomized<R: Real>(t: &LatticeOperator<R>, seed: u64) -> Result<LatticeOperator<R>> {
    let u = halmos(t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extent = (u.window().len() as i64).max(u.bandwidth() + 2) + 4;
    let w1 = random_negative_unitary::<R>(t.fiber_dim(), extent, &mut rng);
    let w2 = random_negative_unitary::<R>(t.fiber_dim(), extent, &mut rng);
    w1.try_mul(&u)?.try_mul(&w2)
}

/// Explicit odd-symmetric dilation of `T = diag(S, S^*)` on fiber dimension
/// 2: the fold of `[[diag(S, S^*), diag(0, P)], [diag(P, 0), diag(-S^*, -S)]]`
/// with `P = 1 - S^* S` the defect projection of the half-line left shift.
pub fn odd_symmetric_dilation_u0<R: Real>() -> LatticeOperator<R> {
    let one = C::<R>::new(R::one(), R::zero());
    let mut e00 = CMat::<R>::zeros(2, 2);
    e00[(0, 0)] = one;
    let mut e11 = CMat::<R>::zeros(2, 2);
    e11[(1, 1)] = one;

    let z = LaurentSymbol::zero(2);
    let half = |sym: LaurentSymbol<R>| {
        LatticeOperator::from_backgrounds(Domain::HalfLine, z.clone(), sym).unwrap()
    };
    // S on the first fiber component, S^* on the second
    let a = half(LaurentSymbol::from_coeff(1, e00.clone()))
        .try_add(&half(LaurentSymbol::from_coeff(-1, e11.clone())))
        .unwrap();
    let d = half(LaurentSymbol::from_coeff(-1, e00.clone()))
        .neg()
        .try_add(&half(LaurentSymbol::from_coeff(1, e11.clone())).neg())
        .unwrap();
    let site0 = SiteRange::new(0, 0);
    let b = LatticeOperator::finite(2, Domain::HalfLine, site0, e11).unwrap();
    let c = LatticeOperator::finite(2, Domain::HalfLine, site0, e00).unwrap();
    LatticeOperator::fold(&a, &b, &c, &d).unwrap()
}

/// `T = diag(S, S^*)`, the half-line compression of
/// [`odd_symmetric_dilation_u0`].
pub fn odd_shift_pair<R: Real>() -> LatticeOperator<R> {
    odd_symmetric_dilation_u0().compress_to_half_line().unwrap()
}

/// Quality report of a claimed dilation.
#[derive(Clone, Copy, Debug)]
pub struct DilationReport<R: Real> {
    /// Residual of the half-line compression of `U` against `T`.
    pub compression_residual: R,
    pub unitarity_defect: R,
    /// `I^* U^t I - U` residual, when a structure is supplied.
    pub odd_symmetry_residual: Option<R>,
}

pub fn validate_dilation<R: Real>(
    u: &LatticeOperator<R>,
    t: &LatticeOperator<R>,
    ctx: Option<&SymmetryContext<R>>,
    tol: R,
) -> Result<DilationReport<R>> {
    let compression = u.compress_to_half_line()?;
    let report = DilationReport {
        compression_residual: compression.residual(t),
        unitarity_defect: u.unitarity_defect(),
        odd_symmetry_residual: ctx.map(|c| c.odd_symmetry_residual(u)),
    };
    if report.compression_residual > tol {
        return Err(Error::NoConvergence(format!(
            "dilation compression residual {:.3e}",
            report.compression_residual.to_f64().unwrap_or(f64::NAN)
        )));
    }
    if report.unitarity_defect > tol {
        return Err(Error::NotUnitary(
            report.unitarity_defect.to_f64().unwrap_or(f64::NAN),
        ));
    }
    if let Some(res) = report.odd_symmetry_residual {
        if res > tol {
            return Err(Error::MissingSymmetry("dilation lost odd symmetry"));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    type Op = LatticeOperator<f64>;

    #[test]
    fn halmos_dilates_the_shift() {
        let s = Op::shift_power(1, Domain::HalfLine, 1);
        let u = halmos(&s).unwrap();
        let rep = validate_dilation(&u, &s, None, 1e-9).unwrap();
        assert!(rep.unitarity_defect < 1e-12);
    }

    #[test]
    fn polar_handles_non_isometries() {
        // T = S (1 - 0.5 |0><0|) is essentially unitary but not isometric.
        let s = Op::shift_power(1, Domain::HalfLine, 1);
        let p = Op::identity(1, Domain::HalfLine)
            .try_sub(&s.adjoint().try_mul(&s).unwrap())
            .unwrap();
        let t = s
            .try_mul(
                &Op::identity(1, Domain::HalfLine)
                    .try_sub(&p.scale(C::new(0.5, 0.0)))
                    .unwrap(),
            )
            .unwrap();
        let v = polar_isometry(&t).unwrap();
        let u = polar(&t).unwrap();
        validate_dilation(&u, &v, None, 1e-9).unwrap();
        // V and T share kernels, hence the index
        assert_eq!(
            crate::fredholm::fredholm_index(&v).unwrap(),
            crate::fredholm::fredholm_index(&t).unwrap()
        );
    }

    #[test]
    fn randomized_keeps_compression() {
        let s = Op::shift_power(1, Domain::HalfLine, 2);
        let u = randomized(&s, 42).unwrap();
        validate_dilation(&u, &s, None, 1e-9).unwrap();
        // determinism
        let u2 = randomized(&s, 42).unwrap();
        assert!(u.residual(&u2) < 1e-12);
        let u3 = randomized(&s, 43).unwrap();
        assert!(u.residual(&u3) > 1e-3);
    }

    #[test]
    fn u0_is_odd_symmetric_unitary_dilation() {
        let u = odd_symmetric_dilation_u0::<f64>();
        let t = odd_shift_pair::<f64>();
        let ctx = SymmetryContext::standard(2).unwrap();
        let rep = validate_dilation(&u, &t, Some(&ctx), 1e-11).unwrap();
        assert!(rep.odd_symmetry_residual.unwrap() < 1e-12);
        assert_eq!(crate::fredholm::kernel_dimension(&t).unwrap(), 1);
        assert_eq!(crate::fredholm::z2_index(&t, &ctx).unwrap(), 1);
    }

    #[test]
    fn halmos_preserves_odd_symmetry() {
        let t = odd_shift_pair::<f64>();
        let ctx = SymmetryContext::standard(2).unwrap();
        let u = halmos(&t).unwrap();
        validate_dilation(&u, &t, Some(&ctx), 1e-11).unwrap();
    }
}
