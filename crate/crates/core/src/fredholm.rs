//! Fredholm and Z2 indices of essentially unitary lattice operators,
//! reduced exactly to finite eigenproblems of the defect operators.

use crate::error::{Error, Result};
use crate::operator::LatticeOperator;
use crate::spectrum::hermitian_eigenvalues;
use crate::symmetry::SymmetryContext;
use crate::{r, CMat, Real, C};

/// Defect operators `K_L = 1 - T^* T` and `K_R = 1 - T T^*`. For an
/// essentially unitary `T` both have zero backgrounds, so they are finite
/// matrices on their windows; otherwise this is an error.
pub fn defect_operators<R: Real>(
    t: &LatticeOperator<R>,
) -> Result<(LatticeOperator<R>, LatticeOperator<R>)> {
    let id = LatticeOperator::identity(t.fiber_dim(), t.domain());
    let kl = id.try_sub(&t.adjoint().try_mul(t)?)?;
    let kr = id.try_sub(&t.try_mul(&t.adjoint())?)?;
    let tol = r::<R>(1e-10);
    let bg = kl
        .left_background()
        .norm_bound()
        .max(kl.right_background().norm_bound())
        .max(kr.left_background().norm_bound())
        .max(kr.right_background().norm_bound());
    if bg > tol {
        return Err(Error::NotEssentiallyUnitary(bg.to_f64().unwrap_or(f64::NAN)));
    }
    Ok((kl, kr))
}

/// Multiplicity of the eigenvalue 1 of a zero-background defect operator.
/// Kernel vectors of `T` are exact eigenvectors of `1 - T^* T` at eigenvalue
/// 1 and are supported exactly on the defect window, so the count is a
/// finite Hermitian eigenproblem. Eigenvalues falling into the undecidable
/// band just below 1 are reported as an error instead of being rounded.
fn defect_kernel_count<R: Real>(k: &LatticeOperator<R>) -> Result<usize> {
    if k.window().is_empty() {
        return Ok(0);
    }
    let (m, _) = k.window_compression(0);
    let herm = (&m + m.adjoint()).map(|x| x * C::<R>::new(r::<R>(0.5), R::zero()));
    let accept = r::<R>(1e-6);
    let suspect = r::<R>(1e-5);
    let mut count = 0usize;
    for v in hermitian_eigenvalues(&herm) {
        let gap = R::one() - v;
        if gap < accept {
            count += 1;
        } else if gap < suspect {
            return Err(Error::IllConditionedKernel(v.to_f64().unwrap_or(f64::NAN)));
        }
    }
    Ok(count)
}

/// `dim ker T` for essentially unitary `T`.
pub fn kernel_dimension<R: Real>(t: &LatticeOperator<R>) -> Result<usize> {
    let (kl, _) = defect_operators(t)?;
    defect_kernel_count(&kl)
}

/// `Ind T = dim ker T - dim ker T^*` for essentially unitary `T`.
pub fn fredholm_index<R: Real>(t: &LatticeOperator<R>) -> Result<i64> {
    let (kl, kr) = defect_operators(t)?;
    Ok(defect_kernel_count(&kl)? as i64 - defect_kernel_count(&kr)? as i64)
}

/// `Ind_2 T = dim ker T mod 2` for an odd-symmetric essentially unitary `T`.
pub fn z2_index<R: Real>(t: &LatticeOperator<R>, ctx: &SymmetryContext<R>) -> Result<u8> {
    let res = ctx.odd_symmetry_residual(t);
    if res > r::<R>(1e-7) {
        return Err(Error::MissingSymmetry("Z2 index requires odd symmetry"));
    }
    Ok((kernel_dimension(t)? % 2) as u8)
}

/// Index of a Fredholm pair of projections,
/// `Ind(P, Q) = dim(ran P  /\  ker Q) - dim(ker P  /\  ran Q)`,
/// computed exactly as `m_{+1}(P - Q) - m_{-1}(P - Q)`: the difference of a
/// Fredholm pair has zero backgrounds, and its `+-1` eigenvectors are
/// supported exactly on its window.
pub fn pair_index<R: Real>(p: &LatticeOperator<R>, q: &LatticeOperator<R>) -> Result<i64> {
    let tol = r::<R>(1e-7);
    let pd = p.projection_defect();
    if pd > tol {
        return Err(Error::NotProjection(pd.to_f64().unwrap_or(f64::NAN)));
    }
    let qd = q.projection_defect();
    if qd > tol {
        return Err(Error::NotProjection(qd.to_f64().unwrap_or(f64::NAN)));
    }
    let diff = p.try_sub(q)?;
    let bg = diff
        .left_background()
        .norm_bound()
        .max(diff.right_background().norm_bound());
    if bg > tol {
        return Err(Error::NonCompactDeviation(bg.to_f64().unwrap_or(f64::NAN)));
    }
    if diff.window().is_empty() {
        return Ok(0);
    }
    let (m, _) = diff.window_compression(0);
    let herm = (&m + m.adjoint()).map(|x| x * C::<R>::new(r::<R>(0.5), R::zero()));
    let accept = r::<R>(1e-6);
    let suspect = r::<R>(1e-5);
    let mut idx = 0i64;
    for v in hermitian_eigenvalues(&herm) {
        if (R::one() - v).abs() < accept {
            idx += 1;
        } else if (R::one() + v).abs() < accept {
            idx -= 1;
        } else if (R::one() - v.abs()) < suspect {
            return Err(Error::IllConditionedKernel(v.to_f64().unwrap_or(f64::NAN)));
        }
    }
    Ok(idx)
}

/// Winding number of `theta -> det(symbol(theta))` for an invertible symbol,
/// by adaptive phase accumulation with steps kept below `pi/2`.
pub fn symbol_det_winding<R: Real>(sym: &crate::symbol::LaurentSymbol<R>) -> Result<i64> {
    let mut samples: usize = 64.max(8 * (sym.bandwidth().unsigned_abs() as usize + 1));
    loop {
        let two_pi = R::two_pi();
        let n = R::from_usize(samples).unwrap();
        let mut total = R::zero();
        let mut prev = det_at(sym, R::zero())?;
        let mut ok = true;
        for i in 1..=samples {
            let theta = two_pi * R::from_usize(i).unwrap() / n;
            let cur = det_at(sym, theta)?;
            let ratio = cur / prev;
            let step = ratio.im.atan2(ratio.re);
            if step.abs() > R::frac_pi_2() {
                ok = false;
                break;
            }
            total += step;
            prev = cur;
        }
        if ok {
            let w = (total / two_pi).round();
            return Ok(w.to_f64().unwrap() as i64);
        }
        samples *= 2;
        if samples > 1 << 20 {
            return Err(Error::PhaseStepTooLarge);
        }
    }
}

fn det_at<R: Real>(sym: &crate::symbol::LaurentSymbol<R>, theta: R) -> Result<C<R>> {
    let d = window_det(&sym.eval(theta));
    let modulus = d.norm_sqr().sqrt();
    if modulus < r::<R>(1e-9) {
        return Err(Error::SymbolSingular(modulus.to_f64().unwrap_or(0.0)));
    }
    Ok(d)
}

/// Determinant of a dense complex matrix by LU with partial pivoting
/// (nalgebra's determinant needs ComplexField bounds our scalar alias does
/// not carry).
pub fn window_det<R: Real>(m: &CMat<R>) -> C<R> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut det = C::<R>::new(R::one(), R::zero());
    for k in 0..n {
        let mut piv = k;
        let mut best = a[(k, k)].norm_sqr();
        for i in k + 1..n {
            let v = a[(i, k)].norm_sqr();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == R::zero() {
            return C::<R>::new(R::zero(), R::zero());
        }
        if piv != k {
            a.swap_rows(piv, k);
            det = -det;
        }
        let pivot = a[(k, k)];
        det *= pivot;
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            for j in k + 1..n {
                let sub = f * a[(k, j)];
                a[(i, j)] -= sub;
            }
        }
    }
    det
}

/// Independent index oracle for operators with an invertible right symbol on
/// the half line (or a full-line cut of such): `Ind = -winding(det symbol)`.
pub fn winding_index_oracle<R: Real>(t: &LatticeOperator<R>) -> Result<i64> {
    Ok(-symbol_det_winding(t.right_background())?)
}

/// Second, representation-independent oracle for `dim(ran P /\ ker Q)` and
/// `dim(ker P /\ ran Q)` via dense subspace intersections on a window large
/// enough to contain all `+-1` eigenvectors of `P - Q`.
pub fn pair_index_dense_oracle<R: Real>(
    p: &LatticeOperator<R>,
    q: &LatticeOperator<R>,
    extra_margin: i64,
) -> Result<i64> {
    let diff = p.try_sub(q)?;
    let base = diff.window();
    let range = if base.is_empty() {
        crate::range::SiteRange::new(-2, 2)
    } else {
        base
    }
    .expand(extra_margin + p.bandwidth().max(q.bandwidth()) + 2);
    let pm = p.dense(range, range);
    let qm = q.dense(range, range);
    let n = pm.nrows();
    let id = CMat::<R>::identity(n, n);
    let a = dim_intersection(&pm, &(&id - &qm));
    let b = dim_intersection(&(&id - &pm), &qm);
    Ok(a as i64 - b as i64)
}

/// Dimension of `ran A /\ ran B` for Hermitian projections given as dense
/// matrices: the multiplicity of eigenvalue 2 of `A + B`.
fn dim_intersection<R: Real>(a: &CMat<R>, b: &CMat<R>) -> usize {
    let s = a + b;
    hermitian_eigenvalues(&s)
        .into_iter()
        .filter(|v| (*v - r::<R>(2.0)).abs() < r::<R>(1e-7))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Domain;
    use crate::symbol::LaurentSymbol;

    type Op = LatticeOperator<f64>;

    #[test]
    fn shift_indices_on_half_line() {
        for n in 1..=4i64 {
            let s = Op::shift_power(1, Domain::HalfLine, n);
            assert_eq!(fredholm_index(&s).unwrap(), n);
            assert_eq!(kernel_dimension(&s).unwrap(), n as usize);
            let sm = Op::shift_power(1, Domain::HalfLine, -n);
            assert_eq!(fredholm_index(&sm).unwrap(), -n);
        }
    }

    #[test]
    fn winding_oracle_matches_shift() {
        for n in -4..=4i64 {
            let s = Op::shift_power(1, Domain::HalfLine, n);
            assert_eq!(winding_index_oracle(&s).unwrap(), n);
        }
    }

    #[test]
    fn pair_index_of_shifted_projection() {
        // Q = U^* P U for the left shift moves the cut by one site:
        // P - Q = |0><0| so Ind(P, Q) = 1 = Ind(PUP).
        let p = Op::half_line_projection(1);
        let u = Op::shift_power(1, Domain::FullLine, 1);
        let q = u.adjoint().try_mul(&p).unwrap().try_mul(&u).unwrap();
        assert_eq!(pair_index(&p, &q).unwrap(), 1);
        assert_eq!(pair_index(&q, &p).unwrap(), -1);
        assert_eq!(pair_index(&p, &p).unwrap(), 0);
        assert_eq!(pair_index_dense_oracle(&p, &q, 6).unwrap(), 1);
    }

    #[test]
    fn full_line_shift_has_index_zero() {
        let s = Op::shift_power(1, Domain::FullLine, 3);
        assert_eq!(fredholm_index(&s).unwrap(), 0);
    }

    #[test]
    fn winding_of_banded_symbol() {
        // symbol e^{-i theta} * (2 + e^{i theta}) has winding -1 (one factor
        // winds -1, the other none since 2 > 1).
        let mut sym = LaurentSymbol::<f64>::zero(1);
        sym.set_coeff(1, CMat::<f64>::from_element(1, 1, C::new(2.0, 0.0)));
        sym.set_coeff(0, CMat::<f64>::from_element(1, 1, C::new(1.0, 0.0)));
        assert_eq!(symbol_det_winding(&sym).unwrap(), -1);
    }

    #[test]
    fn non_unitary_rejected() {
        let t = Op::shift_power(1, Domain::HalfLine, 1).scale(C::new(0.5, 0.0));
        assert!(matches!(
            fredholm_index(&t),
            Err(Error::NotEssentiallyUnitary(_))
        ));
    }
}
