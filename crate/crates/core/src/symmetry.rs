//! Quaternionic fiber structure and odd-symmetry checks.

use crate::error::{Error, Result};
use crate::operator::{Domain, LatticeOperator};
use crate::{CMat, Real, C};

/// Quaternionic structure on the fiber: a real unitary `I` with
/// `I^2 = -1`, acting identically at every lattice site. Odd symmetry of an
/// operator `T` means `I^* T^t I = T`.
#[derive(Clone, Debug)]
pub struct SymmetryContext<R: Real> {
    i_fiber: CMat<R>,
}

impl<R: Real> SymmetryContext<R> {
    /// Standard structure on an even-dimensional fiber:
    /// `I = diag([[0, -1], [1, 0]], ...)`.
    pub fn standard(fiber_dim: usize) -> Result<Self> {
        if fiber_dim % 2 != 0 {
            return Err(Error::MissingSymmetry(
                "quaternionic structure requires even fiber dimension",
            ));
        }
        let mut i = CMat::<R>::zeros(fiber_dim, fiber_dim);
        for b in 0..fiber_dim / 2 {
            i[(2 * b, 2 * b + 1)] = C::<R>::new(-R::one(), R::zero());
            i[(2 * b + 1, 2 * b)] = C::<R>::new(R::one(), R::zero());
        }
        Ok(SymmetryContext { i_fiber: i })
    }

    pub fn from_fiber_matrix(i: CMat<R>) -> Result<Self> {
        let n = i.nrows();
        let tol = crate::r::<R>(1e-10);
        let real = i.iter().all(|c| c.im.abs() < tol);
        let minus_one = (&i * &i + CMat::<R>::identity(n, n)).norm() < tol;
        let orth = (&i * i.adjoint() - CMat::<R>::identity(n, n)).norm() < tol;
        if !(real && minus_one && orth) {
            return Err(Error::MissingSymmetry(
                "structure matrix must be real orthogonal with I^2 = -1",
            ));
        }
        Ok(SymmetryContext { i_fiber: i })
    }

    pub fn fiber_dim(&self) -> usize {
        self.i_fiber.nrows()
    }

    pub fn fiber_matrix(&self) -> &CMat<R> {
        &self.i_fiber
    }

    /// `I` as a lattice operator on the given domain.
    pub fn operator(&self, domain: Domain) -> LatticeOperator<R> {
        LatticeOperator::from_fiber_matrix(domain, self.i_fiber.clone())
    }

    /// `I^* T^t I`; odd symmetry is invariance under this involution.
    pub fn dual(&self, t: &LatticeOperator<R>) -> LatticeOperator<R> {
        let i = self.operator(t.domain());
        i.adjoint()
            .try_mul(&t.transpose())
            .unwrap()
            .try_mul(&i)
            .unwrap()
    }

    pub fn odd_symmetry_residual(&self, t: &LatticeOperator<R>) -> R {
        self.dual(t).residual(t)
    }

    pub fn is_odd_symmetric(&self, t: &LatticeOperator<R>, tol: R) -> bool {
        self.odd_symmetry_residual(t) < tol
    }

    /// The involution `X -> (IU)^* X^t (IU)` on operators commuting with a
    /// fixed odd-symmetric unitary `U`; its fixed points give odd-symmetric
    /// path perturbations.
    pub fn path_involution(
        &self,
        u: &LatticeOperator<R>,
        x: &LatticeOperator<R>,
    ) -> LatticeOperator<R> {
        let iu = self.operator(u.domain()).try_mul(u).unwrap();
        iu.adjoint()
            .try_mul(&x.transpose())
            .unwrap()
            .try_mul(&iu)
            .unwrap()
    }

    /// Symmetrize `x` to a fixed point of [`Self::path_involution`].
    pub fn symmetrize_for_path(
        &self,
        u: &LatticeOperator<R>,
        x: &LatticeOperator<R>,
    ) -> LatticeOperator<R> {
        let half = C::<R>::new(crate::r::<R>(0.5), R::zero());
        x.try_add(&self.path_involution(u, x)).unwrap().scale(half)
    }
}

/// Structure-independent symmetry flags of an operator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SymmetryFlags {
    pub self_adjoint: bool,
    /// `T^t = T`.
    pub symmetric: bool,
    /// entrywise real.
    pub real: bool,
    /// `I^* T^t I = T` for the supplied structure.
    pub odd_symmetric: bool,
}

pub fn classify_symmetry<R: Real>(
    t: &LatticeOperator<R>,
    ctx: Option<&SymmetryContext<R>>,
    tol: R,
) -> SymmetryFlags {
    SymmetryFlags {
        self_adjoint: t.residual(&t.adjoint()) < tol,
        symmetric: t.residual(&t.transpose()) < tol,
        real: t.residual(&t.conjugate()) < tol,
        odd_symmetric: ctx
            .map(|c| c.fiber_dim() == t.fiber_dim() && c.is_odd_symmetric(t, tol))
            .unwrap_or(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Op = LatticeOperator<f64>;

    #[test]
    fn standard_structure_is_quaternionic() {
        let ctx = SymmetryContext::<f64>::standard(4).unwrap();
        let i = ctx.fiber_matrix();
        assert!((i * i + CMat::<f64>::identity(4, 4)).norm() < 1e-14);
        assert!(SymmetryContext::from_fiber_matrix(i.clone()).is_ok());
        assert!(SymmetryContext::<f64>::standard(3).is_err());
    }

    #[test]
    fn diagonal_shift_pair_is_odd_symmetric() {
        // diag(S, S^*) on fiber dimension 2 satisfies I^* T^t I = T.
        let d = 2usize;
        let mut c = CMat::<f64>::zeros(d, d);
        c[(0, 0)] = C::new(1.0, 0.0);
        let up = Op::from_parts(
            Domain::FullLine,
            crate::symbol::LaurentSymbol::from_coeff(1, c.clone()),
            crate::symbol::LaurentSymbol::from_coeff(1, c),
            crate::range::SiteRange::EMPTY,
            CMat::<f64>::zeros(0, 0),
        )
        .unwrap();
        let mut cd = CMat::<f64>::zeros(d, d);
        cd[(1, 1)] = C::new(1.0, 0.0);
        let down = Op::from_parts(
            Domain::FullLine,
            crate::symbol::LaurentSymbol::from_coeff(-1, cd.clone()),
            crate::symbol::LaurentSymbol::from_coeff(-1, cd),
            crate::range::SiteRange::EMPTY,
            CMat::<f64>::zeros(0, 0),
        )
        .unwrap();
        let t = up.try_add(&down).unwrap();
        let ctx = SymmetryContext::<f64>::standard(2).unwrap();
        assert!(ctx.is_odd_symmetric(&t, 1e-12));
        // a plain scalar shift embedded diagonally is NOT odd symmetric
        let s = Op::shift_power(2, Domain::FullLine, 1);
        assert!(!ctx.is_odd_symmetric(&s, 1e-12));
    }

    #[test]
    fn path_involution_is_involutive_on_commutant() {
        let ctx = SymmetryContext::<f64>::standard(2).unwrap();
        let u = Op::identity(2, Domain::FullLine);
        let mut block = CMat::<f64>::zeros(4, 4);
        block[(0, 3)] = C::new(0.6, 0.2);
        block[(2, 1)] = C::new(-0.3, 0.9);
        let x = Op::finite(2, Domain::FullLine, crate::range::SiteRange::new(0, 1), block).unwrap();
        let xx = ctx.path_involution(&u, &ctx.path_involution(&u, &x));
        assert!(xx.residual(&x) < 1e-12);
        let sym = ctx.symmetrize_for_path(&u, &x);
        assert!(ctx.path_involution(&u, &sym).residual(&sym) < 1e-12);
    }
}
