use std::collections::BTreeMap;

use crate::{CMat, Real, C};

/// Banded Laurent symbol: finitely many diagonals of `d x d` complex fiber
/// coefficients. The coefficient at offset `k` sits on the matrix diagonal
/// `(m, m + k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSymbol<R: Real> {
    fiber_dim: usize,
    diagonals: BTreeMap<i64, CMat<R>>,
}

impl<R: Real> LaurentSymbol<R> {
    pub fn zero(fiber_dim: usize) -> Self {
        assert!(fiber_dim > 0, "fiber dimension must be positive");
        LaurentSymbol {
            fiber_dim,
            diagonals: BTreeMap::new(),
        }
    }

    pub fn identity(fiber_dim: usize) -> Self {
        Self::from_coeff(0, CMat::<R>::identity(fiber_dim, fiber_dim))
    }

    pub fn from_coeff(offset: i64, coeff: CMat<R>) -> Self {
        assert_eq!(coeff.nrows(), coeff.ncols(), "fiber coefficients are square");
        let mut s = Self::zero(coeff.nrows());
        s.set_coeff(offset, coeff);
        s
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn set_coeff(&mut self, offset: i64, coeff: CMat<R>) {
        assert_eq!(coeff.nrows(), self.fiber_dim);
        assert_eq!(coeff.ncols(), self.fiber_dim);
        if coeff.iter().all(|c| c.norm_sqr() == R::zero()) {
            self.diagonals.remove(&offset);
        } else {
            self.diagonals.insert(offset, coeff);
        }
    }

    pub fn coeff(&self, offset: i64) -> Option<&CMat<R>> {
        self.diagonals.get(&offset)
    }

    pub fn offsets(&self) -> impl Iterator<Item = i64> + '_ {
        self.diagonals.keys().copied()
    }

    pub fn diagonals(&self) -> &BTreeMap<i64, CMat<R>> {
        &self.diagonals
    }

    pub fn is_zero(&self) -> bool {
        self.diagonals.is_empty()
    }

    pub fn bandwidth(&self) -> i64 {
        self.diagonals
            .keys()
            .map(|k| k.abs())
            .max()
            .unwrap_or(0)
    }

    /// Upper bound on the operator norm of the associated Laurent operator
    /// (triangle inequality over diagonals, Frobenius per coefficient).
    pub fn norm_bound(&self) -> R {
        self.diagonals
            .values()
            .fold(R::zero(), |acc, c| acc + c.norm())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.fiber_dim, other.fiber_dim);
        let mut out = self.clone();
        for (k, c) in &other.diagonals {
            let cur = match out.diagonals.get(k) {
                Some(existing) => existing + c,
                None => c.clone(),
            };
            out.set_coeff(*k, cur);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(C::<R>::new(-R::one(), R::zero()))
    }

    pub fn scale(&self, factor: C<R>) -> Self {
        let mut out = Self::zero(self.fiber_dim);
        for (k, c) in &self.diagonals {
            out.set_coeff(*k, c.map(|x| x * factor));
        }
        out
    }

    /// Symbol of the product of the two Laurent operators.
    pub fn convolve(&self, other: &Self) -> Self {
        assert_eq!(self.fiber_dim, other.fiber_dim);
        let mut out = Self::zero(self.fiber_dim);
        for (ka, ca) in &self.diagonals {
            for (kb, cb) in &other.diagonals {
                let k = ka + kb;
                let term = ca * cb;
                let cur = match out.diagonals.get(&k) {
                    Some(existing) => existing + term,
                    None => term,
                };
                out.set_coeff(k, cur);
            }
        }
        out
    }

    /// Symbol of the adjoint operator: offset reflection plus fiber adjoint.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.fiber_dim);
        for (k, c) in &self.diagonals {
            out.set_coeff(-k, c.adjoint());
        }
        out
    }

    pub fn conjugate(&self) -> Self {
        let mut out = Self::zero(self.fiber_dim);
        for (k, c) in &self.diagonals {
            out.set_coeff(*k, c.map(|x| x.conj()));
        }
        out
    }

    /// Symbol of the transposed operator: offset reflection plus fiber transpose.
    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.fiber_dim);
        for (k, c) in &self.diagonals {
            out.set_coeff(-k, c.transpose());
        }
        out
    }

    /// Offset reflection only (no fiber action); the fold convention maps the
    /// second copy through `n -> -n-1`, which reverses orientation.
    pub fn reflect(&self) -> Self {
        let mut out = Self::zero(self.fiber_dim);
        for (k, c) in &self.diagonals {
            out.set_coeff(-k, c.clone());
        }
        out
    }

    /// Symbol value on the unit circle, convention `sum_k c_k e^{-ik theta}`.
    /// With this convention the left shift has symbol `e^{-i theta}`.
    pub fn eval(&self, theta: R) -> CMat<R> {
        let mut out = CMat::<R>::zeros(self.fiber_dim, self.fiber_dim);
        for (k, c) in &self.diagonals {
            let arg = -R::from_i64(*k).unwrap() * theta;
            let phase = C::<R>::new(arg.cos(), arg.sin());
            out += c.map(|x| x * phase);
        }
        out
    }

    /// Sampled sup of the symbol's spectral norm over the circle.
    pub fn sup_norm_sampled(&self, samples: usize) -> R {
        if self.is_zero() {
            return R::zero();
        }
        let two_pi = R::two_pi();
        let mut best = R::zero();
        for i in 0..samples {
            let theta = two_pi * R::from_usize(i).unwrap() / R::from_usize(samples).unwrap();
            let m = self.eval(theta);
            let n = spectral_norm(&m);
            if n > best {
                best = n;
            }
        }
        best
    }

    /// Lipschitz constant of `theta -> symbol(theta)` in operator norm.
    pub fn circle_lipschitz(&self) -> R {
        self.diagonals.iter().fold(R::zero(), |acc, (k, c)| {
            acc + R::from_i64(k.abs()).unwrap() * c.norm()
        })
    }
}

/// Largest singular value.
pub fn spectral_norm<R: Real>(m: &CMat<R>) -> R {
    if m.nrows() == 0 || m.ncols() == 0 {
        return R::zero();
    }
    let svd = m.clone().svd(false, false);
    svd.singular_values[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = LaurentSymbol<f64>;

    #[test]
    fn shift_times_adjoint_is_identity() {
        let s = S::from_coeff(1, CMat::<f64>::identity(1, 1));
        let prod = s.convolve(&s.adjoint());
        assert_eq!(prod.bandwidth(), 0);
        assert_eq!(prod.coeff(0).unwrap()[(0, 0)].re, 1.0);
    }

    #[test]
    fn transpose_is_involutive() {
        let mut s = S::zero(2);
        s.set_coeff(1, CMat::<f64>::from_row_slice(2, 2, &[1.0.into(), 2.0.into(), 3.0.into(), 4.0.into()]));
        assert_eq!(s.transpose().transpose(), s);
    }

    #[test]
    fn left_shift_symbol_winds_negatively() {
        let s = S::from_coeff(1, CMat::<f64>::identity(1, 1));
        let v = s.eval(std::f64::consts::FRAC_PI_2);
        assert!((v[(0, 0)].im + 1.0).abs() < 1e-12);
    }
}
