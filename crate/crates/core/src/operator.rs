use crate::error::{Error, Result};
use crate::range::SiteRange;
use crate::symbol::{spectral_norm, LaurentSymbol};
use crate::{CMat, Real, C};

/// Underlying lattice of the operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// `l^2(Z) (x) C^d`
    FullLine,
    /// `l^2(N) (x) C^d`
    HalfLine,
}

/// Banded operator with two limit backgrounds and a finite central
/// perturbation. On the full line, rows `m < 0` follow the left background
/// and rows `m >= 0` the right one; the perturbation absorbs all deviations
/// and is supported on `window x window` (fiber-blocked). Half-line
/// operators have a zero left background and a window contained in `N`.
#[derive(Clone, Debug)]
pub struct LatticeOperator<R: Real> {
    fiber_dim: usize,
    domain: Domain,
    left: LaurentSymbol<R>,
    right: LaurentSymbol<R>,
    window: SiteRange,
    pert: CMat<R>,
}

impl<R: Real> LatticeOperator<R> {
    pub fn from_backgrounds(
        domain: Domain,
        left: LaurentSymbol<R>,
        right: LaurentSymbol<R>,
    ) -> Result<Self> {
        if left.fiber_dim() != right.fiber_dim() {
            return Err(Error::FiberMismatch(left.fiber_dim(), right.fiber_dim()));
        }
        if domain == Domain::HalfLine && !left.is_zero() {
            return Err(Error::InvalidHalfLine);
        }
        Ok(LatticeOperator {
            fiber_dim: left.fiber_dim(),
            domain,
            left,
            right,
            window: SiteRange::EMPTY,
            pert: CMat::<R>::zeros(0, 0),
        })
    }

    pub fn from_parts(
        domain: Domain,
        left: LaurentSymbol<R>,
        right: LaurentSymbol<R>,
        window: SiteRange,
        pert: CMat<R>,
    ) -> Result<Self> {
        let mut op = Self::from_backgrounds(domain, left, right)?;
        let n = window.len() * op.fiber_dim;
        assert_eq!(pert.nrows(), n, "perturbation must cover window x fiber");
        assert_eq!(pert.ncols(), n);
        if domain == Domain::HalfLine && !window.is_empty() && window.lo < 0 {
            return Err(Error::InvalidHalfLine);
        }
        op.window = window;
        op.pert = pert;
        op.trim();
        Ok(op)
    }

    pub fn zero(fiber_dim: usize, domain: Domain) -> Self {
        Self::from_backgrounds(
            domain,
            LaurentSymbol::zero(fiber_dim),
            LaurentSymbol::zero(fiber_dim),
        )
        .unwrap()
    }

    pub fn identity(fiber_dim: usize, domain: Domain) -> Self {
        let i = LaurentSymbol::identity(fiber_dim);
        let left = match domain {
            Domain::FullLine => i.clone(),
            Domain::HalfLine => LaurentSymbol::zero(fiber_dim),
        };
        Self::from_backgrounds(domain, left, i).unwrap()
    }

    /// `n`-th power of the left shift (`n < 0` gives the right shift powers).
    /// The left shift acts as `(S x)(m) = x(m + 1)`.
    pub fn shift_power(fiber_dim: usize, domain: Domain, n: i64) -> Self {
        let coeff = CMat::<R>::identity(fiber_dim, fiber_dim);
        let sym = LaurentSymbol::from_coeff(n, coeff);
        let left = match domain {
            Domain::FullLine => sym.clone(),
            Domain::HalfLine => LaurentSymbol::zero(fiber_dim),
        };
        Self::from_backgrounds(domain, left, sym).unwrap()
    }

    /// Orthogonal projection onto the sites `n >= 0` of the full line.
    pub fn half_line_projection(fiber_dim: usize) -> Self {
        Self::from_backgrounds(
            Domain::FullLine,
            LaurentSymbol::zero(fiber_dim),
            LaurentSymbol::identity(fiber_dim),
        )
        .unwrap()
    }

    /// The symmetry `F = 2P - 1` with `P` the half-line projection.
    pub fn standard_symmetry(fiber_dim: usize) -> Self {
        let id = CMat::<R>::identity(fiber_dim, fiber_dim);
        Self::from_backgrounds(
            Domain::FullLine,
            LaurentSymbol::from_coeff(0, id.map(|x| -x)),
            LaurentSymbol::from_coeff(0, id),
        )
        .unwrap()
    }

    /// Constant fiber matrix acting identically at every site.
    pub fn from_fiber_matrix(domain: Domain, m: CMat<R>) -> Self {
        let sym = LaurentSymbol::from_coeff(0, m);
        let left = match domain {
            Domain::FullLine => sym.clone(),
            Domain::HalfLine => LaurentSymbol::zero(sym.fiber_dim()),
        };
        Self::from_backgrounds(domain, left, sym).unwrap()
    }

    /// Finite-window operator with zero backgrounds.
    pub fn finite(
        fiber_dim: usize,
        domain: Domain,
        window: SiteRange,
        block: CMat<R>,
    ) -> Result<Self> {
        Self::from_parts(
            domain,
            LaurentSymbol::zero(fiber_dim),
            LaurentSymbol::zero(fiber_dim),
            window,
            block,
        )
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn window(&self) -> SiteRange {
        self.window
    }

    pub fn left_background(&self) -> &LaurentSymbol<R> {
        &self.left
    }

    pub fn right_background(&self) -> &LaurentSymbol<R> {
        &self.right
    }

    pub fn perturbation(&self) -> &CMat<R> {
        &self.pert
    }

    pub fn bandwidth(&self) -> i64 {
        self.left.bandwidth().max(self.right.bandwidth())
    }

    fn site_allowed(&self, site: i64) -> bool {
        self.domain == Domain::FullLine || site >= 0
    }

    /// Background matrix element (fiber block) at `(m, n)`.
    pub fn pure_block(&self, m: i64, n: i64) -> CMat<R> {
        let d = self.fiber_dim;
        if !self.site_allowed(m) || !self.site_allowed(n) {
            return CMat::<R>::zeros(d, d);
        }
        let sym = if self.domain == Domain::FullLine && m < 0 {
            &self.left
        } else {
            &self.right
        };
        match sym.coeff(n - m) {
            Some(c) => c.clone(),
            None => CMat::<R>::zeros(d, d),
        }
    }

    /// Exact matrix element (fiber block) at `(m, n)`.
    pub fn entry_block(&self, m: i64, n: i64) -> CMat<R> {
        let mut e = self.pure_block(m, n);
        if self.window.contains(m) && self.window.contains(n) {
            let d = self.fiber_dim;
            let i = self.window.offset_of(m) * d;
            let j = self.window.offset_of(n) * d;
            e += self.pert.view((i, j), (d, d)).clone_owned();
        }
        e
    }

    /// Dense matrix of the operator on `rows x cols`.
    pub fn dense(&self, rows: SiteRange, cols: SiteRange) -> CMat<R> {
        let d = self.fiber_dim;
        let mut out = CMat::<R>::zeros(rows.len() * d, cols.len() * d);
        for m in rows.iter() {
            for n in cols.iter() {
                let b = self.entry_block(m, n);
                let i = rows.offset_of(m) * d;
                let j = cols.offset_of(n) * d;
                out.view_mut((i, j), (d, d)).copy_from(&b);
            }
        }
        out
    }

    fn pure_dense(&self, rows: SiteRange, cols: SiteRange) -> CMat<R> {
        let d = self.fiber_dim;
        let mut out = CMat::<R>::zeros(rows.len() * d, cols.len() * d);
        for m in rows.iter() {
            for n in cols.iter() {
                let b = self.pure_block(m, n);
                let i = rows.offset_of(m) * d;
                let j = cols.offset_of(n) * d;
                out.view_mut((i, j), (d, d)).copy_from(&b);
            }
        }
        out
    }

    /// Drop exactly-zero boundary sites from the window.
    fn trim(&mut self) {
        let d = self.fiber_dim;
        while !self.window.is_empty() {
            let n = self.window.len() * d;
            let first_zero = self.pert.view((0, 0), (d, n)).iter().all(|c| c.norm_sqr() == R::zero())
                && self.pert.view((0, 0), (n, d)).iter().all(|c| c.norm_sqr() == R::zero());
            if first_zero {
                self.window = SiteRange::new(self.window.lo + 1, self.window.hi);
                self.pert = self.pert.view((d, d), (n - d, n - d)).clone_owned();
                continue;
            }
            let last_zero = self
                .pert
                .view((n - d, 0), (d, n))
                .iter()
                .all(|c| c.norm_sqr() == R::zero())
                && self
                    .pert
                    .view((0, n - d), (n, d))
                    .iter()
                    .all(|c| c.norm_sqr() == R::zero());
            if last_zero {
                self.window = SiteRange::new(self.window.lo, self.window.hi - 1);
                self.pert = self.pert.view((0, 0), (n - d, n - d)).clone_owned();
                continue;
            }
            break;
        }
        if self.window.is_empty() {
            self.pert = CMat::<R>::zeros(0, 0);
        }
    }

    fn check_compat(&self, other: &Self) -> Result<()> {
        if self.fiber_dim != other.fiber_dim {
            return Err(Error::FiberMismatch(self.fiber_dim, other.fiber_dim));
        }
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        Ok(())
    }

    /// Zone around the cut (and the band) where products/adjoints can deviate
    /// from the convolved backgrounds.
    fn mismatch_zone(&self, reach: i64) -> SiteRange {
        match self.domain {
            Domain::FullLine => SiteRange::new(-reach - 1, reach + 1),
            Domain::HalfLine => SiteRange::new(0, reach + 1),
        }
    }

    fn clip(&self, r: SiteRange) -> SiteRange {
        match self.domain {
            Domain::FullLine => r,
            Domain::HalfLine => r.clip_nonneg(),
        }
    }

    /// Build an operator from prescribed backgrounds and an entry oracle,
    /// with deviation support known to lie inside `support`.
    fn assemble(
        domain: Domain,
        left: LaurentSymbol<R>,
        right: LaurentSymbol<R>,
        support: SiteRange,
        dense: CMat<R>,
    ) -> Result<Self> {
        let skeleton = Self::from_backgrounds(domain, left, right)?;
        let pure = skeleton.pure_dense(support, support);
        Self::from_parts(
            domain,
            skeleton.left,
            skeleton.right,
            support,
            dense - pure,
        )
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        let left = self.left.add(&other.left);
        let right = self.right.add(&other.right);
        let support = self.clip(self.window.union(other.window));
        let mut dense = self.dense(support, support);
        dense += other.dense(support, support);
        Self::assemble(self.domain, left, right, support, dense)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        let left = self.left.convolve(&other.left);
        let right = self.right.convolve(&other.right);
        let reach = self.bandwidth() + other.bandwidth();
        let hull = self
            .window
            .union(other.window)
            .union(self.mismatch_zone(reach));
        let support = self.clip(hull.expand(reach));
        let mid = self.clip(support.expand(self.bandwidth()));
        let a = self.dense(support, mid);
        let b = other.dense(mid, support);
        Self::assemble(self.domain, left, right, support, a * b)
    }

    pub fn neg(&self) -> Self {
        self.scale(C::<R>::new(-R::one(), R::zero()))
    }

    pub fn scale(&self, factor: C<R>) -> Self {
        let mut out = self.clone();
        out.left = out.left.scale(factor);
        out.right = out.right.scale(factor);
        out.pert = out.pert.map(|x| x * factor);
        out.trim();
        out
    }

    pub fn adjoint(&self) -> Self {
        let left = self.left.adjoint();
        let right = self.right.adjoint();
        let reach = self.bandwidth();
        let support = self.clip(self.window.union(self.mismatch_zone(reach)));
        let dense = self.dense(support, support).adjoint();
        Self::assemble(self.domain, left, right, support, dense).unwrap()
    }

    pub fn conjugate(&self) -> Self {
        let mut out = self.clone();
        out.left = out.left.conjugate();
        out.right = out.right.conjugate();
        out.pert = out.pert.map(|x| x.conj());
        out
    }

    pub fn transpose(&self) -> Self {
        self.conjugate().adjoint()
    }

    /// Real part `(A + A*)/2`.
    pub fn real_part(&self) -> Self {
        let half = C::<R>::new(R::from_f64(0.5).unwrap(), R::zero());
        self.try_add(&self.adjoint()).unwrap().scale(half)
    }

    /// `left.norm + right.norm + |pert|`; tight exactly when both backgrounds
    /// vanish, which is how residual checks use it.
    pub fn zero_residual(&self) -> R {
        self.left.norm_bound() + self.right.norm_bound() + spectral_norm(&self.pert)
    }

    pub fn residual(&self, other: &Self) -> R {
        match self.try_sub(other) {
            Ok(d) => d.zero_residual(),
            Err(_) => R::max_value().unwrap(),
        }
    }

    pub fn is_self_adjoint(&self, tol: R) -> bool {
        self.residual(&self.adjoint()) < tol
    }

    pub fn unitarity_defect(&self) -> R {
        let id = Self::identity(self.fiber_dim, self.domain);
        let a = self.adjoint().try_mul(self).unwrap().residual(&id);
        let b = self.try_mul(&self.adjoint()).unwrap().residual(&id);
        a.max(b)
    }

    pub fn projection_defect(&self) -> R {
        let idem = self.try_mul(self).unwrap().residual(self);
        idem.max(self.residual(&self.adjoint()))
    }

    /// True when both backgrounds have zero bandwidth and diagonal `+-1`
    /// coefficients; for such operators the window spectrum in `(-1, 1)`
    /// is exact for any margin.
    pub fn diagonal_pm_one_backgrounds(&self, tol: R) -> bool {
        let check = |sym: &LaurentSymbol<R>| -> bool {
            if sym.is_zero() {
                // legal only on the half line, where the left background is 0
                return self.domain == Domain::HalfLine;
            }
            if sym.bandwidth() != 0 {
                return false;
            }
            let c = sym.coeff(0).unwrap();
            for i in 0..c.nrows() {
                for j in 0..c.ncols() {
                    let v = c[(i, j)];
                    if i == j {
                        if (v.norm_sqr().sqrt() - R::one()).abs() > tol || v.im.abs() > tol {
                            return false;
                        }
                    } else if v.norm_sqr().sqrt() > tol {
                        return false;
                    }
                }
            }
            true
        };
        check(&self.left) && check(&self.right)
    }

    pub fn has_zero_backgrounds(&self, tol: R) -> bool {
        self.left.norm_bound() < tol && self.right.norm_bound() < tol
    }

    /// Dense compression to the window enlarged by `margin + bandwidth`,
    /// together with the covered sites.
    pub fn window_compression(&self, margin: i64) -> (CMat<R>, Vec<i64>) {
        let base = if self.window.is_empty() {
            match self.domain {
                Domain::FullLine => SiteRange::new(-1, 0),
                Domain::HalfLine => SiteRange::new(0, 0),
            }
        } else {
            self.window
        };
        let range = self.clip(base.expand(margin + self.bandwidth()));
        (self.dense(range, range), range.iter().collect())
    }

    /// Operator norm estimate: sampled symbol sup and windowed compression.
    pub fn norm_est(&self) -> R {
        let mut n = self.left.sup_norm_sampled(512).max(self.right.sup_norm_sampled(512));
        let (m, _) = self.window_compression(2);
        n = n.max(spectral_norm(&m));
        n
    }

    /// Fold four half-line blocks into one full-line operator; copy 1 goes to
    /// sites `n >= 0` and copy 2 to `-(n+1)`. Off-diagonal blocks must have a
    /// zero background.
    pub fn fold(
        b11: &Self,
        b12: &Self,
        b21: &Self,
        b22: &Self,
    ) -> Result<Self> {
        for b in [b11, b12, b21, b22] {
            if b.domain != Domain::HalfLine {
                return Err(Error::DomainMismatch);
            }
            if b.fiber_dim != b11.fiber_dim {
                return Err(Error::FiberMismatch(b11.fiber_dim, b.fiber_dim));
            }
        }
        if !b12.right.is_zero() || !b21.right.is_zero() {
            return Err(Error::FoldBlockNotCompact);
        }
        let right = b11.right.clone();
        let left = b22.right.reflect();
        let reach = right.bandwidth().max(left.bandwidth());
        let support = b11
            .window
            .union(b22.window.reflect())
            .union(b12.window)
            .union(b12.window.reflect())
            .union(b21.window)
            .union(b21.window.reflect())
            .union(SiteRange::new(-reach - 1, reach + 1));
        let d = b11.fiber_dim;
        let mut dense = CMat::<R>::zeros(support.len() * d, support.len() * d);
        for m in support.iter() {
            for n in support.iter() {
                let b = match (m >= 0, n >= 0) {
                    (true, true) => b11.entry_block(m, n),
                    (true, false) => b12.entry_block(m, -n - 1),
                    (false, true) => b21.entry_block(-m - 1, n),
                    (false, false) => b22.entry_block(-m - 1, -n - 1),
                };
                dense
                    .view_mut((support.offset_of(m) * d, support.offset_of(n) * d), (d, d))
                    .copy_from(&b);
            }
        }
        Self::assemble(Domain::FullLine, left, right, support, dense)
    }

    /// Inverse of `fold`: split a full-line operator into its four half-line
    /// blocks with respect to the `n >= 0` / `n < 0` decomposition.
    pub fn unfold(&self) -> Result<[Self; 4]> {
        if self.domain != Domain::FullLine {
            return Err(Error::DomainMismatch);
        }
        let d = self.fiber_dim;
        let zero = LaurentSymbol::zero(d);
        let bw = self.bandwidth();
        let pos = self
            .window
            .intersect(SiteRange::new(0, i64::MAX / 2))
            .union(SiteRange::new(0, bw));
        let negref = self
            .window
            .intersect(SiteRange::new(i64::MIN / 2, -1))
            .reflect()
            .union(SiteRange::new(0, bw));

        let grab = |rows: SiteRange,
                    cols: SiteRange,
                    map_row: bool,
                    map_col: bool|
         -> CMat<R> {
            let mut out = CMat::<R>::zeros(rows.len() * d, cols.len() * d);
            for m in rows.iter() {
                for n in cols.iter() {
                    let mm = if map_row { -m - 1 } else { m };
                    let nn = if map_col { -n - 1 } else { n };
                    out.view_mut((rows.offset_of(m) * d, cols.offset_of(n) * d), (d, d))
                        .copy_from(&self.entry_block(mm, nn));
                }
            }
            out
        };

        let b11 = Self::assemble(
            Domain::HalfLine,
            zero.clone(),
            self.right.clone(),
            pos,
            grab(pos, pos, false, false),
        )?;
        let b22 = Self::assemble(
            Domain::HalfLine,
            zero.clone(),
            self.left.reflect(),
            negref,
            grab(negref, negref, true, true),
        )?;
        let sup12 = pos.union(negref);
        let b12 = Self::from_parts(
            Domain::HalfLine,
            zero.clone(),
            zero.clone(),
            sup12,
            grab(sup12, sup12, false, true),
        )?;
        let b21 = Self::from_parts(
            Domain::HalfLine,
            zero.clone(),
            zero,
            sup12,
            grab(sup12, sup12, true, false),
        )?;
        Ok([b11, b12, b21, b22])
    }

    /// Compression to the half line `n >= 0` (the range of the standard
    /// half-line projection).
    pub fn compress_to_half_line(&self) -> Result<Self> {
        let [b11, _, _, _] = self.unfold()?;
        Ok(b11)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Op = LatticeOperator<f64>;

    fn tol() -> f64 {
        1e-12
    }

    #[test]
    fn shift_unitarity_full_line() {
        let s = Op::shift_power(1, Domain::FullLine, 1);
        assert!(s.unitarity_defect() < tol());
        let prod = s.try_mul(&s.adjoint()).unwrap();
        assert!(prod.residual(&Op::identity(1, Domain::FullLine)) < tol());
        assert!(prod.window().is_empty());
    }

    #[test]
    fn shift_squared_is_double_offset() {
        let s = Op::shift_power(1, Domain::FullLine, 1);
        let s2 = s.try_mul(&s).unwrap();
        assert!(s2.residual(&Op::shift_power(1, Domain::FullLine, 2)) < tol());
    }

    #[test]
    fn half_line_shift_defect() {
        // S S* = 1 on the half line, S* S = 1 - |0><0|
        let s = Op::shift_power(1, Domain::HalfLine, 1);
        let id = Op::identity(1, Domain::HalfLine);
        let ss = s.try_mul(&s.adjoint()).unwrap();
        assert!(ss.residual(&id) < tol());
        let sts = s.adjoint().try_mul(&s).unwrap();
        let defect = id.try_sub(&sts).unwrap();
        assert_eq!(defect.window(), SiteRange::new(0, 0));
        assert!((defect.perturbation()[(0, 0)].re - 1.0).abs() < tol());
        assert!(defect.has_zero_backgrounds(tol()));
    }

    #[test]
    fn adjoint_of_shift_swaps_offset() {
        let s = Op::shift_power(1, Domain::FullLine, 1);
        assert!(s.adjoint().residual(&Op::shift_power(1, Domain::FullLine, -1)) < tol());
    }

    #[test]
    fn transpose_round_trip() {
        let mut pert = CMat::<f64>::zeros(4, 4);
        pert[(0, 1)] = num_complex::Complex::new(0.3, -0.7);
        pert[(2, 3)] = num_complex::Complex::new(-1.1, 0.2);
        let base = Op::shift_power(1, Domain::FullLine, 1);
        let op = Op::from_parts(
            Domain::FullLine,
            base.left_background().clone(),
            base.right_background().clone(),
            SiteRange::new(-2, 1),
            CMat::<f64>::from_fn(4, 4, |i, j| pert[(i % 4, j % 4)] * num_complex::Complex::new((i + 2 * j) as f64 * 0.1, 0.0)),
        )
        .unwrap();
        assert!(op.transpose().transpose().residual(&op) < tol());
    }

    #[test]
    fn fold_identity_blocks() {
        let id = Op::identity(1, Domain::HalfLine);
        let z = Op::zero(1, Domain::HalfLine);
        let folded = Op::fold(&id, &z, &z, &id).unwrap();
        assert!(folded.residual(&Op::identity(1, Domain::FullLine)) < tol());
    }

    #[test]
    fn fold_unfold_round_trip() {
        let s = Op::shift_power(1, Domain::HalfLine, 1);
        let id = Op::identity(1, Domain::HalfLine);
        let p0 = id.try_sub(&s.adjoint().try_mul(&s).unwrap()).unwrap();
        let blocks = [s.clone(), p0.clone(), p0.clone(), s.adjoint().neg()];
        let folded = Op::fold(&blocks[0], &blocks[1], &blocks[2], &blocks[3]).unwrap();
        let back = folded.unfold().unwrap();
        for (a, b) in back.iter().zip(blocks.iter()) {
            assert!(a.residual(b) < tol());
        }
    }

    #[test]
    fn standard_symmetry_squares_to_one() {
        let f = Op::standard_symmetry(2);
        let sq = f.try_mul(&f).unwrap();
        assert!(sq.residual(&Op::identity(2, Domain::FullLine)) < tol());
        assert!(f.is_self_adjoint(tol()));
        assert!(f.diagonal_pm_one_backgrounds(tol()));
    }

    #[test]
    fn mul_matches_dense_arithmetic() {
        // Representation exactness against dense products on a wide window.
        let s = Op::shift_power(1, Domain::FullLine, 1);
        let p = Op::half_line_projection(1);
        let prod = s.try_mul(&p).unwrap();
        let range = SiteRange::new(-20, 20);
        let mid = SiteRange::new(-22, 22);
        let dense = s.dense(range, mid) * p.dense(mid, range);
        assert!((prod.dense(range, range) - dense).norm() < tol());
    }
}
