//! Spectral flow along operator paths: the bin-counting algorithm with
//! rigorous adaptive refinement, the pairwise flow `SF(F, U)`, its Z2-valued
//! refinement, winding numbers of unitary paths, and Kramers checks.

use serde::{Deserialize, Serialize};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fredholm::pair_index;
use crate::operator::LatticeOperator;
use crate::range::SiteRange;
use crate::spectrum::discrete_spectrum;
use crate::symmetry::SymmetryContext;
use crate::{r, CMat, Real, C};

/// Admissibility class of a path (plain or odd-symmetric constrained).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathTag {
    Plain,
    OddSymmetric,
}

/// Path `s -> F + s U^*[F,U] + sin(pi s) B` of self-adjoint operators with
/// involution endpoints `F` and `U^* F U`; the bump `B` vanishes at both
/// endpoints, so all such paths share endpoints with the canonical one.
#[derive(Clone, Debug)]
pub struct OperatorPath<R: Real> {
    f: LatticeOperator<R>,
    u: LatticeOperator<R>,
    slope: LatticeOperator<R>,
    bump: Option<LatticeOperator<R>>,
    tag: PathTag,
}

impl<R: Real> OperatorPath<R> {
    /// The canonical linear path `F_s = F + s U^*[F,U]`.
    pub fn canonical(f: &LatticeOperator<R>, u: &LatticeOperator<R>) -> Result<Self> {
        // Dilations built from matrix square roots of near-singular defect
        // operators carry residuals up to ~1e-8; admit them, since the flow
        // is stable under perturbations far below the gap scale.
        let tol = r::<R>(1e-7);
        let inv = f
            .try_mul(f)?
            .residual(&LatticeOperator::identity(f.fiber_dim(), f.domain()));
        if inv > tol || !f.is_self_adjoint(tol) {
            return Err(Error::Unsupported(
                "path base must be a self-adjoint involution".into(),
            ));
        }
        let ud = u.unitarity_defect();
        if ud > tol {
            return Err(Error::NotUnitary(ud.to_f64().unwrap_or(f64::NAN)));
        }
        let slope = u.adjoint().try_mul(f)?.try_mul(u)?.try_sub(f)?;
        let bg = slope
            .left_background()
            .norm_bound()
            .max(slope.right_background().norm_bound());
        if bg > tol {
            return Err(Error::NonCompactDeviation(bg.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(OperatorPath {
            f: f.clone(),
            u: u.clone(),
            slope,
            bump: None,
            tag: PathTag::Plain,
        })
    }

    /// Canonical path plus a seeded self-adjoint finite-window bump scaled by
    /// `sin(pi s)`; stays in the same admissible class with equal endpoints.
    pub fn with_random_bump(
        f: &LatticeOperator<R>,
        u: &LatticeOperator<R>,
        seed: u64,
    ) -> Result<Self> {
        let mut path = Self::canonical(f, u)?;
        path.bump = Some(random_bump(&path.slope, seed));
        Ok(path)
    }

    /// Canonical path with the odd-symmetric tag; requires `U` (and hence the
    /// path) odd symmetric so that `F_{1-s} = (IU)^* (F_s)^t (IU)`.
    pub fn odd(
        f: &LatticeOperator<R>,
        u: &LatticeOperator<R>,
        ctx: &SymmetryContext<R>,
    ) -> Result<Self> {
        let tol = r::<R>(1e-7);
        if !ctx.is_odd_symmetric(u, tol) {
            return Err(Error::MissingSymmetry("odd path requires odd-symmetric U"));
        }
        let mut path = Self::canonical(f, u)?;
        path.tag = PathTag::OddSymmetric;
        Ok(path)
    }

    /// Odd-tag path with a seeded bump symmetrized to a fixed point of the
    /// involution `X -> (IU)^* X^t (IU)`, preserving the reflection law.
    pub fn odd_with_random_bump(
        f: &LatticeOperator<R>,
        u: &LatticeOperator<R>,
        ctx: &SymmetryContext<R>,
        seed: u64,
    ) -> Result<Self> {
        let mut path = Self::odd(f, u, ctx)?;
        let raw = random_bump(&path.slope, seed);
        path.bump = Some(ctx.symmetrize_for_path(u, &raw));
        Ok(path)
    }

    pub fn tag(&self) -> PathTag {
        self.tag
    }

    pub fn base(&self) -> &LatticeOperator<R> {
        &self.f
    }

    pub fn companion(&self) -> &LatticeOperator<R> {
        &self.u
    }

    /// Path value `F_s`.
    pub fn at(&self, s: R) -> LatticeOperator<R> {
        let mut op = self
            .f
            .try_add(&self.slope.scale(C::<R>::new(s, R::zero())))
            .unwrap();
        if let Some(b) = &self.bump {
            let w = (R::pi() * s).sin();
            op = op.try_add(&b.scale(C::<R>::new(w, R::zero()))).unwrap();
        }
        op
    }

    /// Upper bound for `||F_s - F_t|| / |s - t|`.
    pub fn lipschitz_bound(&self) -> R {
        let mut l = self.slope.norm_est();
        if let Some(b) = &self.bump {
            l += R::pi() * b.norm_est();
        }
        l
    }
}

fn random_bump<R: Real>(slope: &LatticeOperator<R>, seed: u64) -> LatticeOperator<R> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = if slope.window().is_empty() {
        SiteRange::new(-2, 2)
    } else {
        slope.window().expand(1)
    };
    let d = slope.fiber_dim();
    let n = w.len() * d;
    let raw = CMat::<R>::from_fn(n, n, |_, _| {
        C::<R>::new(
            r::<R>(rng.gen_range(-0.2..0.2)),
            r::<R>(rng.gen_range(-0.2..0.2)),
        )
    });
    let herm = (&raw + raw.adjoint()).map(|x| x * C::<R>::new(r::<R>(0.5), R::zero()));
    LatticeOperator::finite(d, slope.domain(), w, herm).unwrap()
}

/// Options of the flow engine.
#[derive(Clone, Copy, Debug)]
pub struct FlowOptions {
    /// Segments of the initial uniform partition.
    pub initial_segments: usize,
    /// Bisection depth cap; `SPECFLOW_MAX_REFINE` overrides the default 14.
    pub max_depth: usize,
    /// Eigenvalues within this of 0 count as crossing ties at grid nodes.
    pub zero_tol: f64,
    /// Eigenvalue tolerance handed to the spectral engine.
    pub eig_tol: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        let max_depth = std::env::var("SPECFLOW_MAX_REFINE")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .unwrap_or(14);
        FlowOptions {
            initial_segments: 8,
            max_depth,
            zero_tol: 1e-10,
            eig_tol: 1e-10,
        }
    }
}

/// One node of the exported eigenvalue curves.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveNode {
    pub s: f64,
    pub eigenvalues: Vec<f64>,
}

/// Per-segment bin bound used by the counting formula.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SegmentBin {
    pub s_start: f64,
    pub s_end: f64,
    pub a: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowDiagnostics {
    pub segments: usize,
    pub bisections: usize,
    pub max_depth_used: usize,
    pub lipschitz_bound: f64,
    pub zero_tol: f64,
    pub bins: Vec<SegmentBin>,
}

/// Result of a spectral flow computation, with the eigenvalue curves at all
/// visited grid nodes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowReport {
    pub flow: i64,
    pub flow_mod2: Option<u8>,
    pub grid: Vec<f64>,
    pub curves: Vec<CurveNode>,
    pub diagnostics: FlowDiagnostics,
}

struct FlowState<R: Real> {
    lip: R,
    ztol: R,
    eig_tol: R,
    max_depth: usize,
    segments: usize,
    bisections: usize,
    max_depth_used: usize,
    curves: Vec<(R, Vec<R>)>,
    bins: Vec<SegmentBin>,
}

impl<R: Real> FlowState<R> {
    fn eigs(&self, path: &OperatorPath<R>, s: R) -> Result<Vec<R>> {
        let op = path.at(s);
        let ds = discrete_spectrum(&op, -R::one(), R::one(), self.eig_tol)?;
        Ok(ds.eigenvalues)
    }
}

/// Spectral flow of the path over `[s0, s1]` by the bin-counting formula:
/// per segment, a bin bound `a < 0` is chosen as the midpoint of the largest
/// gap of the endpoint spectra below zero, and the contribution is the
/// change of the eigenvalue count in `(a, 0]`. A segment is bisected until
/// the operator-norm movement across it is below a quarter of the distance
/// from `a` to all endpoint eigenvalues, which guarantees `a` stays in the
/// resolvent set throughout the segment.
pub fn spectral_flow<R: Real>(
    path: &OperatorPath<R>,
    s0: R,
    s1: R,
    opts: FlowOptions,
) -> Result<FlowReport> {
    assert!(s1 > s0);
    let mut st = FlowState {
        lip: path.lipschitz_bound(),
        ztol: r::<R>(opts.zero_tol),
        eig_tol: r::<R>(opts.eig_tol),
        max_depth: opts.max_depth,
        segments: 0,
        bisections: 0,
        max_depth_used: 0,
        curves: Vec::new(),
        bins: Vec::new(),
    };
    let n = opts.initial_segments.max(1);
    let mut nodes = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let s = s0 + (s1 - s0) * R::from_usize(i).unwrap() / R::from_usize(n).unwrap();
        nodes.push((s, st.eigs(path, s)?));
    }
    st.curves.push(nodes[0].clone());
    let mut flow = 0i64;
    for w in nodes.windows(2) {
        let (a, sa) = &w[0];
        let (b, sb) = &w[1];
        flow += segment_flow(path, *a, *b, sa, sb, 0, &mut st)?;
        st.curves.push((*b, sb.clone()));
    }
    let grid: Vec<f64> = st
        .curves
        .iter()
        .map(|(s, _)| s.to_f64().unwrap())
        .collect();
    let curves = st
        .curves
        .iter()
        .map(|(s, e)| CurveNode {
            s: s.to_f64().unwrap(),
            eigenvalues: e.iter().map(|v| v.to_f64().unwrap()).collect(),
        })
        .collect();
    Ok(FlowReport {
        flow,
        flow_mod2: None,
        grid,
        curves,
        diagnostics: FlowDiagnostics {
            segments: st.segments,
            bisections: st.bisections,
            max_depth_used: st.max_depth_used,
            lipschitz_bound: st.lip.to_f64().unwrap(),
            zero_tol: opts.zero_tol,
            bins: st.bins,
        },
    })
}

fn segment_flow<R: Real>(
    path: &OperatorPath<R>,
    s0: R,
    s1: R,
    spec0: &[R],
    spec1: &[R],
    depth: usize,
    st: &mut FlowState<R>,
) -> Result<i64> {
    st.max_depth_used = st.max_depth_used.max(depth);
    let a = choose_bin_bound(spec0, spec1);
    let margin = spec0
        .iter()
        .chain(spec1.iter())
        .map(|v| (*v - a).abs())
        .fold((a + R::one()).abs(), |acc, d| acc.min(d));
    let movement = (s1 - s0) * st.lip;
    if movement * r::<R>(4.0) >= margin {
        if depth >= st.max_depth {
            return Err(Error::RefinementLimit(format!(
                "segment [{:.6}, {:.6}] still moves {:.3e} against bin margin {:.3e} at depth {}",
                s0.to_f64().unwrap(),
                s1.to_f64().unwrap(),
                movement.to_f64().unwrap(),
                margin.to_f64().unwrap(),
                depth
            )));
        }
        st.bisections += 1;
        let sm = (s0 + s1) * r::<R>(0.5);
        let specm = st.eigs(path, sm)?;
        let left = segment_flow(path, s0, sm, spec0, &specm, depth + 1, st)?;
        st.curves.push((sm, specm.clone()));
        let right = segment_flow(path, sm, s1, &specm, spec1, depth + 1, st)?;
        return Ok(left + right);
    }
    st.segments += 1;
    st.bins.push(SegmentBin {
        s_start: s0.to_f64().unwrap(),
        s_end: s1.to_f64().unwrap(),
        a: a.to_f64().unwrap(),
    });
    let count = |spec: &[R]| -> i64 {
        spec.iter()
            .filter(|v| **v > a && **v <= st.ztol)
            .count() as i64
    };
    Ok(count(spec0) - count(spec1))
}

/// Midpoint of the largest gap of the combined endpoint spectra within
/// `[-1, 0]`; falls back to `-1/2` when there is no spectrum below zero.
fn choose_bin_bound<R: Real>(spec0: &[R], spec1: &[R]) -> R {
    let mut pts: Vec<R> = vec![-R::one(), R::zero()];
    pts.extend(
        spec0
            .iter()
            .chain(spec1.iter())
            .copied()
            .filter(|v| *v > -R::one() && *v < R::zero()),
    );
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut best_gap = R::zero();
    let mut best_mid = -r::<R>(0.5);
    for w in pts.windows(2) {
        let gap = w[1] - w[0];
        if gap > best_gap {
            best_gap = gap;
            best_mid = (w[0] + w[1]) * r::<R>(0.5);
        }
    }
    best_mid
}

/// `SF(F, U)`: flow of the canonical path over `[0, 1]`.
pub fn sf_pair<R: Real>(f: &LatticeOperator<R>, u: &LatticeOperator<R>) -> Result<i64> {
    let path = OperatorPath::canonical(f, u)?;
    Ok(spectral_flow(&path, R::zero(), R::one(), FlowOptions::default())?.flow)
}

/// Full flow report of a path over `[0, 1]`.
pub fn flow_report<R: Real>(path: &OperatorPath<R>) -> Result<FlowReport> {
    spectral_flow(path, R::zero(), R::one(), FlowOptions::default())
}

/// Independent flow oracle: `SF(path) = Ind(P(0), P(1))` with `P(s)` the
/// negative spectral projection `(1 - F_s)/2` at the involution endpoints.
pub fn sf_via_pair_index<R: Real>(path: &OperatorPath<R>, s0: R, s1: R) -> Result<i64> {
    let half = C::<R>::new(r::<R>(0.5), R::zero());
    let proj = |s: R| -> Result<LatticeOperator<R>> {
        let fs = path.at(s);
        let id = LatticeOperator::identity(fs.fiber_dim(), fs.domain());
        Ok(id.try_sub(&fs)?.scale(half))
    };
    pair_index(&proj(s0)?, &proj(s1)?)
}

/// `SF_2(F, U)`: flow of the odd canonical path over `[0, 1/2]`, mod 2.
pub fn z2_spectral_flow<R: Real>(
    f: &LatticeOperator<R>,
    u: &LatticeOperator<R>,
    ctx: &SymmetryContext<R>,
) -> Result<u8> {
    let path = OperatorPath::odd(f, u, ctx)?;
    Ok(z2_flow_of_path(&path)?.flow_mod2.unwrap())
}

/// Flow report over the half path `[0, 1/2]` of an odd-tag path, carrying
/// the mod-2 value.
pub fn z2_flow_of_path<R: Real>(path: &OperatorPath<R>) -> Result<FlowReport> {
    if path.tag() != PathTag::OddSymmetric {
        return Err(Error::MissingSymmetry("Z2 flow requires an odd-tag path"));
    }
    let mut rep = spectral_flow(path, R::zero(), r::<R>(0.5), FlowOptions::default())?;
    rep.flow_mod2 = Some((rep.flow.rem_euclid(2)) as u8);
    Ok(rep)
}

/// Kramers check of a self-adjoint operator against the anti-unitary
/// `psi -> U^* I^* conj(psi)` (squaring to -1): all discrete eigenvalues in
/// `(-1, 1)` must have even multiplicity, and each eigenvector must be
/// orthogonal to its partner, which must again be an eigenvector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KramersReport {
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub all_even: bool,
    pub max_pair_overlap: f64,
    pub max_partner_residual: f64,
}

pub fn kramers_check<R: Real>(
    op: &LatticeOperator<R>,
    u: &LatticeOperator<R>,
    ctx: &SymmetryContext<R>,
    tol: R,
) -> Result<KramersReport> {
    // Inset the gap interval: eigenvalues within 1e-6 of the essential edge
    // are artifacts of the dilation's finite precision, not gap states.
    let edge = R::one() - r::<R>(1e-6);
    let ds = discrete_spectrum(op, -edge, edge, tol)?;
    let cluster_tol = r::<R>(1e-8);
    let mut eigenvalues = Vec::new();
    let mut multiplicities = Vec::new();
    for v in &ds.eigenvalues {
        match eigenvalues.last() {
            Some(&last) if (*v - r::<R>(last)).abs() < cluster_tol => {
                *multiplicities.last_mut().unwrap() += 1;
            }
            _ => {
                eigenvalues.push(v.to_f64().unwrap());
                multiplicities.push(1);
            }
        }
    }
    let all_even = multiplicities.iter().all(|m| m % 2 == 0);

    if ds.sites.is_empty() || ds.eigenvalues.is_empty() {
        return Ok(KramersReport {
            eigenvalues,
            multiplicities,
            all_even,
            max_pair_overlap: 0.0,
            max_partner_residual: 0.0,
        });
    }
    // dense action of V = U^* I^* and of the operator on the eigenvector span
    let v_op = u.adjoint().try_mul(&ctx.operator(op.domain()).adjoint())?;
    let cols = SiteRange::new(ds.sites[0], *ds.sites.last().unwrap());
    let bw = v_op.bandwidth().max(op.bandwidth());
    let rows = cols.expand(bw);
    let vmat = v_op.dense(rows, cols);
    let omat = op.dense(rows, rows);
    let mut max_overlap = R::zero();
    let mut max_res = R::zero();
    for (j, lambda) in ds.eigenvalues.iter().enumerate() {
        let psi = ds.vectors.column(j).clone_owned();
        let partner = &vmat * psi.map(|x| x.conj());
        // overlap <psi, V psi>: psi is supported on `cols` inside `rows`
        let mut padded = nalgebra::DVector::<C<R>>::zeros(partner.nrows());
        let offset = (cols.lo - rows.lo) as usize * op.fiber_dim();
        for i in 0..psi.nrows() {
            padded[offset + i] = psi[i];
        }
        let overlap = padded.dotc(&partner).norm_sqr().sqrt();
        max_overlap = max_overlap.max(overlap);
        let res =
            (&omat * &partner - partner.map(|x| x * C::<R>::new(*lambda, R::zero()))).norm();
        max_res = max_res.max(res);
    }
    Ok(KramersReport {
        eigenvalues,
        multiplicities,
        all_even,
        max_pair_overlap: max_overlap.to_f64().unwrap(),
        max_partner_residual: max_res.to_f64().unwrap(),
    })
}

/// Winding number of a closed unitary path `s in [0,1] -> V_s` with
/// identity-background deviation, via determinant phase accumulation on the
/// window compression; the step count doubles until all per-step phase
/// increments stay below `pi/2`.
pub fn winding_number<R: Real, F>(sample: F) -> Result<i64>
where
    F: Fn(R) -> Result<LatticeOperator<R>>,
{
    let tol = r::<R>(1e-8);
    let det_at = |s: R| -> Result<C<R>> {
        let v = sample(s)?;
        let id = LatticeOperator::identity(v.fiber_dim(), v.domain());
        let dev = v.try_sub(&id)?;
        let bg = dev
            .left_background()
            .norm_bound()
            .max(dev.right_background().norm_bound());
        if bg > tol {
            return Err(Error::NonCompactDeviation(bg.to_f64().unwrap_or(f64::NAN)));
        }
        if v.window().is_empty() {
            return Ok(C::<R>::new(R::one(), R::zero()));
        }
        let (m, _) = v.window_compression(0);
        let d = crate::fredholm::window_det(&m);
        if d.norm_sqr().sqrt() < r::<R>(1e-9) {
            return Err(Error::SymbolSingular(
                d.norm_sqr().sqrt().to_f64().unwrap_or(0.0),
            ));
        }
        Ok(d)
    };
    let mut steps = 16usize;
    loop {
        let n = R::from_usize(steps).unwrap();
        let mut total = R::zero();
        let mut prev = det_at(R::zero())?;
        let mut ok = true;
        for i in 1..=steps {
            let s = R::from_usize(i).unwrap() / n;
            let cur = det_at(s)?;
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
            let w = (total / R::two_pi()).round();
            return Ok(w.to_f64().unwrap() as i64);
        }
        steps *= 2;
        if steps > 1 << 16 {
            return Err(Error::PhaseStepTooLarge);
        }
    }
}

/// Checks `SF(path) = Wind(s -> exp(i pi (F_s + 1)))` (the flow/winding
/// equivalence through the exponential map); returns the pair.
pub fn phi_equivalence_check<R: Real>(path: &OperatorPath<R>) -> Result<(i64, i64)> {
    let flow = flow_report(path)?.flow;
    let wind = winding_number(|s: R| {
        let fs = path.at(s);
        let id = LatticeOperator::identity(fs.fiber_dim(), fs.domain());
        crate::cone::exp_i_scaled(&fs.try_add(&id)?, R::pi())
    })?;
    Ok((flow, wind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::{halmos, odd_shift_pair, odd_symmetric_dilation_u0, randomized};
    use crate::fredholm::fredholm_index;
    use crate::operator::Domain;

    type Op = LatticeOperator<f64>;

    #[test]
    fn constant_path_has_zero_flow() {
        let f = Op::standard_symmetry(1);
        let u = Op::identity(1, Domain::FullLine);
        assert_eq!(sf_pair(&f, &u).unwrap(), 0);
    }

    #[test]
    fn halmos_shift_flow_is_minus_index() {
        // orientation convention: SF(F, U_T) = -Ind(T), with Ind(S) = 1.
        let s = Op::shift_power(1, Domain::HalfLine, 1);
        let u = halmos(&s).unwrap();
        let f = Op::standard_symmetry(1);
        assert_eq!(sf_pair(&f, &u).unwrap(), -1);
        let s2 = Op::shift_power(1, Domain::HalfLine, 2);
        let u2 = halmos(&s2).unwrap();
        assert_eq!(sf_pair(&f, &u2).unwrap(), -2);
        let sm = Op::shift_power(1, Domain::HalfLine, -1);
        let um = halmos(&sm).unwrap();
        assert_eq!(sf_pair(&f, &um).unwrap(), 1);
    }

    #[test]
    fn pair_index_oracle_agrees() {
        let s = Op::shift_power(1, Domain::HalfLine, 1);
        let u = halmos(&s).unwrap();
        let f = Op::standard_symmetry(1);
        let path = OperatorPath::canonical(&f, &u).unwrap();
        assert_eq!(sf_via_pair_index(&path, 0.0, 1.0).unwrap(), -1);
        assert_eq!(
            sf_via_pair_index(&path, 0.0, 1.0).unwrap(),
            flow_report(&path).unwrap().flow
        );
    }

    #[test]
    fn bump_does_not_change_flow() {
        let s = Op::shift_power(1, Domain::HalfLine, 1);
        let u = randomized(&s, 5).unwrap();
        let f = Op::standard_symmetry(1);
        for seed in 0..5 {
            let path = OperatorPath::with_random_bump(&f, &u, seed).unwrap();
            assert_eq!(flow_report(&path).unwrap().flow, -1);
        }
    }

    #[test]
    fn u0_z2_flow_is_one() {
        let u = odd_symmetric_dilation_u0::<f64>();
        let f = Op::standard_symmetry(2);
        let ctx = SymmetryContext::standard(2).unwrap();
        assert_eq!(z2_spectral_flow(&f, &u, &ctx).unwrap(), 1);
        // and via the odd Halmos dilation of the same contraction
        let t = odd_shift_pair::<f64>();
        let uh = halmos(&t).unwrap();
        assert_eq!(z2_spectral_flow(&f, &uh, &ctx).unwrap(), 1);
        assert_eq!(
            sf_pair(&f, &uh).unwrap(),
            -fredholm_index(&t).unwrap()
        );
    }

    #[test]
    fn kramers_midpoint_even_multiplicity() {
        let u = odd_symmetric_dilation_u0::<f64>();
        let f = Op::standard_symmetry(2);
        let ctx = SymmetryContext::standard(2).unwrap();
        let path = OperatorPath::odd(&f, &u, &ctx).unwrap();
        let rep = kramers_check(&path.at(0.5), &u, &ctx, 1e-10).unwrap();
        assert!(rep.all_even, "multiplicities: {:?}", rep.multiplicities);
        assert!(rep.max_pair_overlap < 1e-8);
        assert!(rep.max_partner_residual < 1e-8);
        assert!(!rep.eigenvalues.is_empty());
    }

    #[test]
    fn winding_of_rank_one_loop() {
        // V_s = identity with a single 1x1 site rotated by e^{2 pi i s}
        let wind = winding_number(|s: f64| {
            let mut block = CMat::<f64>::zeros(1, 1);
            let phase = C::new(0.0, 2.0 * std::f64::consts::PI * s).exp();
            block[(0, 0)] = phase - C::new(1.0, 0.0);
            let dev = Op::finite(1, Domain::FullLine, SiteRange::new(0, 0), block)?;
            Op::identity(1, Domain::FullLine).try_add(&dev)
        })
        .unwrap();
        assert_eq!(wind, 1);
    }

    #[test]
    fn grid_doubling_is_stable() {
        let s = Op::shift_power(1, Domain::HalfLine, 2);
        let u = halmos(&s).unwrap();
        let f = Op::standard_symmetry(1);
        let path = OperatorPath::canonical(&f, &u).unwrap();
        let mut opts = FlowOptions::default();
        let base = spectral_flow(&path, 0.0, 1.0, opts).unwrap().flow;
        opts.initial_segments *= 2;
        assert_eq!(spectral_flow(&path, 0.0, 1.0, opts).unwrap().flow, base);
    }
}
