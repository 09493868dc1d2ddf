//! The interval-valued local nonconvexity index over a generalized Hessian
//! hull, its normalized endpoints, and the weak-convexity modulus.
//!
//! For a hull `H = co{V₁, …, V_m}`:
//!
//! * `loc_high = max ℓ(Q)` over `H`. `ℓ` is convex, so the max sits at a vertex.
//! * `loc_low = min ℓ(Q)` over `H`, a convex program over the weight simplex.
//! * `nloc_low`, `nloc_high` are the inf and sup of `ℓ(Q)/‖Q‖_*` over the
//!   nonzero points of `H` (0 for the flat hull `{0}`), and
//!   `conv_low = 1 − nloc_high`, `conv_high = 1 − nloc_low`.
//! * `rho = max max{0, −λ_min(Q)}` over `H`, again attained at a vertex.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::FunctionOracle;
use crate::hessian_set::{sample_hessian_set, stream, HessianHull, SamplingConfig};
use crate::matrix::SymMatrix;
use crate::spectral::{self, eigendecompose, ratio_of};
use crate::tolerances;

/// Convex weights over hull vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplexWeights(pub Vec<f64>);

impl SimplexWeights {
    pub fn uniform(n: usize) -> Self {
        SimplexWeights(vec![1.0 / n as f64; n])
    }

    pub fn vertex(n: usize, i: usize) -> Self {
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        SimplexWeights(w)
    }

    /// Clamps negatives to zero and rescales to unit sum.
    fn normalized(mut w: Vec<f64>) -> Self {
        for v in &mut w {
            *v = v.max(0.0);
        }
        let s: f64 = w.iter().sum();
        for v in &mut w {
            *v /= s;
        }
        SimplexWeights(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn combine(&self, vertices: &[SymMatrix]) -> SymMatrix {
        SymMatrix::combination(vertices, &self.0)
    }
}

/// Nearest point of `co{vertices}` to `target` in Frobenius norm.
///
/// Wolfe's minimum-norm-point algorithm on the translated points
/// `Vᵢ − target`; finite and exact up to roundoff. Returns the distance and
/// the convex weights of the nearest point.
pub fn simplex_least_squares(vertices: &[SymMatrix], target: &SymMatrix) -> (f64, SimplexWeights) {
    let n = vertices.len();
    assert!(n > 0, "simplex least squares over an empty vertex list");
    let diffs: Vec<SymMatrix> = vertices.iter().map(|v| v - target).collect();
    let mut gram = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let g = diffs[i].dot(&diffs[j]);
            gram[i][j] = g;
            gram[j][i] = g;
        }
    }
    let weights = min_norm_point(&gram);
    let dist = SymMatrix::combination(&diffs, &weights.0).frobenius_norm();
    (dist, weights)
}

fn min_norm_point(gram: &[Vec<f64>]) -> SimplexWeights {
    let n = gram.len();
    let scale = (0..n).map(|i| gram[i][i]).fold(0.0, f64::max);
    let start = (0..n)
        .min_by(|&a, &b| gram[a][a].total_cmp(&gram[b][b]))
        .expect("nonempty");
    if n == 1 || scale == 0.0 {
        return SimplexWeights::vertex(n, start);
    }
    let tol_opt = 1e-13 * scale;
    let tol_w = 1e-12;

    let mut active = vec![start];
    let mut lam = vec![1.0];
    'major: for _ in 0..(50 * n + 50) {
        let xp: Vec<f64> = (0..n)
            .map(|i| active.iter().zip(&lam).map(|(&k, l)| l * gram[k][i]).sum())
            .collect();
        let xx: f64 = active.iter().zip(&lam).map(|(&k, l)| l * xp[k]).sum();
        let j = (0..n).min_by(|&a, &b| xp[a].total_cmp(&xp[b])).expect("nonempty");
        if xp[j] >= xx - tol_opt || active.contains(&j) {
            break;
        }
        active.push(j);
        lam.push(0.0);
        loop {
            let Some(alpha) = affine_minimizer(gram, &active, scale) else {
                // New point is numerically affinely dependent on the others.
                active.pop();
                lam.pop();
                break 'major;
            };
            if alpha.iter().all(|&a| a > tol_w) {
                lam = alpha;
                break;
            }
            let mut theta = 1.0;
            let mut blocking = 0;
            for (k, (&a, &l)) in alpha.iter().zip(&lam).enumerate() {
                if a <= tol_w {
                    let t = if l - a > 0.0 { l / (l - a) } else { 0.0 };
                    if t < theta {
                        theta = t;
                        blocking = k;
                    }
                }
            }
            for (l, a) in lam.iter_mut().zip(&alpha) {
                *l = (1.0 - theta) * *l + theta * a;
            }
            lam[blocking] = 0.0;
            let mut k = 0;
            while k < active.len() {
                if lam[k] <= tol_w {
                    active.remove(k);
                    lam.remove(k);
                } else {
                    k += 1;
                }
            }
            let s: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|l| *l /= s);
            if active.len() == 1 {
                break;
            }
        }
    }
    let mut w = vec![0.0; n];
    for (&k, &l) in active.iter().zip(&lam) {
        w[k] = l;
    }
    SimplexWeights::normalized(w)
}

/// Minimizer of `‖Σ αₖ pₖ‖²` subject to `Σ αₖ = 1` over the active points.
fn affine_minimizer(gram: &[Vec<f64>], active: &[usize], scale: f64) -> Option<Vec<f64>> {
    let s = active.len();
    let n = s + 1;
    // [G 1; 1ᵀ 0] [α; μ] = [0; 1]
    let mut a = vec![vec![0.0; n + 1]; n];
    for (r, &i) in active.iter().enumerate() {
        for (c, &j) in active.iter().enumerate() {
            a[r][c] = gram[i][j];
        }
        a[r][s] = 1.0;
        a[s][r] = 1.0;
    }
    a[s][n] = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() <= 1e-14 * scale.max(1.0) {
            return None;
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    Some((0..s).map(|r| a[r][n] / a[r][r]).collect())
}

/// Upper endpoint: `max ℓ(V)` over the vertices and the first index attaining it.
pub fn loc_upper(hull: &HessianHull) -> Result<(f64, usize)> {
    argmax_over_vertices(hull, spectral::ell)
}

/// Weak-convexity modulus `max max{0, −λ_min(V)}` over the vertices.
pub fn rho_modulus(hull: &HessianHull) -> Result<f64> {
    Ok(argmax_over_vertices(hull, spectral::negative_curvature)?.0)
}

fn argmax_over_vertices(hull: &HessianHull, f: impl Fn(&SymMatrix) -> Result<f64>) -> Result<(f64, usize)> {
    if hull.is_empty() {
        return Err(Error::EmptyHull);
    }
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, v) in hull.vertices.iter().enumerate() {
        let val = f(v)?;
        if val > best.0 {
            best = (val, i);
        }
    }
    Ok(best)
}

/// Result of the lower-endpoint solve.
#[derive(Debug, Clone)]
pub struct LowerEndpoint {
    pub value: f64,
    pub weights: SimplexWeights,
    /// Certified: best value minus best lower bound is below `1e−8`.
    pub converged: bool,
    /// Final certified optimality gap.
    pub gap: f64,
}

/// Linearization of `ℓ∘Q` at one weight vector: with `P` the projector onto
/// the negative eigenspace of `Q(w)`, `ℓ(Q(w')) ≥ Σᵢ gᵢ w'ᵢ` for every
/// `w'`, where `gᵢ = −⟨P, Vᵢ⟩`, with equality at `w' = w`.
fn linearize(vertices: &[SymMatrix], w: &[f64]) -> Result<(f64, Vec<f64>)> {
    let split = eigendecompose(&SymMatrix::combination(vertices, w))?;
    let p = split.negative_projector();
    let g = vertices.iter().map(|v| -p.dot(v)).collect();
    Ok((split.ell(), g))
}

fn min_entry(g: &[f64]) -> (usize, f64) {
    g.iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc })
}

/// Lower endpoint: `min ℓ(Σ wᵢ Vᵢ)` over the weight simplex.
///
/// Frank–Wolfe with step `2/(k+2)`, using the subgradient `−U₋U₋ᵀ` (zero
/// eigenvalues count as nonnegative). Every linearization also gives the
/// lower bound `minᵢ gᵢ`, so the gap is certified. `ℓ` is nonsmooth where
/// eigenvalues cross zero and Frank–Wolfe can stall there; in that case the
/// collected cuts seed a cutting-plane refinement (Kelley's method), whose
/// LP master problem yields both new iterates and a certified lower bound.
pub fn loc_lower(hull: &HessianHull) -> Result<LowerEndpoint> {
    if hull.is_empty() {
        return Err(Error::EmptyHull);
    }
    let vs = &hull.vertices;
    let m = vs.len();
    if m == 1 {
        return Ok(LowerEndpoint {
            value: spectral::ell(&vs[0])?,
            weights: SimplexWeights::vertex(1, 0),
            converged: true,
            gap: 0.0,
        });
    }
    let upper = loc_upper(hull)?.0;

    let mut w = SimplexWeights::uniform(m).0;
    let mut best = (f64::INFINITY, w.clone());
    let mut lower_bound: f64 = 0.0;
    let mut recent: Vec<Vec<f64>> = Vec::new();
    for k in 0..tolerances::OPT_MAX_ITERS {
        let (val, g) = linearize(vs, &w)?;
        if val < best.0 {
            best = (val, w.clone());
        }
        let (j, lb) = min_entry(&g);
        lower_bound = lower_bound.max(lb);
        if best.0 - lower_bound < tolerances::OPT_GAP {
            break;
        }
        if recent.len() == 32 {
            recent.remove(0);
        }
        recent.push(g);
        let gamma = 2.0 / (k as f64 + 2.0);
        for (i, wi) in w.iter_mut().enumerate() {
            *wi *= 1.0 - gamma;
            if i == j {
                *wi += gamma;
            }
        }
    }

    if best.0 - lower_bound >= tolerances::OPT_GAP {
        let mut cuts = recent;
        for i in 0..m {
            cuts.push(linearize(vs, &SimplexWeights::vertex(m, i).0)?.1);
        }
        cuts.push(linearize(vs, &best.1)?.1);
        kelley(vs, cuts, &mut best, &mut lower_bound)?;
    }

    let gap = (best.0 - lower_bound).max(0.0);
    Ok(LowerEndpoint {
        value: best.0.clamp(0.0, upper),
        weights: SimplexWeights::normalized(best.1),
        converged: gap < tolerances::OPT_GAP,
        gap,
    })
}

const KELLEY_MAX_ITERS: usize = 400;

fn kelley(vs: &[SymMatrix], mut cuts: Vec<Vec<f64>>, best: &mut (f64, Vec<f64>), lower_bound: &mut f64) -> Result<()> {
    let m = vs.len();
    for _ in 0..KELLEY_MAX_ITERS {
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let z = lp.add_var(1.0, (0.0, f64::INFINITY));
        let ws: Vec<_> = (0..m).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
        lp.add_constraint(ws.iter().map(|&v| (v, 1.0)).collect::<Vec<_>>(), ComparisonOp::Eq, 1.0);
        for g in &cuts {
            let mut row = vec![(z, 1.0)];
            row.extend(ws.iter().zip(g).map(|(&v, &gi)| (v, -gi)));
            lp.add_constraint(row, ComparisonOp::Ge, 0.0);
        }
        let Some(solution) = lp.solve().ok().and_then(|o| o.into_solution().ok()) else {
            break;
        };
        *lower_bound = lower_bound.max(solution.objective());
        let w = SimplexWeights::normalized(ws.iter().map(|&v| solution.var_value(v)).collect()).0;
        let (val, g) = linearize(vs, &w)?;
        if val < best.0 {
            *best = (val, w);
        }
        if best.0 - *lower_bound < tolerances::OPT_GAP {
            break;
        }
        cuts.push(g);
    }
    Ok(())
}

/// Estimated normalized endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlocBounds {
    pub low: f64,
    pub high: f64,
    /// True when the hull is neither a singleton nor a segment: `low` is
    /// then an upper bound on the infimum and `high` a lower bound on the
    /// supremum.
    pub approximate: bool,
}

const SEGMENT_GRID: usize = 10_000;
const NLOC_SEED: u64 = 0x6e6c_6f63;

/// Inf and sup of `ℓ(Q)/‖Q‖_*` over nonzero points of the hull.
///
/// Singletons are evaluated directly and segments by a dense grid over the
/// segment with golden-section polishing. Larger hulls are searched over the
/// vertices, the pairwise midpoints, 512 Dirichlet-random interior points,
/// and a local weight-transfer refinement of the best candidates. The ratio
/// is not convex, so those results are flagged approximate.
pub fn nloc_bounds(hull: &HessianHull) -> Result<NlocBounds> {
    if hull.is_empty() {
        return Err(Error::EmptyHull);
    }
    let vs = &hull.vertices;
    let flat = vs
        .iter()
        .map(spectral::nuclear_norm)
        .try_fold(true, |acc, n| Ok::<bool, Error>(acc && n? <= tolerances::FLAT))?;
    if flat {
        return Ok(NlocBounds { low: 0.0, high: 0.0, approximate: false });
    }
    let ratio_at = |w: &[f64]| -> Result<Option<f64>> {
        let split = eigendecompose(&SymMatrix::combination(vs, w))?;
        Ok((split.nuclear_norm() > tolerances::FLAT).then(|| ratio_of(&split)))
    };

    match vs.len() {
        1 => {
            let r = ratio_at(&[1.0])?.unwrap_or(0.0);
            Ok(NlocBounds { low: r, high: r, approximate: false })
        }
        2 => {
            let on_segment = |t: f64| ratio_at(&[1.0 - t, t]);
            let mut low = (f64::INFINITY, 0.0);
            let mut high = (f64::NEG_INFINITY, 0.0);
            for k in 0..=SEGMENT_GRID {
                let t = k as f64 / SEGMENT_GRID as f64;
                if let Some(r) = on_segment(t)? {
                    if r < low.0 {
                        low = (r, t);
                    }
                    if r > high.0 {
                        high = (r, t);
                    }
                }
            }
            let h = 1.0 / SEGMENT_GRID as f64;
            let low = golden_polish(&on_segment, low, h, 1.0)?;
            let high = golden_polish(&on_segment, high, h, -1.0)?;
            Ok(NlocBounds { low, high, approximate: false })
        }
        m => {
            let mut candidates: Vec<Vec<f64>> = (0..m).map(|i| SimplexWeights::vertex(m, i).0).collect();
            for i in 0..m {
                for j in (i + 1)..m {
                    let mut w = vec![0.0; m];
                    w[i] = 0.5;
                    w[j] = 0.5;
                    candidates.push(w);
                }
            }
            for k in 0..tolerances::N_DIRICHLET {
                let mut rng = stream(NLOC_SEED, k as u64, 0);
                let w: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
                candidates.push(SimplexWeights::normalized(w).0);
            }
            let mut low = (f64::INFINITY, candidates[0].clone());
            let mut high = (f64::NEG_INFINITY, candidates[0].clone());
            for w in candidates {
                if let Some(r) = ratio_at(&w)? {
                    if r < low.0 {
                        low = (r, w.clone());
                    }
                    if r > high.0 {
                        high = (r, w);
                    }
                }
            }
            let low = transfer_search(&ratio_at, low, 1.0)?;
            let high = transfer_search(&ratio_at, high, -1.0)?;
            Ok(NlocBounds { low, high, approximate: true })
        }
    }
}

/// Golden-section polish of `sign·f` on `[t − h, t + h] ∩ [0, 1]`.
fn golden_polish(f: &impl Fn(f64) -> Result<Option<f64>>, start: (f64, f64), h: f64, sign: f64) -> Result<f64> {
    let eval = |t: f64| -> Result<f64> { Ok(f(t)?.map_or(f64::INFINITY, |r| sign * r)) };
    let (mut best, t0) = (sign * start.0, start.1);
    let (mut a, mut b) = ((t0 - h).max(0.0), (t0 + h).min(1.0));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        let (fc, fd) = (eval(c)?, eval(d)?);
        best = best.min(fc).min(fd);
        if fc < fd {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(sign * best)
}

/// Pairwise mass-transfer descent on `sign·f` over the simplex.
fn transfer_search(
    f: &impl Fn(&[f64]) -> Result<Option<f64>>,
    start: (f64, Vec<f64>),
    sign: f64,
) -> Result<f64> {
    let (mut best, mut w) = (sign * start.0, start.1);
    let m = w.len();
    let mut step: f64 = 0.25;
    while step > 1e-7 {
        let mut improved = false;
        for i in 0..m {
            for j in 0..m {
                if i == j || w[j] <= 0.0 {
                    continue;
                }
                let delta = step.min(w[j]);
                let mut trial = w.clone();
                trial[i] += delta;
                trial[j] -= delta;
                if let Some(r) = f(&trial)? {
                    if sign * r < best {
                        best = sign * r;
                        w = trial;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(sign * best)
}

/// The local nonconvexity interval and its companions at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonconvexityInterval {
    pub loc_low: f64,
    pub loc_high: f64,
    pub nloc_low: f64,
    pub nloc_high: f64,
    pub conv_low: f64,
    pub conv_high: f64,
    pub rho: f64,
    pub argmin_weights: SimplexWeights,
    pub argmax_vertex: usize,
    pub vertex_count: usize,
    /// Hull came from a closed-form oracle rather than sampling.
    pub exact: bool,
    /// Normalized endpoints are search estimates, not exact values.
    pub approximate_nloc: bool,
    /// Lower-endpoint solver reached its certified gap.
    pub lower_converged: bool,
}

/// Assembles every field of the interval from one hull.
pub fn interval_from_hull(hull: &HessianHull) -> Result<NonconvexityInterval> {
    let (loc_high, argmax_vertex) = loc_upper(hull)?;
    let lower = loc_lower(hull)?;
    let nloc = nloc_bounds(hull)?;
    let rho = rho_modulus(hull)?;
    Ok(NonconvexityInterval {
        loc_low: lower.value.min(loc_high),
        loc_high,
        nloc_low: nloc.low,
        nloc_high: nloc.high,
        conv_low: 1.0 - nloc.high,
        conv_high: 1.0 - nloc.low,
        rho,
        argmin_weights: lower.weights,
        argmax_vertex,
        vertex_count: hull.len(),
        exact: hull.exact,
        approximate_nloc: nloc.approximate,
        lower_converged: lower.converged,
    })
}

/// Estimates the hull of `f` at `x` and evaluates the interval on it.
pub fn compute_interval(f: &dyn FunctionOracle, x: &[f64], cfg: &SamplingConfig) -> Result<NonconvexityInterval> {
    interval_from_hull(&sample_hessian_set(f, x, cfg)?)
}
