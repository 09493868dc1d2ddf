//! Generalized Hessian sets as finite vertex lists.
//!
//! `Hess(h; x)` is the closed convex hull of limits of classical Hessians
//! taken along sequences of twice-differentiability points converging to `x`.
//! [`sample_hessian_set`] approximates it by sampling Hessians in shrinking
//! balls around `x`; built-in oracles can supply it exactly instead.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::FunctionOracle;
use crate::hull_index::simplex_least_squares;
use crate::matrix::{SquareMatrix, SymMatrix, Symmetry};
use crate::spectral;

/// Candidate extreme points of a generalized Hessian set.
#[derive(Debug, Clone, Serialize)]
pub struct HessianHull {
    pub dim: usize,
    pub vertices: Vec<SymMatrix>,
    /// `(radius, distinct Hessians seen at that radius)` per sampling tier.
    pub radius_trace: Vec<(f64, usize)>,
    /// True when the vertices came from a closed-form oracle.
    pub exact: bool,
}

impl HessianHull {
    /// Hull given by explicit vertices. Exact duplicates are dropped.
    pub fn from_vertices(vertices: Vec<SymMatrix>) -> Result<Self> {
        let dim = vertices.first().ok_or(Error::EmptyHull)?.dim();
        if let Some(v) = vertices.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.dim(),
            });
        }
        let mut unique: Vec<SymMatrix> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if !unique.contains(&v) {
                unique.push(v);
            }
        }
        Ok(HessianHull {
            dim,
            vertices: unique,
            radius_trace: Vec::new(),
            exact: false,
        })
    }

    /// Same as [`HessianHull::from_vertices`], flagged as exact.
    pub fn exact(vertices: Vec<SymMatrix>) -> Result<Self> {
        Ok(HessianHull {
            exact: true,
            ..Self::from_vertices(vertices)?
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `{Uᵀ V U}` for every vertex `V`.
    pub fn congruence(&self, u: &SquareMatrix) -> HessianHull {
        HessianHull {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| v.congruence(u)).collect(),
            radius_trace: self.radius_trace.clone(),
            exact: self.exact,
        }
    }

    /// Every vertex shifted by `s·I`.
    pub fn shifted(&self, s: f64) -> HessianHull {
        let shift = &SymMatrix::identity(self.dim) * s;
        HessianHull {
            vertices: self.vertices.iter().map(|v| v + &shift).collect(),
            ..self.clone()
        }
    }

    /// Largest spectral norm over the vertices.
    pub fn max_spectral_norm(&self) -> Result<f64> {
        self.vertices
            .iter()
            .map(spectral::spectral_norm)
            .try_fold(0.0f64, |acc, n| Ok(acc.max(n?)))
    }
}

/// Shrinking-radius sampling schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    /// Strictly decreasing ball radii.
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
    /// Finite-difference step as a fraction of the current radius.
    pub fd_step_ratio: f64,
    pub seed: u64,
    /// Frobenius deduplication tolerance; `None` means `1e−4·(1 + L̂)` with
    /// `L̂` the largest sampled spectral norm.
    pub dedup_tol: Option<f64>,
    /// Return the oracle's closed-form set when it has one.
    pub prefer_exact: bool,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            radii: (0..=6).map(|k| 1e-2 * 0.5f64.powi(k)).collect(),
            samples_per_radius: 64,
            fd_step_ratio: 1e-2,
            seed: 0,
            dedup_tol: None,
            prefer_exact: true,
        }
    }
}

impl SamplingConfig {
    /// Same schedule, never short-circuiting to an exact oracle.
    pub fn sampled_only() -> Self {
        SamplingConfig {
            prefer_exact: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.radii.is_empty() {
            return Err(Error::input("sampling radii must be nonempty"));
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::input("sampling radii must be positive and finite"));
        }
        if self.radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::input("sampling radii must be strictly decreasing"));
        }
        if self.samples_per_radius == 0 {
            return Err(Error::input("samples_per_radius must be positive"));
        }
        if !(self.fd_step_ratio.is_finite() && self.fd_step_ratio > 0.0) {
            return Err(Error::input("fd_step_ratio must be positive"));
        }
        if self.dedup_tol.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
            return Err(Error::input("dedup_tol must be positive"));
        }
        Ok(())
    }

    pub fn max_radius(&self) -> f64 {
        self.radii[0]
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for one `(tier, sample)` slot.
pub(crate) fn stream(seed: u64, a: u64, b: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(a.wrapping_shl(32) ^ b)))
}

/// Uniform point in the ball `B(center, radius)`.
fn uniform_in_ball(rng: &mut impl Rng, center: &[f64], radius: f64) -> Vec<f64> {
    let d = center.len();
    let dir: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
    center
        .iter()
        .zip(&dir)
        .map(|(c, v)| c + r * v / norm)
        .collect()
}

/// Central differences of the gradient, symmetrized:
/// column `j` is `(∇h(y + s eⱼ) − ∇h(y − s eⱼ)) / 2s`.
pub fn fd_hessian(f: &dyn FunctionOracle, y: &[f64], step: f64) -> SymMatrix {
    let d = y.len();
    let mut data = vec![0.0; d * d];
    let mut probe = y.to_vec();
    for j in 0..d {
        probe[j] = y[j] + step;
        let plus = f.gradient(&probe);
        probe[j] = y[j] - step;
        let minus = f.gradient(&probe);
        probe[j] = y[j];
        for i in 0..d {
            data[i * d + j] = (plus[i] - minus[i]) / (2.0 * step);
        }
    }
    SymMatrix::from_row_major(d, data, Symmetry::Symmetrize).expect("finite gradient differences")
}

/// Greedy deduplication: keeps the first of any group within `tol`.
fn dedup(mats: &[SymMatrix], tol: f64) -> Vec<SymMatrix> {
    let mut kept: Vec<SymMatrix> = Vec::new();
    for m in mats {
        if kept.iter().all(|k| k.frobenius_distance(m) > tol) {
            kept.push(m.clone());
        }
    }
    kept
}

/// Drops candidates lying within `tol` of the hull of the others.
fn prune_interior(mut mats: Vec<SymMatrix>, tol: f64) -> Vec<SymMatrix> {
    let mut i = 0;
    while i < mats.len() && mats.len() > 1 {
        let others: Vec<SymMatrix> = mats
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, m)| m.clone())
            .collect();
        let (dist, _) = simplex_least_squares(&others, &mats[i]);
        if dist <= tol {
            mats.remove(i);
        } else {
            i += 1;
        }
    }
    mats
}

/// Estimates `Hess(f; x)`.
///
/// With `cfg.prefer_exact` and an oracle that knows its generalized Hessian,
/// that set is returned as is. Otherwise each radius tier draws
/// `samples_per_radius` uniform points in `B(x, ε)`, keeps the Hessians at
/// twice-differentiability points (finite differences of the gradient when
/// the oracle has no Hessian), and the vertex list is built from the
/// smallest tier: a candidate survives only if a Hessian within
/// `τ_match = 10·τ_dedup` also shows up at the second-smallest radius.
/// Survivors are deduplicated and interior points are pruned.
pub fn sample_hessian_set(f: &dyn FunctionOracle, x: &[f64], cfg: &SamplingConfig) -> Result<HessianHull> {
    cfg.validate()?;
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("point has non-finite coordinates"));
    }
    if !f.contains(x, cfg.max_radius()) {
        return Err(Error::Domain {
            point: x.to_vec(),
            margin: cfg.max_radius(),
        });
    }
    if cfg.prefer_exact {
        if let Some(hull) = f.exact_hessian_set(x) {
            return Ok(hull);
        }
    }

    let mut drawn = 0;
    let mut differentiable = 0;
    let mut tiers: Vec<Vec<SymMatrix>> = Vec::with_capacity(cfg.radii.len());
    for (k, &eps) in cfg.radii.iter().enumerate() {
        let mut tier = Vec::with_capacity(cfg.samples_per_radius);
        for i in 0..cfg.samples_per_radius {
            let mut rng = stream(cfg.seed, k as u64, i as u64);
            let y = uniform_in_ball(&mut rng, x, eps);
            drawn += 1;
            if !f.is_twice_differentiable(&y) {
                continue;
            }
            differentiable += 1;
            let h = match f.hessian_at(&y) {
                Some(h) => h,
                None => fd_hessian(f, &y, cfg.fd_step_ratio * eps),
            };
            tier.push(h);
        }
        tiers.push(tier);
    }

    let sampled_max = tiers
        .iter()
        .flatten()
        .map(spectral::spectral_norm)
        .try_fold(0.0f64, |acc, n| Ok::<f64, Error>(acc.max(n?)))?;
    let dedup_tol = cfg.dedup_tol.unwrap_or(1e-4 * (1.0 + sampled_max));
    let match_tol = 10.0 * dedup_tol;

    let radius_trace = cfg
        .radii
        .iter()
        .zip(&tiers)
        .map(|(&r, t)| (r, dedup(t, dedup_tol).len()))
        .collect();

    let smallest = tiers.last().expect("at least one tier");
    let mut candidates: Vec<SymMatrix> = match tiers.len().checked_sub(2).map(|k| &tiers[k]) {
        Some(previous) => smallest
            .iter()
            .filter(|h| previous.iter().any(|g| g.frobenius_distance(h) <= match_tol))
            .cloned()
            .collect(),
        None => smallest.clone(),
    };
    if candidates.is_empty() {
        candidates = smallest.clone();
    }
    let vertices = prune_interior(dedup(&candidates, dedup_tol), dedup_tol);
    if vertices.is_empty() {
        return Err(Error::SamplingFailure { drawn, differentiable });
    }
    Ok(HessianHull {
        dim: f.dim(),
        vertices,
        radius_trace,
        exact: false,
    })
}

/// Frobenius distance from `q` to the convex hull of `hull`'s vertices.
pub fn hull_membership_distance(hull: &HessianHull, q: &SymMatrix) -> Result<f64> {
    if hull.is_empty() {
        return Err(Error::EmptyHull);
    }
    if q.dim() != hull.dim {
        return Err(Error::DimensionMismatch {
            expected: hull.dim,
            got: q.dim(),
        });
    }
    Ok(simplex_least_squares(&hull.vertices, q).0)
}

/// All pairwise vertex sums; the hull of the result is the Minkowski sum of
/// the two hulls.
pub fn minkowski_sum(a: &HessianHull, b: &HessianHull) -> Result<HessianHull> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyHull);
    }
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    let sums: Vec<SymMatrix> = a
        .vertices
        .iter()
        .flat_map(|u| b.vertices.iter().map(move |v| u + v))
        .collect();
    let scale = sums.iter().map(SymMatrix::frobenius_norm).fold(0.0, f64::max);
    Ok(HessianHull {
        dim: a.dim,
        vertices: dedup(&sums, 1e-12 * (1.0 + scale)),
        radius_trace: Vec::new(),
        exact: a.exact && b.exact,
    })
}
