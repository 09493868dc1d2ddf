//! Mollification of built-in functions in one and two dimensions, and the
//! check that mollified Hessians near `x` land inside the generalized
//! Hessian hull at `x`.
//!
//! With `φ_ε(z) = ε^{−d} φ(z/ε)` and `h_ε = h * φ_ε`,
//! `D²h_ε(y) = ∫ D²h(y − εt) φ(t) dt` over `t ∈ [−1, 1]^d`: a convex average
//! of classical Hessians. The integral is evaluated by tensor Gauss–Legendre
//! quadrature with panels split at the oracle's kink hyperplanes, so each
//! panel sees a smooth integrand.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{FunctionOracle, Hyperplane};
use crate::hessian_set::{hull_membership_distance, sample_hessian_set, stream, SamplingConfig};
use crate::hull_index::interval_from_hull;
use crate::matrix::SymMatrix;
use crate::spectral;
use crate::tolerances;

/// Bump profile of the mollifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Product of normalized `exp(−1/(1−t²))` factors on `[−1, 1]^d`.
    #[default]
    Bump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MollifierConfig {
    /// Strictly decreasing mollification radii.
    pub epsilons: Vec<f64>,
    /// Gauss–Legendre points per axis and panel.
    pub quadrature_points: usize,
    pub profile: Profile,
    /// Seed for the approach direction `u` in `x_ε = x + ε²u`.
    pub seed: u64,
}

impl Default for MollifierConfig {
    fn default() -> Self {
        MollifierConfig {
            epsilons: vec![1e-1, 1e-2, 1e-3],
            quadrature_points: 65,
            profile: Profile::Bump,
            seed: 0,
        }
    }
}

impl MollifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(Error::input("mollifier epsilons must be nonempty"));
        }
        if self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::input("mollifier epsilons must be positive and finite"));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::input("mollifier epsilons must be strictly decreasing"));
        }
        if self.quadrature_points == 0 {
            return Err(Error::input("quadrature_points must be positive"));
        }
        Ok(())
    }
}

fn bump_raw(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

fn bump_constant() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        let rule = GaussLegendre::new(NonZeroUsize::new(64).expect("nonzero"));
        let panels = 32;
        let h = 2.0 / panels as f64;
        (0..panels)
            .map(|p| {
                let (a, b) = (-1.0 + p as f64 * h, -1.0 + (p + 1) as f64 * h);
                rule.integrate(a, b, bump_raw)
            })
            .sum()
    })
}

/// One-dimensional factor of the normalized bump.
pub fn bump_1d(t: f64) -> f64 {
    bump_raw(t) / bump_constant()
}

/// Normalized bump `φ(t) = Πᵢ φ₁(tᵢ)` on `[−1, 1]^d`.
pub fn bump(t: &[f64]) -> f64 {
    t.iter().map(|&ti| bump_1d(ti)).product()
}

/// Quadrature estimate of `∫φ` over `[−1, 1]^d` with `points` nodes per axis.
pub fn bump_mass(dim: usize, points: usize) -> Result<f64> {
    let rule = rule(points)?;
    let one: f64 = rule.iter().map(|&(s, w)| w * bump_1d(s)).sum();
    Ok(one.powi(dim as i32))
}

fn rule(points: usize) -> Result<Vec<(f64, f64)>> {
    let n = NonZeroUsize::new(points).ok_or_else(|| Error::input("quadrature_points must be positive"))?;
    Ok(GaussLegendre::new(n).as_node_weight_pairs().to_vec())
}

/// Splits `[−1, 1]` at the given interior points.
fn panels(mut cuts: Vec<f64>) -> Vec<(f64, f64)> {
    cuts.retain(|c| c.is_finite() && c.abs() < 1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut edges = vec![-1.0];
    edges.extend(cuts);
    edges.push(1.0);
    edges.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b > a).collect()
}

fn nodes_on(rule: &[(f64, f64)], (a, b): (f64, f64)) -> impl Iterator<Item = (f64, f64)> + '_ {
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    rule.iter().map(move |&(s, w)| (mid + half * s, half * w))
}

/// Kink `n·y = c` in scaled coordinates `y = x − εt`: `n·t = (n·x − c)/ε`.
fn scaled_kinks(kinks: &[Hyperplane], x: &[f64], eps: f64) -> Vec<(Vec<f64>, f64)> {
    kinks
        .iter()
        .map(|k| {
            let nx: f64 = k.normal.iter().zip(x).map(|(a, b)| a * b).sum();
            (k.normal.clone(), (nx - k.offset) / eps)
        })
        .collect()
}

/// Hessian of the mollified function `h_ε` at `x`.
pub fn mollified_hessian(f: &dyn FunctionOracle, x: &[f64], eps: f64, cfg: &MollifierConfig) -> Result<SymMatrix> {
    let d = f.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    if !(1..=2).contains(&d) {
        return Err(Error::input(format!("mollification supports dimensions 1 and 2, got {d}")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::input("mollifier radius must be positive"));
    }
    if !f.contains(x, eps) {
        return Err(Error::Domain { point: x.to_vec(), margin: eps });
    }
    let rule = rule(cfg.quadrature_points)?;
    let kinks = scaled_kinks(&f.kinks(), x, eps);

    let mut acc = SymMatrix::zeros(d);
    let mut mass = 0.0;
    let mut y = vec![0.0; d];
    let mut add = |t: &[f64], w: f64, acc: &mut SymMatrix| -> Result<()> {
        let phi = w * bump(t);
        if phi == 0.0 {
            return Ok(());
        }
        for i in 0..d {
            y[i] = x[i] - eps * t[i];
        }
        let h = f
            .hessian_at(&y)
            .ok_or_else(|| Error::Integration(format!("no classical Hessian at quadrature node {y:?}")))?;
        *acc = &*acc + &(&h * phi);
        mass += phi;
        Ok(())
    };

    if d == 1 {
        let cuts = kinks.iter().filter(|(n, _)| n[0] != 0.0).map(|(n, s)| s / n[0]).collect();
        for panel in panels(cuts) {
            for (t, w) in nodes_on(&rule, panel) {
                add(&[t], w, &mut acc)?;
            }
        }
    } else {
        let mut outer = Vec::new();
        for (n, s) in &kinks {
            if n[0] != 0.0 {
                if n[1] == 0.0 {
                    outer.push(s / n[0]);
                } else {
                    outer.push((s - n[1]) / n[0]);
                    outer.push((s + n[1]) / n[0]);
                }
            }
        }
        for p1 in panels(outer) {
            for (t1, w1) in nodes_on(&rule, p1) {
                let inner = kinks
                    .iter()
                    .filter(|(n, _)| n[1] != 0.0)
                    .map(|(n, s)| (s - n[0] * t1) / n[1])
                    .collect();
                for p2 in panels(inner) {
                    for (t2, w2) in nodes_on(&rule, p2) {
                        add(&[t1, t2], w1 * w2, &mut acc)?;
                    }
                }
            }
        }
    }
    if !(mass > 0.0) {
        return Err(Error::Integration("mollifier quadrature has zero mass".into()));
    }
    Ok(&acc * (1.0 / mass))
}

/// One row of the membership report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollificationEntry {
    pub eps: f64,
    /// Frobenius distance from `D²h_ε(x_ε)` to the hull at `x`.
    pub distance: f64,
    pub ell: f64,
    /// `ℓ` inside the interval (with sampling slack) and distance within the
    /// membership tolerance.
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollificationReport {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
    pub loc_low: f64,
    pub loc_high: f64,
    pub entries: Vec<MollificationEntry>,
    /// The smallest `ε` is within the membership tolerance and its `ℓ` lies in
    /// the interval. Larger radii carry an `O(ε²)` bias at smooth points.
    pub pass: bool,
}

fn unit_direction(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, u64::MAX, 0);
    loop {
        let u: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-8 {
            return u.into_iter().map(|v| v / n).collect();
        }
    }
}

/// Mollified Hessians along `x_ε = x + ε²u` against the hull at `x`.
pub fn mollification_membership_check(
    f: &dyn FunctionOracle,
    x: &[f64],
    cfg: &MollifierConfig,
    sampling: &SamplingConfig,
) -> Result<MollificationReport> {
    cfg.validate()?;
    let hull = sample_hessian_set(f, x, sampling)?;
    let interval = interval_from_hull(&hull)?;
    let u = unit_direction(f.dim(), cfg.seed);
    let slack = tolerances::INTERVAL_SAMPLING;
    let mut entries = Vec::with_capacity(cfg.epsilons.len());
    for &eps in &cfg.epsilons {
        let x_eps: Vec<f64> = x.iter().zip(&u).map(|(xi, ui)| xi + eps * eps * ui).collect();
        let q = mollified_hessian(f, &x_eps, eps, cfg)?;
        let distance = hull_membership_distance(&hull, &q)?;
        let ell = spectral::ell(&q)?;
        let in_interval = ell >= interval.loc_low - slack && ell <= interval.loc_high + slack;
        entries.push(MollificationEntry {
            eps,
            distance,
            ell,
            pass: in_interval && distance <= tolerances::MEMBER,
        });
    }
    let pass = entries.last().is_some_and(|e| e.pass);
    Ok(MollificationReport {
        point: x.to_vec(),
        direction: u,
        loc_low: interval.loc_low,
        loc_high: interval.loc_high,
        entries,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{make_builtin, FunctionSpec, PiecewiseQuadratic1D};
    use approx::assert_abs_diff_eq;

    fn builtin(family: &str) -> crate::functions::Oracle {
        make_builtin(&FunctionSpec::new(family)).unwrap()
    }

    #[test]
    fn bump_is_normalized() {
        assert_abs_diff_eq!(bump_mass(1, 65).unwrap(), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(bump_mass(2, 65).unwrap(), 1.0, epsilon = 1e-8);
        assert_eq!(bump(&[1.0, 0.0]), 0.0);
        assert!(bump(&[0.3, -0.2]) > 0.0);
    }

    #[test]
    fn quadratic_averages_to_itself() {
        let f = make_builtin(&FunctionSpec::new("quadratic").with("diag", serde_json::json!([1.5, -0.5]))).unwrap();
        let q = mollified_hessian(f.as_ref(), &[0.2, 0.1], 0.1, &MollifierConfig::default()).unwrap();
        assert!(q.max_abs_diff(&SymMatrix::from_diagonal(&[1.5, -0.5])) < 1e-14);
    }

    #[test]
    fn even_bump_splits_kink_in_half() {
        let cfg = MollifierConfig::default();
        for (a, b) in [(-1.0, -3.0), (1.0, -1.0), (2.0, 0.5)] {
            let f = PiecewiseQuadratic1D::new(a, b).unwrap();
            for eps in [1e-1, 1e-2, 1e-3] {
                let q = mollified_hessian(&f, &[0.0], eps, &cfg).unwrap();
                assert_abs_diff_eq!(q.get(0, 0), (a + b) / 2.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn one_sided_support() {
        let f = builtin("kink");
        let q = mollified_hessian(f.as_ref(), &[0.1], 0.1, &MollifierConfig::default()).unwrap();
        assert_abs_diff_eq!(q.get(0, 0), -1.0, epsilon = 1e-14);
        let q = mollified_hessian(f.as_ref(), &[-0.1], 0.1, &MollifierConfig::default()).unwrap();
        assert_abs_diff_eq!(q.get(0, 0), -3.0, epsilon = 1e-14);
    }

    #[test]
    fn off_center_kink_weight() {
        // At x = ε/2 the t > 0 side of the kink (y < 0, curvature b) carries
        // mass ∫_{1/2}^{1} φ₁.
        let cfg = MollifierConfig::default();
        let f = PiecewiseQuadratic1D::new(-1.0, -3.0).unwrap();
        let eps = 0.1;
        let q = mollified_hessian(&f, &[eps / 2.0], eps, &cfg).unwrap();
        let fine = GaussLegendre::new(NonZeroUsize::new(100).unwrap());
        let tail = fine.integrate(0.5, 1.0, bump_1d);
        assert_abs_diff_eq!(q.get(0, 0), -1.0 * (1.0 - tail) - 3.0 * tail, epsilon = 1e-10);
    }

    #[test]
    fn doubling_quadrature_is_stable() {
        let coarse = MollifierConfig::default();
        let fine = MollifierConfig { quadrature_points: 130, ..coarse.clone() };
        let cases: Vec<(crate::functions::Oracle, Vec<f64>)> = vec![
            (builtin("kink"), vec![3e-4]),
            (builtin("mixed"), vec![-2e-3]),
            (builtin("neg_cos_sum"), vec![0.4, 1.2]),
            (
                make_builtin(&FunctionSpec::new("convex_smooth").with("dim", serde_json::json!(2))).unwrap(),
                vec![0.1, -0.3],
            ),
        ];
        for (f, x) in &cases {
            for &eps in &coarse.epsilons {
                let a = mollified_hessian(f.as_ref(), x, eps, &coarse).unwrap();
                let b = mollified_hessian(f.as_ref(), x, eps, &fine).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-6, "{} eps={eps}", f.label());
            }
        }
    }

    #[test]
    fn neg_cos_closed_form() {
        // ∫ cos(x − εt) φ₁(t) dt = cos(x) ∫ cos(εt) φ₁(t) dt by evenness.
        let f = builtin("neg_cos_sum");
        let (x, eps) = ([0.7, -2.0], 0.1);
        let fine = GaussLegendre::new(NonZeroUsize::new(100).unwrap());
        let damp = fine.integrate(-1.0, 1.0, |t| (eps * t).cos() * bump_1d(t));
        let q = mollified_hessian(f.as_ref(), &x, eps, &MollifierConfig::default()).unwrap();
        assert_abs_diff_eq!(q.get(0, 0), x[0].cos() * damp, epsilon = 1e-12);
        assert_abs_diff_eq!(q.get(1, 1), x[1].cos() * damp, epsilon = 1e-12);
        assert_abs_diff_eq!(q.get(0, 1), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rotated_kink_in_two_dimensions() {
        // Kink along the diagonal: mass splits evenly at the origin by symmetry.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = crate::functions::embed_1d(std::sync::Arc::new(PiecewiseQuadratic1D::kink()), &[s, s]).unwrap();
        let q = mollified_hessian(f.as_ref(), &[0.0, 0.0], 0.1, &MollifierConfig::default()).unwrap();
        let expected = SymMatrix::outer(&[s, s], -2.0);
        assert!(q.max_abs_diff(&expected) < 1e-10, "{q:?}");
    }

    #[test]
    fn membership_reports() {
        let cfg = MollifierConfig::default();
        let sampling = SamplingConfig::default();
        let r = mollification_membership_check(builtin("kink").as_ref(), &[0.0], &cfg, &sampling).unwrap();
        assert!(r.pass);
        for e in &r.entries {
            assert!(e.pass && e.distance <= 1e-12 && (1.0..=3.0).contains(&e.ell), "{e:?}");
        }
        let r = mollification_membership_check(builtin("mixed").as_ref(), &[0.0], &cfg, &sampling).unwrap();
        assert!(r.pass && r.entries.iter().all(|e| (0.0..=1.0).contains(&e.ell)));
        let r = mollification_membership_check(builtin("neg_cos_sum").as_ref(), &[0.0, 0.0], &cfg, &sampling).unwrap();
        assert!(r.pass);
        assert!(r.entries.iter().all(|e| e.ell == 0.0));
        let r = mollification_membership_check(builtin("neg_cos_sum").as_ref(), &[3.0, 3.0], &cfg, &sampling).unwrap();
        assert!(r.pass && !r.entries[0].pass, "{r:?}");
        let dists: Vec<f64> = r.entries.iter().map(|e| e.distance).collect();
        assert!(dists.windows(2).all(|w| w[1] < w[0]), "{dists:?}");
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = MollifierConfig::default();
        let f = make_builtin(&FunctionSpec::new("convex_smooth").with("dim", serde_json::json!(3))).unwrap();
        assert!(mollified_hessian(f.as_ref(), &[0.0; 3], 0.1, &cfg).unwrap_err().is_input());
        let bad = MollifierConfig { epsilons: vec![1e-2, 1e-1], ..cfg.clone() };
        assert!(bad.validate().is_err());
        let bounded = make_builtin(&FunctionSpec::new("neg_cos_sum").with("a", serde_json::json!(1.0))).unwrap();
        assert!(matches!(
            mollified_hessian(bounded.as_ref(), &[0.95, 0.0], 0.1, &cfg),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn missing_hessian_is_integration_error() {
        struct GradientOnly;
        impl FunctionOracle for GradientOnly {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, x: &[f64]) -> f64 {
                x[0] * x[0]
            }
            fn gradient(&self, x: &[f64]) -> Vec<f64> {
                vec![2.0 * x[0]]
            }
            fn label(&self) -> String {
                "gradient_only".into()
            }
        }
        let err = mollified_hessian(&GradientOnly, &[0.0], 0.1, &MollifierConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Integration(_)));
        assert!(!err.is_input());
    }
}
