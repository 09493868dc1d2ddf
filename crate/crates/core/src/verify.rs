//! Property suites behind `ncindex verify`.
//!
//! Each suite checks one structural property of the index on fixed-seed
//! random or built-in instances and reports the worst deviation observed.
//! For an equality that deviation is the absolute difference; for an
//! inequality it is the amount of violation (zero when it holds).

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::{
    check_convex_on_segment, compose_sum, embed_1d, make_builtin, quadratic_shift, rotate, FunctionSpec, Oracle,
    PiecewiseQuadratic1D,
};
use crate::hessian_set::{minkowski_sum, sample_hessian_set, stream, HessianHull, SamplingConfig};
use crate::hull_index::{compute_interval, interval_from_hull, loc_lower, loc_upper, rho_modulus, NonconvexityInterval};
use crate::matrix::{SquareMatrix, SymMatrix};
use crate::smoothing::{mollification_membership_check, MollifierConfig};
use crate::spectral::{self, eigendecompose};
use crate::tolerances;

pub const SUITES: &[&str] = &[
    "lemma-distance",
    "table1",
    "smooth-reduction",
    "convex-vanishing",
    "orthogonal-invariance",
    "subadditivity",
    "sandwich",
    "usc",
    "quadratic-shift",
    "mollification",
    "interval-structure",
    "optimizer",
];

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub pass: bool,
    pub worst_slack: f64,
    pub tolerance: f64,
    pub cases: usize,
    /// Description of the worst case, or of the first failure.
    pub note: String,
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<22} worst slack {:.3e} (tol {:.0e}, {} cases)",
            if self.pass { "PASS" } else { "FAIL" },
            self.suite,
            self.worst_slack,
            self.tolerance,
            self.cases
        )?;
        if !self.note.is_empty() {
            write!(f, "  {}", self.note)?;
        }
        Ok(())
    }
}

/// Running worst-case tracker for one suite.
struct Tally {
    suite: &'static str,
    tolerance: f64,
    worst: f64,
    cases: usize,
    note: String,
    failed: bool,
}

impl Tally {
    fn new(suite: &'static str, tolerance: f64) -> Self {
        Tally {
            suite,
            tolerance,
            worst: 0.0,
            cases: 0,
            note: String::new(),
            failed: false,
        }
    }

    /// Records a deviation measured against this suite's tolerance.
    fn record(&mut self, deviation: f64, what: impl FnOnce() -> String) {
        self.record_with(deviation, self.tolerance, what);
    }

    /// Records a deviation measured against its own tolerance; the reported
    /// slack is rescaled to the suite tolerance.
    fn record_with(&mut self, deviation: f64, tolerance: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        let scaled = if deviation.is_nan() { f64::INFINITY } else { deviation * self.tolerance / tolerance };
        let fails = !(deviation <= tolerance);
        if fails && !self.failed {
            self.failed = true;
            self.note = format!("first failure: {}", what());
        }
        self.worst = self.worst.max(scaled);
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.record(if ok { 0.0 } else { f64::INFINITY }, what);
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            suite: self.suite.to_string(),
            pass: !self.failed,
            worst_slack: self.worst,
            tolerance: self.tolerance,
            cases: self.cases,
            note: self.note,
        }
    }
}

/// Runs one named suite, or every suite for `"all"`.
pub fn run(selector: &str) -> Result<Vec<SuiteResult>> {
    match selector {
        "all" => SUITES.iter().map(|s| run_one(s)).collect(),
        s => Ok(vec![run_one(s)?]),
    }
}

fn run_one(suite: &str) -> Result<SuiteResult> {
    match suite {
        "lemma-distance" => lemma_distance(),
        "table1" => table1(),
        "smooth-reduction" => smooth_reduction(),
        "convex-vanishing" => convex_vanishing(),
        "orthogonal-invariance" => orthogonal_invariance(),
        "subadditivity" => subadditivity(),
        "sandwich" => sandwich(),
        "usc" => usc(),
        "quadratic-shift" => quadratic_shift_suite(),
        "mollification" => mollification(),
        "interval-structure" => interval_structure(),
        "optimizer" => optimizer(),
        other => Err(Error::input(format!(
            "unknown suite {other:?}; expected one of: all, {}",
            SUITES.join(", ")
        ))),
    }
}

const SEED: u64 = 0x5eed;

fn random_symmetric(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> SymMatrix {
    let mut data = vec![0.0; d * d];
    for i in 0..d {
        for j in i..d {
            let v: f64 = rng.sample(StandardNormal);
            data[i * d + j] = scale * v;
            data[j * d + i] = scale * v;
        }
    }
    SymMatrix::from_row_major(d, data, crate::matrix::Symmetry::Strict).expect("finite symmetric data")
}

fn random_psd(rng: &mut ChaCha8Rng, d: usize) -> SymMatrix {
    let rank = rng.random_range(0..=d);
    let mut m = SymMatrix::zeros(d);
    for _ in 0..rank {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        m = &m + &SymMatrix::outer(&v, 1.0);
    }
    m
}

fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> SquareMatrix {
    let mut u = SquareMatrix::identity(d);
    for _ in 0..3 {
        for i in 0..d {
            for j in (i + 1)..d {
                let angle = rng.random_range(0.0..std::f64::consts::TAU);
                u = u.matmul(&SquareMatrix::givens(d, i, j, angle));
            }
        }
    }
    if d > 0 && rng.random_bool(0.5) {
        // Include reflections.
        let mut rows = u.rows();
        for v in &mut rows[0] {
            *v = -*v;
        }
        u = SquareMatrix::from_rows(&rows).expect("square");
    }
    u
}

/// Hull with 1 to `max_vertices` vertices in dimension 1 to `max_dim`.
fn random_hull(rng: &mut ChaCha8Rng, max_vertices: usize, max_dim: usize) -> HessianHull {
    let d = rng.random_range(1..=max_dim);
    let m = rng.random_range(1..=max_vertices);
    let scale = rng.random_range(0.2..3.0);
    let vertices = (0..m).map(|_| random_symmetric(rng, d, scale)).collect();
    HessianHull::from_vertices(vertices).expect("nonempty hull")
}

fn builtin(family: &str) -> Result<Oracle> {
    make_builtin(&FunctionSpec::new(family))
}

fn lemma_distance() -> Result<SuiteResult> {
    let mut t = Tally::new("lemma-distance", tolerances::LEMMA);
    let mut rng = stream(SEED, 1, 0);
    for d in [1, 2, 3, 5] {
        for case in 0..1000 {
            let scale = 10f64.powf(rng.random_range(-2.0..2.0));
            let q = random_symmetric(&mut rng, d, scale);
            let split = eigendecompose(&q)?;
            let ell = split.ell();
            // ‖Q − Q⁺‖_* through an independent decomposition of Q − Q⁺.
            let attained = spectral::nuclear_norm(&(&q - &split.positive_part))?;
            let rel = 1.0 + q.frobenius_norm();
            t.record_with((attained - ell).abs(), 1e-10 * rel, || format!("d={d} case {case}: attainment"));
            for _ in 0..3 {
                let m = random_psd(&mut rng, d);
                let dist = spectral::nuclear_norm(&(&q - &m))?;
                let scale = 1.0 + q.frobenius_norm() + m.frobenius_norm();
                t.record_with((ell - dist).max(0.0), tolerances::LEMMA * scale, || {
                    format!("d={d} case {case}: PSD competitor closer than ℓ")
                });
            }
        }
    }
    Ok(t.finish())
}

fn table1() -> Result<SuiteResult> {
    let mut t = Tally::new("table1", 1e-9);
    let exact = SamplingConfig::default();
    let sampled = SamplingConfig::sampled_only();
    let kink = builtin("kink")?;
    let mixed = builtin("mixed")?;
    let cos = builtin("neg_cos_sum")?;
    for (cfg, tol, mode) in [(&exact, 1e-9, "exact"), (&sampled, 1e-3, "sampled")] {
        let i = compute_interval(kink.as_ref(), &[0.0], cfg)?;
        t.record_with(
            (i.loc_low - 1.0).abs().max((i.loc_high - 3.0).abs()),
            tol,
            || format!("kink {mode}: [{}, {}]", i.loc_low, i.loc_high),
        );
        t.record_with(
            (i.nloc_low - 1.0).abs().max((i.nloc_high - 1.0).abs()),
            tol,
            || format!("kink {mode}: nloc [{}, {}]", i.nloc_low, i.nloc_high),
        );
        let i = compute_interval(mixed.as_ref(), &[0.0], cfg)?;
        t.record_with(i.loc_low.abs().max((i.loc_high - 1.0).abs()), tol, || {
            format!("mixed {mode}: [{}, {}]", i.loc_low, i.loc_high)
        });
        let mut rng = stream(SEED, 2, 0);
        for _ in 0..16 {
            let x: [f64; 2] = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
            let target = (-x[0].cos()).max(0.0) + (-x[1].cos()).max(0.0);
            let i = compute_interval(cos.as_ref(), &x, cfg)?;
            t.record_with(
                (i.loc_low - target).abs().max((i.loc_high - target).abs()),
                tol,
                || format!("neg_cos_sum {mode} at {x:?}: [{}, {}] vs {target}", i.loc_low, i.loc_high),
            );
        }
    }
    Ok(t.finish())
}

fn smooth_reduction() -> Result<SuiteResult> {
    let mut t = Tally::new("smooth-reduction", tolerances::INDEX);
    let mut rng = stream(SEED, 3, 0);
    let cos = builtin("neg_cos_sum")?;
    let soft = make_builtin(&FunctionSpec::new("convex_smooth").with("dim", 3))?;
    let kink = builtin("kink")?;
    let mut cases: Vec<(Oracle, Vec<f64>)> = vec![(kink.clone(), vec![0.5]), (kink, vec![-0.25])];
    for _ in 0..8 {
        cases.push((cos.clone(), vec![rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)]));
        cases.push((soft.clone(), (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()));
    }
    for (f, x) in &cases {
        let exact = compute_interval(f.as_ref(), x, &SamplingConfig::default())?;
        t.record((exact.loc_high - exact.loc_low).abs(), || format!("{} exact at {x:?}", f.label()));
        let sampled = compute_interval(f.as_ref(), x, &SamplingConfig::sampled_only())?;
        t.record_with(
            (sampled.loc_high - sampled.loc_low).abs(),
            tolerances::INTERVAL_SAMPLING,
            || format!("{} sampled at {x:?}: width {}", f.label(), sampled.loc_high - sampled.loc_low),
        );
    }
    Ok(t.finish())
}

fn convex_vanishing() -> Result<SuiteResult> {
    let mut t = Tally::new("convex-vanishing", tolerances::INDEX);
    let mut rng = stream(SEED, 4, 0);
    let soft = make_builtin(&FunctionSpec::new("convex_smooth").with("dim", 2))?;
    let cos = builtin("neg_cos_sum")?;
    let pw = make_builtin(&FunctionSpec::new("pw_quad").with("a", 2.0).with("b", 3.0))?;
    let pw0 = make_builtin(&FunctionSpec::new("pw_quad").with("a", 0.0).with("b", 1.0))?;
    let mut cases: Vec<(Oracle, Vec<f64>)> = vec![(pw, vec![0.0]), (pw0, vec![0.0])];
    for _ in 0..8 {
        cases.push((soft.clone(), vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]));
        cases.push((cos.clone(), vec![rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)]));
    }
    for (f, x) in &cases {
        for cfg in [SamplingConfig::default(), SamplingConfig::sampled_only()] {
            let i = compute_interval(f.as_ref(), x, &cfg)?;
            let worst = [i.loc_low, i.loc_high, i.nloc_low, i.nloc_high, i.rho]
                .into_iter()
                .fold(0.0, |a: f64, v| a.max(v.abs()));
            t.record(worst, || format!("{} at {x:?}: loc_high {}", f.label(), i.loc_high));
        }
    }
    Ok(t.finish())
}

fn invariant_fields(i: &NonconvexityInterval) -> [f64; 3] {
    [i.loc_low, i.loc_high, i.rho]
}

fn orthogonal_invariance() -> Result<SuiteResult> {
    let mut t = Tally::new("orthogonal-invariance", tolerances::INDEX);
    let mut rng = stream(SEED, 5, 0);
    for case in 0..60 {
        let h = random_hull(&mut rng, 4, 4);
        let u = random_orthogonal(&mut rng, h.dim);
        let a = interval_from_hull(&h)?;
        let b = interval_from_hull(&h.congruence(&u))?;
        let dev = invariant_fields(&a)
            .iter()
            .zip(invariant_fields(&b))
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        let scale = 1.0 + h.max_spectral_norm()?;
        t.record_with(dev, tolerances::INDEX * scale, || format!("hull case {case}"));
        if h.len() <= 2 {
            let dev = (a.nloc_low - b.nloc_low).abs().max((a.nloc_high - b.nloc_high).abs());
            t.record_with(dev, tolerances::INDEX * scale, || format!("hull case {case}: normalized"));
        }
    }
    // Function level: g(z) = h(Uz) has Hess(g; z) = Uᵀ Hess(h; Uz) U.
    let cos: Oracle = builtin("neg_cos_sum")?;
    let kink2 = embed_1d(builtin("kink")?, &[0.6, 0.8])?;
    for (k, f) in [cos, kink2].into_iter().enumerate() {
        for _ in 0..6 {
            let u = random_orthogonal(&mut rng, 2);
            let g = rotate(f.clone(), u.clone())?;
            let z = if k == 1 {
                // A point on the kink line of the embedded function.
                u.tr_mul_vec(&[-0.8 * 0.3, 0.6 * 0.3])
            } else {
                vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]
            };
            let a = compute_interval(g.as_ref(), &z, &SamplingConfig::default())?;
            let b = compute_interval(f.as_ref(), &u.mul_vec(&z), &SamplingConfig::default())?;
            let dev = invariant_fields(&a)
                .iter()
                .zip(invariant_fields(&b))
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            t.record(dev, || format!("{} at {z:?}", g.label()));
        }
    }
    Ok(t.finish())
}

fn subadditivity() -> Result<SuiteResult> {
    let mut t = Tally::new("subadditivity", tolerances::LEMMA);
    let mut rng = stream(SEED, 6, 0);
    for case in 0..200 {
        let a = random_hull(&mut rng, 3, 3);
        let d = a.dim;
        let m = rng.random_range(1..=3);
        let scale = rng.random_range(0.2..3.0);
        let b = HessianHull::from_vertices((0..m).map(|_| random_symmetric(&mut rng, d, scale)).collect())?;
        let sum = minkowski_sum(&a, &b)?;
        let (ua, ub, us) = (loc_upper(&a)?.0, loc_upper(&b)?.0, loc_upper(&sum)?.0);
        t.record((us - ua - ub).max(0.0), || format!("case {case}: {us} > {ua} + {ub}"));
        let (la, lb, ls) = (loc_lower(&a)?.value, loc_lower(&b)?.value, loc_lower(&sum)?.value);
        t.record((ls - la - lb).max(0.0), || format!("case {case}: lower {ls} > {la} + {lb}"));
    }
    // Function level: the sampled hull of a sum sits inside the Minkowski sum.
    let mixed = builtin("mixed")?;
    let kink = builtin("kink")?;
    let shifted = make_builtin(&FunctionSpec::new("pw_quad").with("a", 2.0).with("b", -0.5))?;
    for (f, g) in [(kink.clone(), mixed.clone()), (kink, shifted.clone()), (mixed, shifted)] {
        let sum = compose_sum(f.clone(), g.clone())?;
        let cfg = SamplingConfig::default();
        let hs = sample_hessian_set(sum.as_ref(), &[0.0], &SamplingConfig::sampled_only())?;
        let hm = minkowski_sum(&sample_hessian_set(f.as_ref(), &[0.0], &cfg)?, &sample_hessian_set(g.as_ref(), &[0.0], &cfg)?)?;
        let (us, um) = (loc_upper(&hs)?.0, loc_upper(&hm)?.0);
        t.record_with((us - um).max(0.0), tolerances::INTERVAL_SAMPLING, || format!("{}: {us} > {um}", sum.label()));
        for v in &hs.vertices {
            let dist = crate::hessian_set::hull_membership_distance(&hm, v)?;
            t.record_with(dist, tolerances::INTERVAL_SAMPLING, || format!("{}: vertex outside Minkowski sum", sum.label()));
        }
    }
    Ok(t.finish())
}

fn sandwich() -> Result<SuiteResult> {
    let mut t = Tally::new("sandwich", tolerances::INDEX);
    let mut rng = stream(SEED, 7, 0);
    for case in 0..300 {
        let h = random_hull(&mut rng, 4, 5);
        let d = h.dim as f64;
        let (high, _) = loc_upper(&h)?;
        let rho = rho_modulus(&h)?;
        t.record((rho - high).max(0.0), || format!("case {case}: rho {rho} > loc_high {high}"));
        t.record((high - d * rho).max(0.0), || format!("case {case}: loc_high {high} > d·rho {}", d * rho));
    }
    for family in ["kink", "mixed"] {
        let i = compute_interval(builtin(family)?.as_ref(), &[0.0], &SamplingConfig::default())?;
        t.record((i.rho - i.loc_high).max(0.0).max(i.loc_high - i.rho), || format!("{family}: d = 1 equality"));
    }
    Ok(t.finish())
}

fn usc() -> Result<SuiteResult> {
    let mut t = Tally::new("usc", tolerances::USC);
    for family in ["kink", "mixed"] {
        let f = builtin(family)?;
        for cfg in [SamplingConfig::default(), SamplingConfig::sampled_only()] {
            let at0 = compute_interval(f.as_ref(), &[0.0], &cfg)?.loc_high;
            for k in 1..=12 {
                for sign in [1.0, -1.0] {
                    let x = sign * 0.5f64.powi(k);
                    let high = compute_interval(f.as_ref(), &[x], &cfg)?.loc_high;
                    t.record((high - at0).max(0.0), || format!("{family} at {x}: {high} > {at0}"));
                }
            }
        }
    }
    Ok(t.finish())
}

fn quadratic_shift_suite() -> Result<SuiteResult> {
    let mut t = Tally::new("quadratic-shift", tolerances::CONVEXITY);
    let kink = builtin("kink")?;
    let shifted = quadratic_shift(kink, 3.0)?;
    t.check(check_convex_on_segment(shifted.as_ref(), &[-1.0], &[1.0], 201)?, || {
        "kink + (3/2)t² not monotone".into()
    });
    // For pw_quad, adding (ρ/2)t² with ρ from the index convexifies, and
    // any smaller shift does not.
    for (a, b) in [(-1.0, -3.0), (1.0, -1.0), (-2.0, 0.5), (2.0, 3.0), (-0.5, -0.5)] {
        let f: Oracle = Arc::new(PiecewiseQuadratic1D::new(a, b)?);
        let rho = compute_interval(f.as_ref(), &[0.0], &SamplingConfig::default())?.rho;
        let ok = check_convex_on_segment(quadratic_shift(f.clone(), rho)?.as_ref(), &[-1.0], &[1.0], 201)?;
        t.check(ok, || format!("pw_quad({a},{b}) + (ρ/2)t² not convex"));
        if rho > 0.0 {
            let under = check_convex_on_segment(quadratic_shift(f, rho - 0.1)?.as_ref(), &[-1.0], &[1.0], 201)?;
            t.check(!under, || format!("pw_quad({a},{b}): shift below ρ already convex"));
        }
    }
    let cos = builtin("neg_cos_sum")?;
    let mut rng = stream(SEED, 9, 0);
    for _ in 0..8 {
        let x: [f64; 2] = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let rho = compute_interval(cos.as_ref(), &x, &SamplingConfig::default())?.rho;
        let h = quadratic_shift(cos.clone(), rho)?.hessian_at(&x).expect("smooth");
        let lmin = eigendecompose(&h)?.lambda_min();
        t.record((-lmin).max(0.0), || format!("neg_cos_sum at {x:?}: shifted Hessian has λ_min {lmin}"));
    }
    Ok(t.finish())
}

fn mollification() -> Result<SuiteResult> {
    let mut t = Tally::new("mollification", tolerances::MEMBER);
    let cfg = MollifierConfig::default();
    let sampling = SamplingConfig::default();
    let cases: Vec<(Oracle, Vec<f64>)> = vec![
        (builtin("kink")?, vec![0.0]),
        (builtin("mixed")?, vec![0.0]),
        (make_builtin(&FunctionSpec::new("pw_quad").with("a", 2.0).with("b", -0.5))?, vec![0.0]),
        (builtin("neg_cos_sum")?, vec![0.0, 0.0]),
        (embed_1d(builtin("kink")?, &[0.6, 0.8])?, vec![0.0, 0.0]),
    ];
    for (f, x) in &cases {
        let r = mollification_membership_check(f.as_ref(), x, &cfg, &sampling)?;
        let last = r.entries.last().expect("nonempty eps list");
        t.record(last.distance, || format!("{} at {x:?}: final distance {}", f.label(), last.distance));
        for e in &r.entries {
            let out = (r.loc_low - e.ell).max(e.ell - r.loc_high).max(0.0);
            t.record(out, || format!("{} eps={}: ℓ = {} outside [{}, {}]", f.label(), e.eps, e.ell, r.loc_low, r.loc_high));
        }
    }
    Ok(t.finish())
}

fn interval_structure() -> Result<SuiteResult> {
    let mut t = Tally::new("interval-structure", tolerances::INTERVAL_SAMPLING);
    let mut rng = stream(SEED, 10, 0);
    for case in 0..40 {
        let h = random_hull(&mut rng, 4, 3);
        let i = interval_from_hull(&h)?;
        let m = h.len();
        let anchors: Vec<Vec<f64>> = {
            let mut v = vec![i.argmin_weights.0.clone(), crate::hull_index::SimplexWeights::vertex(m, i.argmax_vertex).0];
            v.extend((0..m).map(|k| crate::hull_index::SimplexWeights::vertex(m, k).0));
            v
        };
        let mut values = Vec::with_capacity(10_000);
        for _ in 0..10_000 {
            // A random point on a random segment between an anchor and a
            // Dirichlet-random point: dense along paths joining the extremes.
            let a = &anchors[rng.random_range(0..anchors.len())];
            let raw: Vec<f64> = (0..m).map(|_| -rng.random::<f64>().ln()).collect();
            let s: f64 = raw.iter().sum();
            let s_t: f64 = rng.random();
            let w: Vec<f64> = a.iter().zip(&raw).map(|(ai, ri)| (1.0 - s_t) * ai + s_t * ri / s).collect();
            values.push(spectral::ell(&SymMatrix::combination(&h.vertices, &w))?);
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = tolerances::INTERVAL_SAMPLING;
        t.record((i.loc_low - lo).max(0.0).max(hi - i.loc_high), || {
            format!("case {case}: sampled values [{lo}, {hi}] escape [{}, {}]", i.loc_low, i.loc_high)
        });
        t.record_with((lo - i.loc_low).abs().max((hi - i.loc_high).abs()), tol * (1.0 + i.loc_high), || {
            format!("case {case}: sampled extremes [{lo}, {hi}] vs [{}, {}]", i.loc_low, i.loc_high)
        });
    }
    Ok(t.finish())
}

/// Grid search over the simplex with step `1e−2`, then repeated zooming
/// around the best grid point.
pub fn grid_min_over_simplex(f: &dyn Fn(&[f64]) -> Result<f64>, m: usize) -> Result<f64> {
    let h0 = 1e-2;
    let full: Vec<(f64, f64)> = vec![(0.0, 1.0); m - 1];
    let mut best = (f64::INFINITY, vec![]);
    grid_search(f, &full, h0, &mut vec![], &mut best)?;
    let mut h = h0;
    for _ in 0..8 {
        let center = best.1.clone();
        let boxes: Vec<(f64, f64)> = center[..m - 1].iter().map(|&c| (c - 6.0 * h, c + 6.0 * h)).collect();
        h /= 4.0;
        grid_search(f, &boxes, h, &mut vec![], &mut best)?;
    }
    Ok(best.0)
}

/// Visits lattice points `lo + k·h` of each box side, for the first `m − 1`
/// weights; the last weight is the remainder.
fn grid_search(
    f: &dyn Fn(&[f64]) -> Result<f64>,
    boxes: &[(f64, f64)],
    h: f64,
    prefix: &mut Vec<f64>,
    best: &mut (f64, Vec<f64>),
) -> Result<()> {
    let used: f64 = prefix.iter().sum();
    if prefix.len() == boxes.len() {
        let mut w = prefix.clone();
        w.push((1.0 - used).max(0.0));
        let v = f(&w)?;
        if v < best.0 {
            *best = (v, w);
        }
        return Ok(());
    }
    let (lo, hi) = boxes[prefix.len()];
    let steps = ((hi - lo) / h).round() as i64;
    for k in 0..=steps {
        let v = lo + k as f64 * h;
        if v < -1e-12 {
            continue;
        }
        let v = v.max(0.0);
        if used + v > 1.0 + 1e-12 {
            break;
        }
        prefix.push(v.min(1.0 - used));
        grid_search(f, boxes, h, prefix, best)?;
        prefix.pop();
    }
    Ok(())
}

fn optimizer() -> Result<SuiteResult> {
    let mut t = Tally::new("optimizer", 1e-4);
    let mut rng = stream(SEED, 11, 0);
    for case in 0..100 {
        let h = random_hull(&mut rng, 4, 3);
        let lo = loc_lower(&h)?;
        let grid = grid_min_over_simplex(&|w| spectral::ell(&SymMatrix::combination(&h.vertices, w)), h.len())?;
        // The solver value is attained at its weights, so it cannot beat
        // the true minimum; the grid is an upper estimate of that minimum.
        t.record((lo.value - grid).abs(), || format!("case {case}: solver {} vs grid {grid}", lo.value));
    }
    Ok(t.finish())
}
