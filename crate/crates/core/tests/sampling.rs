use ncindex_core::functions::{embed_1d, quadratic_shift, rotate};
use ncindex_core::hessian_set::hull_membership_distance;
use ncindex_core::{
    compute_interval, make_builtin, sample_hessian_set, FunctionSpec, HessianHull, SamplingConfig, SquareMatrix,
};

fn hausdorff(a: &HessianHull, b: &HessianHull) -> f64 {
    let one = |x: &HessianHull, y: &HessianHull| {
        x.vertices
            .iter()
            .map(|v| hull_membership_distance(y, v).unwrap())
            .fold(0.0f64, f64::max)
    };
    one(a, b).max(one(b, a))
}

fn builtin(family: &str) -> ncindex_core::Oracle {
    make_builtin(&FunctionSpec::new(family)).unwrap()
}

#[test]
fn sampled_matches_exact_at_distinguished_points() {
    let cases: [(&str, &[f64]); 5] = [
        ("kink", &[0.0]),
        ("mixed", &[0.0]),
        ("neg_cos_sum", &[0.0, 0.0]),
        ("neg_cos_sum", &[std::f64::consts::PI, 0.0]),
        ("kink", &[0.7]),
    ];
    for (family, x) in cases {
        let f = builtin(family);
        let exact = f.exact_hessian_set(x).unwrap();
        let sampled = sample_hessian_set(f.as_ref(), x, &SamplingConfig::sampled_only()).unwrap();
        let d = hausdorff(&exact, &sampled);
        assert!(d <= 1e-6, "{family} at {x:?}: {d:e}");
    }
}

#[test]
fn sampled_matches_exact_at_generic_points() {
    let f = builtin("neg_cos_sum");
    let cfg = SamplingConfig::sampled_only();
    let smallest = *cfg.radii.last().unwrap();
    for x in [[0.3, -1.1], [2.0, 2.5], [-0.7, 1.9]] {
        let exact = f.exact_hessian_set(&x).unwrap();
        let sampled = sample_hessian_set(f.as_ref(), &x, &cfg).unwrap();
        let tol = 2.0 * smallest * 2f64.sqrt();
        let d = hausdorff(&exact, &sampled);
        assert!(d <= tol, "{x:?}: {d:e} > {tol:e}");
    }
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let f = builtin("mixed");
    let cfg = SamplingConfig {
        seed: 17,
        ..SamplingConfig::sampled_only()
    };
    let a = sample_hessian_set(f.as_ref(), &[0.0], &cfg).unwrap();
    let b = sample_hessian_set(f.as_ref(), &[0.0], &cfg).unwrap();
    assert_eq!(a.vertices, b.vertices);
    assert_eq!(a.radius_trace, b.radius_trace);
}

#[test]
fn sampling_is_congruence_covariant() {
    let h = embed_1d(builtin("mixed"), &[1.0, 2.0]).unwrap();
    let u = SquareMatrix::givens(2, 0, 1, 0.83);
    let g = rotate(h.clone(), u.clone()).unwrap();
    let cfg = SamplingConfig::sampled_only();
    let x = [0.0, 0.0];
    let base = sample_hessian_set(h.as_ref(), &x, &cfg).unwrap();
    let rotated = sample_hessian_set(g.as_ref(), &u.tr_mul_vec(&x), &cfg).unwrap();
    assert_eq!(base.len(), 2);
    let d = hausdorff(&base.congruence(&u), &rotated);
    assert!(d <= 1e-6, "{d:e}");
}

#[test]
fn quadratic_shift_lowers_both_endpoints() {
    let f = builtin("kink");
    let cfg = SamplingConfig::sampled_only();
    let before = compute_interval(f.as_ref(), &[0.0], &cfg).unwrap();
    let shifted = quadratic_shift(f, 2.0).unwrap();
    let after = compute_interval(shifted.as_ref(), &[0.0], &cfg).unwrap();
    assert!((before.loc_low - 1.0).abs() < 1e-6);
    assert!((before.loc_high - 3.0).abs() < 1e-6);
    assert!(after.loc_low.abs() < 1e-6);
    assert!((after.loc_high - 1.0).abs() < 1e-6);
}

#[test]
fn convex_functions_have_zero_index() {
    let f = make_builtin(&FunctionSpec::new("convex_smooth").with("dim", 2)).unwrap();
    let i = compute_interval(f.as_ref(), &[0.4, -0.2], &SamplingConfig::sampled_only()).unwrap();
    assert!(i.loc_high < 1e-8);
    assert!(i.conv_low > 1.0 - 1e-8);
}

#[test]
fn domain_margin_is_enforced() {
    let f = make_builtin(&FunctionSpec::new("neg_cos_sum").with("a", 1.0)).unwrap();
    let err = sample_hessian_set(f.as_ref(), &[0.999, 0.0], &SamplingConfig::sampled_only()).unwrap_err();
    assert!(err.is_input(), "{err}");
}
