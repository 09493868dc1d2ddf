use ncindex_core::hull_index::{loc_lower, loc_upper, nloc_bounds, rho_modulus};
use ncindex_core::spectral::{ell, normalized_ratio};
use ncindex_core::{interval_from_hull, HessianHull, SquareMatrix, SymMatrix, Symmetry};
use proptest::prelude::*;

fn sym2() -> impl Strategy<Value = SymMatrix> {
    prop::array::uniform3(-3.0f64..3.0)
        .prop_map(|[a, b, c]| SymMatrix::from_rows(&[vec![a, b], vec![b, c]], Symmetry::Strict).unwrap())
}

fn hull2() -> impl Strategy<Value = HessianHull> {
    prop::collection::vec(sym2(), 1..=4).prop_map(|v| HessianHull::from_vertices(v).unwrap())
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn endpoints_bracket_every_combination(h in hull2(), seed in weights(4)) {
        let i = interval_from_hull(&h).unwrap();
        prop_assert!(i.loc_low <= i.loc_high + 1e-12);
        prop_assert!(0.0 <= i.nloc_low && i.nloc_low <= i.nloc_high && i.nloc_high <= 1.0);
        prop_assert!((i.conv_low - (1.0 - i.nloc_high)).abs() < 1e-15);
        let w = &seed[..h.len()];
        let s: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|x| x / s).collect();
        let q = SymMatrix::combination(&h.vertices, &w);
        let l = ell(&q).unwrap();
        prop_assert!(l >= i.loc_low - 1e-6, "{} < {}", l, i.loc_low);
        prop_assert!(l <= i.loc_high + 1e-9);
        let r = normalized_ratio(&q).unwrap();
        prop_assert!(r <= i.nloc_high + 1e-9);
        prop_assert!(r >= i.nloc_low - 1e-6 || i.approximate_nloc);
    }

    #[test]
    fn upper_endpoint_is_attained_at_a_vertex(h in hull2()) {
        let (high, k) = loc_upper(&h).unwrap();
        prop_assert_eq!(high, ell(&h.vertices[k]).unwrap());
        for v in &h.vertices {
            prop_assert!(ell(v).unwrap() <= high);
        }
    }

    #[test]
    fn invariant_under_rotation(h in hull2(), angle in -3.2f64..3.2) {
        let u = SquareMatrix::givens(2, 0, 1, angle);
        let a = interval_from_hull(&h).unwrap();
        let b = interval_from_hull(&h.congruence(&u)).unwrap();
        prop_assert!((a.loc_high - b.loc_high).abs() < 1e-9);
        prop_assert!((a.loc_low - b.loc_low).abs() < 1e-6);
        prop_assert!((a.rho - b.rho).abs() < 1e-9);
    }

    #[test]
    fn shift_by_the_modulus_convexifies(h in hull2()) {
        let rho = rho_modulus(&h).unwrap();
        let (high, _) = loc_upper(&h.shifted(rho)).unwrap();
        prop_assert!(high < 1e-9);
        prop_assert!(loc_lower(&h.shifted(rho)).unwrap().value < 1e-9);
    }

    #[test]
    fn modulus_sandwich(h in hull2()) {
        let rho = rho_modulus(&h).unwrap();
        let (high, _) = loc_upper(&h).unwrap();
        prop_assert!(rho <= high + 1e-12);
        prop_assert!(high <= 2.0 * rho + 1e-12);
    }

    #[test]
    fn psd_hulls_are_flat(a in 0.0f64..2.0, b in 0.0f64..2.0, c in -1.0f64..1.0) {
        let v = SymMatrix::from_rows(&[vec![a + 1.0, c], vec![c, b + 1.0]], Symmetry::Strict).unwrap();
        let h = HessianHull::from_vertices(vec![v, SymMatrix::identity(2)]).unwrap();
        let i = interval_from_hull(&h).unwrap();
        prop_assert_eq!(i.loc_high, 0.0);
        prop_assert_eq!(i.loc_low, 0.0);
        prop_assert_eq!(i.nloc_high, 0.0);
        prop_assert_eq!(i.conv_low, 1.0);
    }
}

#[test]
fn negative_scalar_segment() {
    let h = HessianHull::from_vertices(vec![SymMatrix::scalar(-3.0), SymMatrix::scalar(-1.0)]).unwrap();
    let i = interval_from_hull(&h).unwrap();
    assert!((i.loc_low - 1.0).abs() < 1e-9);
    assert_eq!(i.loc_high, 3.0);
    assert_eq!(i.nloc_low, 1.0);
    assert_eq!(i.nloc_high, 1.0);
    assert_eq!(i.rho, 3.0);
}

#[test]
fn mixed_sign_segment_normalized_range() {
    let h = HessianHull::from_vertices(vec![SymMatrix::scalar(-1.0), SymMatrix::scalar(1.0)]).unwrap();
    let n = nloc_bounds(&h).unwrap();
    assert_eq!(n.low, 0.0);
    assert!((n.high - 1.0).abs() < 1e-12);
    assert!(loc_lower(&h).unwrap().value.abs() < 1e-8);
}
