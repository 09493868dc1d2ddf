//! Spectral decomposition of symmetric matrices and the nonconvexity
//! functional built on it.
//!
//! For `Q = U diag(λ) Uᵀ` the positive and negative parts are
//! `Q⁺ = U diag(λ⁺) Uᵀ` and `Q⁻ = U diag(λ⁻) Uᵀ`, with `λ⁺ = max(λ, 0)` and
//! `λ⁻ = max(−λ, 0)`. The functional [`ell`] is `‖Q⁻‖_* = Σ λᵢ⁻`, which is
//! also the nuclear-norm distance from `Q` to the PSD cone.
//!
//! Eigenvalues inside `[−τ, τ]` with `τ = 1e−10·(1 + ‖Q‖_F)` are snapped to
//! zero and contribute to neither part.

use crate::error::{Error, Result};
use crate::matrix::{SquareMatrix, SymMatrix};
use crate::tolerances;

pub use crate::matrix::Symmetry;

/// Eigendecomposition of a symmetric matrix split into spectral parts.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Orthogonal matrix whose columns are the eigenvectors.
    pub eigenvectors: SquareMatrix,
    pub positive_part: SymMatrix,
    pub negative_part: SymMatrix,
    /// Snapping threshold used to classify eigenvalues.
    pub zero_band: f64,
}

impl SpectralSplit {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_min(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `Σ λᵢ⁻` over eigenvalues below the zero band.
    pub fn ell(&self) -> f64 {
        self.eigenvalues
            .iter()
            .filter(|&&l| l < -self.zero_band)
            .fold(0.0, |acc, l| acc - l)
    }

    /// `Σ λᵢ⁺` over eigenvalues above the zero band.
    pub fn ell_of_negation(&self) -> f64 {
        self.eigenvalues
            .iter()
            .filter(|&&l| l > self.zero_band)
            .fold(0.0, |acc, l| acc + l)
    }

    pub fn nuclear_norm(&self) -> f64 {
        self.ell() + self.ell_of_negation()
    }

    /// Orthogonal projector `U₋ U₋ᵀ` onto the span of eigenvectors with
    /// negative eigenvalues. Snapped eigenvalues are excluded.
    pub fn negative_projector(&self) -> SymMatrix {
        let d = self.dim();
        let mut p = SymMatrix::zeros(d);
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            if l < -self.zero_band {
                let u = self.eigenvectors.column(k);
                p = &p + &SymMatrix::outer(&u, 1.0);
            }
        }
        p
    }
}

/// Cyclic Jacobi eigensolver.
///
/// Sweeps all `(p, q)` pairs until the off-diagonal Frobenius mass falls
/// below `1e−12 · ‖Q‖_F`, for at most 100 sweeps.
pub fn eigendecompose(q: &SymMatrix) -> Result<SpectralSplit> {
    let d = q.dim();
    if q.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::input("matrix has non-finite entries"));
    }
    let norm = q.frobenius_norm();
    let target = tolerances::JACOBI_REL * norm;

    let mut a = q.as_slice().to_vec();
    let mut v = SquareMatrix::identity(d);
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    s += a[i * d + j] * a[i * d + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    let mut off_mass = off(&a);
    while off_mass > target {
        if sweeps == tolerances::JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNonConvergence {
                sweeps,
                off_diagonal: off_mass,
            });
        }
        for p in 0..d {
            for r in (p + 1)..d {
                let apq = a[p * d + r];
                if apq == 0.0 {
                    continue;
                }
                // Entries below the rounding level of both diagonals are
                // dropped; rotating them only recreates roundoff.
                let g = 100.0 * apq.abs();
                let (app, aqq) = (a[p * d + p].abs(), a[r * d + r].abs());
                if sweeps > 3 && app + g == app && aqq + g == aqq {
                    a[p * d + r] = 0.0;
                    a[r * d + p] = 0.0;
                    continue;
                }
                let theta = (a[r * d + r] - a[p * d + p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A <- A J
                for k in 0..d {
                    let (akp, akq) = (a[k * d + p], a[k * d + r]);
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + r] = s * akp + c * akq;
                }
                // A <- Jᵀ A
                for k in 0..d {
                    let (apk, aqk) = (a[p * d + k], a[r * d + k]);
                    a[p * d + k] = c * apk - s * aqk;
                    a[r * d + k] = s * apk + c * aqk;
                }
                a[p * d + r] = 0.0;
                a[r * d + p] = 0.0;
                for k in 0..d {
                    let (vkp, vkq) = (v.get(k, p), v.get(k, r));
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, r, s * vkp + c * vkq);
                }
            }
        }
        sweeps += 1;
        off_mass = off(&a);
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[j * d + j].total_cmp(&a[i * d + i]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * d + i]).collect();
    let mut eigenvectors = SquareMatrix::identity(d);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..d {
            eigenvectors.set(k, new, v.get(k, old));
        }
    }

    let zero_band = tolerances::psd(norm);
    let mut positive_part = SymMatrix::zeros(d);
    let mut negative_part = SymMatrix::zeros(d);
    for (k, &l) in eigenvalues.iter().enumerate() {
        if l > zero_band {
            positive_part = &positive_part + &SymMatrix::outer(&eigenvectors.column(k), l);
        } else if l < -zero_band {
            negative_part = &negative_part + &SymMatrix::outer(&eigenvectors.column(k), -l);
        }
    }

    Ok(SpectralSplit {
        eigenvalues,
        eigenvectors,
        positive_part,
        negative_part,
        zero_band,
    })
}

/// Sum of magnitudes of the negative eigenvalues, `‖Q⁻‖_*`.
pub fn ell(q: &SymMatrix) -> Result<f64> {
    Ok(eigendecompose(q)?.ell())
}

/// Sum of absolute eigenvalues, `ell(Q) + ell(−Q)`.
pub fn nuclear_norm(q: &SymMatrix) -> Result<f64> {
    Ok(eigendecompose(q)?.nuclear_norm())
}

/// Nuclear-norm distance from `Q` to the PSD cone.
///
/// The infimum over `M ⪰ 0` of `‖Q − M‖_*` is attained at `M = Q⁺` and
/// equals [`ell`]; this returns that value directly.
pub fn dist_to_psd(q: &SymMatrix) -> Result<f64> {
    ell(q)
}

/// `ell(Q) / ‖Q‖_*`, or 0 when `Q` is flat (`‖Q‖_* ≤ 1e−12`).
pub fn normalized_ratio(q: &SymMatrix) -> Result<f64> {
    let split = eigendecompose(q)?;
    Ok(ratio_of(&split))
}

pub(crate) fn ratio_of(split: &SpectralSplit) -> f64 {
    let nuc = split.nuclear_norm();
    if nuc <= tolerances::FLAT {
        0.0
    } else {
        (split.ell() / nuc).clamp(0.0, 1.0)
    }
}

/// `max{0, −λ_min(Q)}`.
pub fn negative_curvature(q: &SymMatrix) -> Result<f64> {
    Ok((-eigendecompose(q)?.lambda_min()).max(0.0))
}

pub fn spectral_norm(q: &SymMatrix) -> Result<f64> {
    let s = eigendecompose(q)?;
    Ok(s.lambda_max().abs().max(s.lambda_min().abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Eigenvalues of a 2×2 symmetric matrix from its characteristic
    /// polynomial `λ² − tr·λ + det`, descending.
    fn char_poly_2x2(a: f64, b: f64, c: f64) -> (f64, f64) {
        let tr = a + c;
        let det = a * c - b * b;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 + disc, tr / 2.0 - disc)
    }

    fn exchange() -> SymMatrix {
        SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], Symmetry::Strict).unwrap()
    }

    #[test]
    fn diagonal_split() {
        let s = eigendecompose(&SymMatrix::from_diagonal(&[2.0, -1.0])).unwrap();
        assert_eq!(s.eigenvalues, vec![2.0, -1.0]);
        assert_eq!(s.positive_part, SymMatrix::from_diagonal(&[2.0, 0.0]));
        assert_eq!(s.negative_part, SymMatrix::from_diagonal(&[0.0, 1.0]));
    }

    #[test]
    fn zero_matrix_split() {
        let s = eigendecompose(&SymMatrix::zeros(3)).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0; 3]);
        assert_eq!(s.positive_part, SymMatrix::zeros(3));
        assert_eq!(s.negative_part, SymMatrix::zeros(3));
        assert_eq!(ell(&SymMatrix::zeros(3)).unwrap(), 0.0);
        assert_eq!(normalized_ratio(&SymMatrix::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn exchange_matrix_against_characteristic_polynomial() {
        let (l1, l2) = char_poly_2x2(0.0, 1.0, 0.0);
        assert_eq!((l1, l2), (1.0, -1.0));
        let s = eigendecompose(&exchange()).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], l1, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eigenvalues[1], l2, epsilon = 1e-14);
        let expected = [[0.5, -0.5], [-0.5, 0.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(s.negative_part.get(i, j), expected[i][j], epsilon = 1e-14);
            }
        }
        assert_abs_diff_eq!(ell(&exchange()).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(nuclear_norm(&exchange()).unwrap(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(normalized_ratio(&exchange()).unwrap(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(negative_curvature(&exchange()).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn scalar_values() {
        assert_eq!(ell(&SymMatrix::scalar(-3.0)).unwrap(), 3.0);
        assert_eq!(normalized_ratio(&SymMatrix::scalar(-2.0)).unwrap(), 1.0);
        assert_eq!(normalized_ratio(&SymMatrix::scalar(5.0)).unwrap(), 0.0);
        assert_eq!(nuclear_norm(&SymMatrix::from_diagonal(&[2.0, -1.0])).unwrap(), 3.0);
    }

    #[test]
    fn cosine_hessian_at_origin_is_convex() {
        let q = SymMatrix::from_diagonal(&[0f64.cos(), 0f64.cos()]);
        assert_eq!(ell(&q).unwrap(), 0.0);
    }

    #[test]
    fn distance_of_negative_definite_diagonal() {
        assert_eq!(dist_to_psd(&SymMatrix::from_diagonal(&[-1.0, -3.0])).unwrap(), 4.0);
        assert_eq!(dist_to_psd(&SymMatrix::identity(4)).unwrap(), 0.0);
    }

    #[test]
    fn roundoff_eigenvalues_are_snapped() {
        let q = SymMatrix::from_diagonal(&[1.0, -1e-14]);
        assert_eq!(ell(&q).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_is_input_error() {
        // Construct through the raw path so the constructor check is bypassed.
        let mut q = SymMatrix::zeros(2);
        q.data_mut()[0] = f64::INFINITY;
        let err = eigendecompose(&q).unwrap_err();
        assert!(err.is_input());
    }

    fn sym_strategy(d: usize) -> impl Strategy<Value = SymMatrix> {
        proptest::collection::vec(-10.0..10.0f64, d * d)
            .prop_map(move |v| SymMatrix::from_row_major(d, v, Symmetry::Symmetrize).unwrap())
    }

    fn any_sym() -> impl Strategy<Value = SymMatrix> {
        (1usize..=6).prop_flat_map(sym_strategy)
    }

    proptest! {
        #[test]
        fn split_invariants(q in any_sym()) {
            let s = eigendecompose(&q).unwrap();
            let norm = q.frobenius_norm();
            prop_assert!(s.eigenvectors.orthogonality_defect() <= tolerances::ORTH);
            prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            let rec = &s.positive_part - &s.negative_part;
            prop_assert!(rec.max_abs_diff(&q) <= tolerances::reconstruction(norm));
            for part in [&s.positive_part, &s.negative_part] {
                let lmin = eigendecompose(part).unwrap().lambda_min();
                prop_assert!(lmin >= -tolerances::psd(norm));
            }
        }

        #[test]
        fn eigenvalues_match_nalgebra(q in any_sym()) {
            let d = q.dim();
            let m = nalgebra::DMatrix::from_row_slice(d, d, q.as_slice());
            let mut reference: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
            reference.sort_by(|a, b| b.total_cmp(a));
            let ours = eigendecompose(&q).unwrap().eigenvalues;
            for (a, b) in ours.iter().zip(&reference) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + q.frobenius_norm()));
            }
        }

        #[test]
        fn nuclear_is_ell_plus_ell_of_negation(q in any_sym()) {
            let total = nuclear_norm(&q).unwrap();
            let split = ell(&q).unwrap() + ell(&-&q).unwrap();
            prop_assert!((total - split).abs() <= 1e-9 * (1.0 + total));
        }

        #[test]
        fn ratio_in_unit_interval(q in any_sym()) {
            let r = normalized_ratio(&q).unwrap();
            prop_assert!((0.0..=1.0).contains(&r));
        }

        #[test]
        fn ell_subadditive((a, b) in (1usize..=5).prop_flat_map(|d| (sym_strategy(d), sym_strategy(d)))) {
            let lhs = ell(&(&a + &b)).unwrap();
            prop_assert!(lhs <= ell(&a).unwrap() + ell(&b).unwrap() + tolerances::LEMMA);
        }

        #[test]
        fn attained_at_positive_part(q in any_sym()) {
            let s = eigendecompose(&q).unwrap();
            let gap = nuclear_norm(&(&q - &s.positive_part)).unwrap();
            prop_assert!((gap - s.ell()).abs() <= 1e-10 * (1.0 + q.frobenius_norm()));
        }
    }
}
