//! Dense small matrices: the symmetric carrier of Hessian data and a plain
//! square matrix used for orthogonal changes of variables.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a constructor treats input that is not exactly symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Symmetry {
    /// Replace `A` with `(A + Aᵀ)/2`.
    #[default]
    Symmetrize,
    /// Reject any entry pair with `a[i][j] != a[j][i]`.
    Strict,
}

/// Dense real symmetric `d × d` matrix, stored row-major.
///
/// Symmetry is exact: `get(i, j) == get(j, i)` bit for bit. All entries are
/// finite.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn scalar(q: f64) -> Self {
        SymMatrix {
            dim: 1,
            data: vec![q],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = v;
        }
        m
    }

    /// Builds from row-major data, applying `mode` to asymmetric input.
    pub fn from_row_major(dim: usize, data: Vec<f64>, mode: Symmetry) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("matrix dimension must be positive"));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite matrix entry {bad}")));
        }
        let mut m = SymMatrix { dim, data };
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (a, b) = (m.data[i * dim + j], m.data[j * dim + i]);
                if a != b {
                    match mode {
                        Symmetry::Strict => {
                            return Err(Error::input(format!(
                                "asymmetric entries ({i},{j})={a} vs ({j},{i})={b}"
                            )))
                        }
                        Symmetry::Symmetrize => {
                            let avg = 0.5 * (a + b);
                            m.data[i * dim + j] = avg;
                            m.data[j * dim + i] = avg;
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>], mode: Symmetry) -> Result<Self> {
        let dim = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: r.len(),
            });
        }
        Self::from_row_major(dim, rows.concat(), mode)
    }

    /// Rank-one matrix `s · u uᵀ`.
    pub fn outer(u: &[f64], s: f64) -> Self {
        let d = u.len();
        let mut m = Self::zeros(d);
        for i in 0..d {
            for j in i..d {
                let v = s * u[i] * u[j];
                m.data[i * d + j] = v;
                m.data[j * d + i] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Frobenius inner product `tr(A B)`.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_distance(&self, other: &SymMatrix) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Quadratic form `vᵀ Q v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            let row = &self.data[i * d..(i + 1) * d];
            acc += v[i] * row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        }
        acc
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Orthogonal congruence `Uᵀ Q U`.
    pub fn congruence(&self, u: &SquareMatrix) -> SymMatrix {
        let d = self.dim;
        debug_assert_eq!(d, u.dim());
        // T = Q U
        let mut t = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                t[i * d + j] = (0..d).map(|k| self.get(i, k) * u.get(k, j)).sum();
            }
        }
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in i..d {
                let v: f64 = (0..d).map(|k| u.get(k, i) * t[k * d + j]).sum();
                out.data[i * d + j] = v;
                out.data[j * d + i] = v;
            }
        }
        out
    }

    /// Linear combination `Σ wᵢ Mᵢ`. Panics on an empty or ragged list.
    pub fn combination(mats: &[SymMatrix], weights: &[f64]) -> SymMatrix {
        assert!(!mats.is_empty() && mats.len() == weights.len());
        let mut out = Self::zeros(mats[0].dim);
        for (m, &w) in mats.iter().zip(weights) {
            if w != 0.0 {
                for (o, v) in out.data.iter_mut().zip(&m.data) {
                    *o += w * v;
                }
            }
        }
        out
    }

    #[cfg(test)]
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.dim)).finish()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymMatrix::from_rows(&rows, Symmetry::Symmetrize)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.rows()
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;

    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix sum");
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;

    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix difference");
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;

    fn mul(self, s: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }
}

impl Neg for &SymMatrix {
    type Output = SymMatrix;

    fn neg(self) -> SymMatrix {
        self * -1.0
    }
}

/// Dense square matrix, row-major. Used for eigenvector bases and
/// orthogonal changes of variables.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        SquareMatrix { dim, data }
    }

    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("non-finite matrix entry"));
        }
        Ok(SquareMatrix { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: r.len(),
            });
        }
        Self::from_row_major(dim, rows.concat())
    }

    /// Plane rotation by `angle` in coordinates `(i, j)`.
    pub fn givens(dim: usize, i: usize, j: usize, angle: f64) -> Self {
        let mut m = Self::identity(dim);
        let (s, c) = angle.sin_cos();
        m.data[i * dim + i] = c;
        m.data[j * dim + j] = c;
        m.data[i * dim + j] = -s;
        m.data[j * dim + i] = s;
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, j)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> SquareMatrix {
        let d = self.dim;
        let mut out = self.clone();
        for i in 0..d {
            for j in 0..d {
                out.data[i * d + j] = self.get(j, i);
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &SquareMatrix) -> SquareMatrix {
        let d = self.dim;
        assert_eq!(d, rhs.dim);
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                data[i * d + j] = (0..d).map(|k| self.get(i, k) * rhs.get(k, j)).sum();
            }
        }
        SquareMatrix { dim: d, data }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Uᵀ v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.get(i, j) * v[i]).sum())
            .collect()
    }

    /// Max-entry deviation of `U Uᵀ` from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = (0..d).map(|k| self.get(i, k) * self.get(j, k)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.dim)).finish()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SquareMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SquareMatrix::from_rows(&rows)
    }
}

impl From<SquareMatrix> for Vec<Vec<f64>> {
    fn from(m: SquareMatrix) -> Self {
        m.rows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrize_averages_off_diagonal() {
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![4.0, 5.0]], Symmetry::Symmetrize).unwrap();
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 3.0);
    }

    #[test]
    fn strict_rejects_asymmetry() {
        let err = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 5.0]], Symmetry::Strict);
        assert!(matches!(err, Err(Error::Input(_))));
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 5.0]], Symmetry::Strict).is_ok());
    }

    #[test]
    fn rejects_non_finite_and_ragged() {
        assert!(SymMatrix::from_row_major(1, vec![f64::NAN], Symmetry::Symmetrize).is_err());
        assert!(SymMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]], Symmetry::Symmetrize).is_err());
    }

    #[test]
    fn congruence_by_swap_permutes_diagonal() {
        let q = SymMatrix::from_diagonal(&[1.0, -2.0]);
        let u = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(q.congruence(&u), SymMatrix::from_diagonal(&[-2.0, 1.0]));
    }

    #[test]
    fn givens_is_orthogonal() {
        let u = SquareMatrix::givens(3, 0, 2, 0.7);
        assert!(u.orthogonality_defect() < 1e-15);
    }

    #[test]
    fn serde_uses_nested_rows() {
        let m = SymMatrix::from_diagonal(&[1.0, 2.0]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[1.0,0.0],[0.0,2.0]]");
        let back: SymMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
