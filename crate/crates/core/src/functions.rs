//! Function oracles for `C^{1,1}` functions and the built-in families.
//!
//! An oracle exposes value and gradient everywhere, a classical Hessian where
//! the gradient is differentiable, and optionally the exact generalized
//! Hessian set as a vertex list. Built-ins:
//!
//! | family         | definition                                 |
//! |----------------|--------------------------------------------|
//! | `neg_cos_sum`  | `−cos x − cos y`                           |
//! | `pw_quad`      | `(a/2)t²` for `t ≥ 0`, `(b/2)t²` for `t < 0` |
//! | `kink`         | `−t² + ½ t|t|`, i.e. `pw_quad(−1, −3)`     |
//! | `mixed`        | `½ t|t|`, i.e. `pw_quad(1, −1)`            |
//! | `quadratic`    | `½ xᵀQx`                                   |
//! | `convex_smooth`| `Σ log(1 + e^{xᵢ})`                        |

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::hessian_set::HessianHull;
use crate::matrix::{SquareMatrix, SymMatrix, Symmetry};
use crate::spectral;
use crate::tolerances;

/// Affine hyperplane `{x : normal·x = offset}` across which an oracle's
/// Hessian may jump.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Evaluation contract for a `C^{1,1}` function on (a subset of) `ℝᵈ`.
pub trait FunctionOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Classical Hessian, present only where the gradient is differentiable.
    fn hessian_at(&self, _x: &[f64]) -> Option<SymMatrix> {
        None
    }

    /// Whether a classical Hessian exists at `x`. Defaults to `true`: the
    /// gradient of a `C^{1,1}` function is differentiable almost everywhere.
    fn is_twice_differentiable(&self, _x: &[f64]) -> bool {
        true
    }

    /// Closed-form generalized Hessian set at `x`, when known.
    fn exact_hessian_set(&self, _x: &[f64]) -> Option<HessianHull> {
        None
    }

    /// Bound on the gradient Lipschitz constant over the ball `B(center, radius)`.
    fn lipschitz_grad_bound(&self, _center: &[f64], _radius: f64) -> Option<f64> {
        None
    }

    /// Whether the closed ball `B(x, margin)` lies inside the domain.
    fn contains(&self, _x: &[f64], _margin: f64) -> bool {
        true
    }

    /// Hyperplanes carrying the Hessian discontinuities, when known.
    fn kinks(&self) -> Vec<Hyperplane> {
        Vec::new()
    }

    fn label(&self) -> String;
}

pub type Oracle = Arc<dyn FunctionOracle>;

impl fmt::Debug for dyn FunctionOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(d={})", self.label(), self.dim())
    }
}

/// `h(x) = −cos x − cos y`, optionally restricted to `(−a, a)²`.
#[derive(Debug, Clone)]
pub struct NegCosSum {
    pub half_width: Option<f64>,
}

impl FunctionOracle for NegCosSum {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> f64 {
        -x[0].cos() - x[1].cos()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0].sin(), x[1].sin()]
    }

    fn hessian_at(&self, x: &[f64]) -> Option<SymMatrix> {
        Some(SymMatrix::from_diagonal(&[x[0].cos(), x[1].cos()]))
    }

    fn exact_hessian_set(&self, x: &[f64]) -> Option<HessianHull> {
        HessianHull::exact(vec![self.hessian_at(x)?]).ok()
    }

    fn lipschitz_grad_bound(&self, _center: &[f64], _radius: f64) -> Option<f64> {
        Some(1.0)
    }

    fn contains(&self, x: &[f64], margin: f64) -> bool {
        match self.half_width {
            Some(a) => x.iter().all(|v| v.abs() + margin < a),
            None => true,
        }
    }

    fn label(&self) -> String {
        "neg_cos_sum".into()
    }
}

/// One-dimensional piecewise quadratic: `(a/2)t²` for `t ≥ 0` and `(b/2)t²`
/// for `t < 0`. The derivative is continuous with `h'(0) = 0`.
#[derive(Debug, Clone)]
pub struct PiecewiseQuadratic1D {
    pub a: f64,
    pub b: f64,
    name: &'static str,
}

impl PiecewiseQuadratic1D {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        Self::named(a, b, "pw_quad")
    }

    fn named(a: f64, b: f64, name: &'static str) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParams {
                family: name.into(),
                reason: format!("curvatures must be finite, got a={a}, b={b}"),
            });
        }
        Ok(PiecewiseQuadratic1D { a, b, name })
    }

    /// `−t² + ½ t|t|`.
    pub fn kink() -> Self {
        PiecewiseQuadratic1D { a: -1.0, b: -3.0, name: "kink" }
    }

    /// `½ t|t|`.
    pub fn mixed() -> Self {
        PiecewiseQuadratic1D { a: 1.0, b: -1.0, name: "mixed" }
    }

    fn curvature(&self, t: f64) -> f64 {
        if t >= 0.0 {
            self.a
        } else {
            self.b
        }
    }
}

impl FunctionOracle for PiecewiseQuadratic1D {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.curvature(x[0]) * x[0] * x[0]
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        vec![self.curvature(x[0]) * x[0]]
    }

    fn hessian_at(&self, x: &[f64]) -> Option<SymMatrix> {
        self.is_twice_differentiable(x)
            .then(|| SymMatrix::scalar(self.curvature(x[0])))
    }

    fn is_twice_differentiable(&self, x: &[f64]) -> bool {
        x[0] != 0.0 || self.a == self.b
    }

    fn exact_hessian_set(&self, x: &[f64]) -> Option<HessianHull> {
        let vertices = if x[0] == 0.0 && self.a != self.b {
            vec![
                SymMatrix::scalar(self.a.min(self.b)),
                SymMatrix::scalar(self.a.max(self.b)),
            ]
        } else {
            vec![SymMatrix::scalar(self.curvature(x[0]))]
        };
        HessianHull::exact(vertices).ok()
    }

    fn lipschitz_grad_bound(&self, _center: &[f64], _radius: f64) -> Option<f64> {
        Some(self.a.abs().max(self.b.abs()))
    }

    fn kinks(&self) -> Vec<Hyperplane> {
        if self.a == self.b {
            Vec::new()
        } else {
            vec![Hyperplane { normal: vec![1.0], offset: 0.0 }]
        }
    }

    fn label(&self) -> String {
        if self.name == "pw_quad" {
            format!("pw_quad(a={}, b={})", self.a, self.b)
        } else {
            self.name.into()
        }
    }
}

/// `½ xᵀ Q x`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub q: SymMatrix,
}

impl FunctionOracle for Quadratic {
    fn dim(&self) -> usize {
        self.q.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.q.quad_form(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.q.mul_vec(x)
    }

    fn hessian_at(&self, _x: &[f64]) -> Option<SymMatrix> {
        Some(self.q.clone())
    }

    fn exact_hessian_set(&self, _x: &[f64]) -> Option<HessianHull> {
        HessianHull::exact(vec![self.q.clone()]).ok()
    }

    fn lipschitz_grad_bound(&self, _center: &[f64], _radius: f64) -> Option<f64> {
        spectral::spectral_norm(&self.q).ok()
    }

    fn label(&self) -> String {
        "quadratic".into()
    }
}

/// `Σ log(1 + e^{xᵢ})`: smooth, convex, Hessian bounded by ¼.
#[derive(Debug, Clone)]
pub struct ConvexSmooth {
    pub dim: usize,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl FunctionOracle for ConvexSmooth {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|&t| t.max(0.0) + (-t.abs()).exp().ln_1p()).sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&t| sigmoid(t)).collect()
    }

    fn hessian_at(&self, x: &[f64]) -> Option<SymMatrix> {
        let diag: Vec<f64> = x
            .iter()
            .map(|&t| {
                let s = sigmoid(t);
                s * (1.0 - s)
            })
            .collect();
        Some(SymMatrix::from_diagonal(&diag))
    }

    fn exact_hessian_set(&self, x: &[f64]) -> Option<HessianHull> {
        HessianHull::exact(vec![self.hessian_at(x)?]).ok()
    }

    fn lipschitz_grad_bound(&self, _center: &[f64], _radius: f64) -> Option<f64> {
        Some(0.25)
    }

    fn label(&self) -> String {
        "convex_smooth".into()
    }
}

/// Pointwise sum `f + g`.
///
/// No exact generalized Hessian is reported: the sum rule only yields the
/// inclusion `Hess(f+g; x) ⊂ Hess(f; x) + Hess(g; x)`.
#[derive(Debug, Clone)]
pub struct SumOracle {
    f: Oracle,
    g: Oracle,
}

impl FunctionOracle for SumOracle {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.f.value(x) + self.g.value(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.f.gradient(x);
        for (o, v) in out.iter_mut().zip(self.g.gradient(x)) {
            *o += v;
        }
        out
    }

    fn hessian_at(&self, x: &[f64]) -> Option<SymMatrix> {
        Some(&self.f.hessian_at(x)? + &self.g.hessian_at(x)?)
    }

    fn is_twice_differentiable(&self, x: &[f64]) -> bool {
        self.f.is_twice_differentiable(x) && self.g.is_twice_differentiable(x)
    }

    fn lipschitz_grad_bound(&self, center: &[f64], radius: f64) -> Option<f64> {
        Some(self.f.lipschitz_grad_bound(center, radius)? + self.g.lipschitz_grad_bound(center, radius)?)
    }

    fn contains(&self, x: &[f64], margin: f64) -> bool {
        self.f.contains(x, margin) && self.g.contains(x, margin)
    }

    fn kinks(&self) -> Vec<Hyperplane> {
        let mut k = self.f.kinks();
        for h in self.g.kinks() {
            if !k.contains(&h) {
                k.push(h);
            }
        }
        k
    }

    fn label(&self) -> String {
        format!("({} + {})", self.f.label(), self.g.label())
    }
}

/// `g(z) = h(U z)` for orthogonal `U`.
#[derive(Debug, Clone)]
pub struct Rotated {
    inner: Oracle,
    u: SquareMatrix,
}

impl FunctionOracle for Rotated {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, z: &[f64]) -> f64 {
        self.inner.value(&self.u.mul_vec(z))
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        self.u.tr_mul_vec(&self.inner.gradient(&self.u.mul_vec(z)))
    }

    fn hessian_at(&self, z: &[f64]) -> Option<SymMatrix> {
        Some(self.inner.hessian_at(&self.u.mul_vec(z))?.congruence(&self.u))
    }

    fn is_twice_differentiable(&self, z: &[f64]) -> bool {
        self.inner.is_twice_differentiable(&self.u.mul_vec(z))
    }

    fn exact_hessian_set(&self, z: &[f64]) -> Option<HessianHull> {
        let hull = self.inner.exact_hessian_set(&self.u.mul_vec(z))?;
        Some(hull.congruence(&self.u))
    }

    fn lipschitz_grad_bound(&self, center: &[f64], radius: f64) -> Option<f64> {
        self.inner.lipschitz_grad_bound(&self.u.mul_vec(center), radius)
    }

    fn contains(&self, z: &[f64], margin: f64) -> bool {
        self.inner.contains(&self.u.mul_vec(z), margin)
    }

    fn kinks(&self) -> Vec<Hyperplane> {
        // n·(Uz) = c  <=>  (Uᵀn)·z = c
        self.inner
            .kinks()
            .into_iter()
            .map(|h| Hyperplane {
                normal: self.u.tr_mul_vec(&h.normal),
                offset: h.offset,
            })
            .collect()
    }

    fn label(&self) -> String {
        format!("rotate({})", self.inner.label())
    }
}

/// `f(x) = h(uᵀx)` for a one-dimensional `h` and unit vector `u`.
/// The Hessian is `h''(uᵀx) · u uᵀ`.
#[derive(Debug, Clone)]
pub struct Embedded1D {
    inner: Oracle,
    u: Vec<f64>,
}

impl Embedded1D {
    fn project(&self, x: &[f64]) -> [f64; 1] {
        [self.u.iter().zip(x).map(|(a, b)| a * b).sum()]
    }
}

impl FunctionOracle for Embedded1D {
    fn dim(&self) -> usize {
        self.u.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(&self.project(x))
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let g = self.inner.gradient(&self.project(x))[0];
        self.u.iter().map(|ui| g * ui).collect()
    }

    fn hessian_at(&self, x: &[f64]) -> Option<SymMatrix> {
        let h = self.inner.hessian_at(&self.project(x))?.get(0, 0);
        Some(SymMatrix::outer(&self.u, h))
    }

    fn is_twice_differentiable(&self, x: &[f64]) -> bool {
        self.inner.is_twice_differentiable(&self.project(x))
    }

    fn exact_hessian_set(&self, x: &[f64]) -> Option<HessianHull> {
        let hull = self.inner.exact_hessian_set(&self.project(x))?;
        let vertices = hull
            .vertices
            .iter()
            .map(|v| SymMatrix::outer(&self.u, v.get(0, 0)))
            .collect();
        HessianHull::exact(vertices).ok()
    }

    fn lipschitz_grad_bound(&self, x: &[f64], radius: f64) -> Option<f64> {
        self.inner.lipschitz_grad_bound(&self.project(x), radius)
    }

    fn contains(&self, x: &[f64], margin: f64) -> bool {
        self.inner.contains(&self.project(x), margin)
    }

    fn kinks(&self) -> Vec<Hyperplane> {
        self.inner
            .kinks()
            .into_iter()
            .map(|h| Hyperplane {
                normal: self.u.iter().map(|ui| h.normal[0] * ui).collect(),
                offset: h.offset,
            })
            .collect()
    }

    fn label(&self) -> String {
        format!("embed({})", self.inner.label())
    }
}

/// `f + g`. Fails on a dimension mismatch.
pub fn compose_sum(f: Oracle, g: Oracle) -> Result<Oracle> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    Ok(Arc::new(SumOracle { f, g }))
}

/// `z ↦ h(U z)`. `U` must be orthogonal to within `1e−10`.
pub fn rotate(h: Oracle, u: SquareMatrix) -> Result<Oracle> {
    if u.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: u.dim(),
        });
    }
    let deviation = u.orthogonality_defect();
    if deviation > tolerances::ORTH {
        return Err(Error::NotOrthogonal { deviation });
    }
    Ok(Arc::new(Rotated { inner: h, u }))
}

/// `x ↦ h(uᵀx)` for one-dimensional `h`; `u` is normalized.
pub fn embed_1d(h: Oracle, u: &[f64]) -> Result<Oracle> {
    if h.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: h.dim() });
    }
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::input("embedding direction must be nonzero and finite"));
    }
    Ok(Arc::new(Embedded1D {
        inner: h,
        u: u.iter().map(|v| v / norm).collect(),
    }))
}

/// `h + (ρ/2)‖x‖²`.
pub fn quadratic_shift(h: Oracle, rho: f64) -> Result<Oracle> {
    let q = Quadratic {
        q: &SymMatrix::identity(h.dim()) * rho,
    };
    compose_sum(h, Arc::new(q))
}

/// Gradient-monotonicity convexity test along the segment `[p, q]`.
///
/// Samples `n` equally spaced points and checks
/// `⟨∇f(y) − ∇f(z), y − z⟩ ≥ −1e−8 ‖y − z‖²` for every pair.
pub fn check_convex_on_segment(f: &dyn FunctionOracle, p: &[f64], q: &[f64], n: usize) -> Result<bool> {
    if n < 2 {
        return Err(Error::input("segment convexity check needs at least 2 samples"));
    }
    for pt in [p, q] {
        if pt.len() != f.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                got: pt.len(),
            });
        }
        if !f.contains(pt, 0.0) {
            return Err(Error::Domain {
                point: pt.to_vec(),
                margin: 0.0,
            });
        }
    }
    let points: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect()
        })
        .collect();
    let grads: Vec<Vec<f64>> = points.iter().map(|y| f.gradient(y)).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut inner = 0.0;
            let mut sq = 0.0;
            for k in 0..f.dim() {
                let dy = points[i][k] - points[j][k];
                inner += (grads[i][k] - grads[j][k]) * dy;
                sq += dy * dy;
            }
            if inner < -tolerances::CONVEXITY * sq {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A built-in function family plus its parameters, as stored in config files:
/// `{"family": "pw_quad", "params": {"a": -1, "b": -3}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
}

impl FunctionSpec {
    pub fn new(family: impl Into<String>) -> Self {
        FunctionSpec {
            family: family.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }
}

pub const FAMILIES: &[&str] = &["neg_cos_sum", "pw_quad", "kink", "mixed", "quadratic", "convex_smooth"];

struct ParamReader<'a> {
    family: &'a str,
    params: &'a BTreeMap<String, Value>,
}

impl ParamReader<'_> {
    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidParams {
            family: self.family.into(),
            reason: reason.into(),
        }
    }

    fn allow(&self, keys: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(self.invalid(format!("unexpected parameter `{k}`"))),
            None => Ok(()),
        }
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(self.invalid(format!("`{key}` must be a finite number"))),
            },
        }
    }

    fn required(&self, key: &str) -> Result<f64> {
        self.number(key)?
            .ok_or_else(|| self.invalid(format!("missing parameter `{key}`")))
    }

    fn vector(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| v.as_f64().filter(|x| x.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .map(Some)
                .ok_or_else(|| self.invalid(format!("`{key}` must be a list of finite numbers"))),
            Some(_) => Err(self.invalid(format!("`{key}` must be a list"))),
        }
    }
}

/// Builds one of the [`FAMILIES`].
///
/// Parameters: `pw_quad` takes `a`, `b`; `neg_cos_sum` takes an optional
/// domain half-width `a`; `quadratic` takes `q` (a scalar, a matrix as nested
/// lists, or a scalar with `dim` for `q·I`) or `diag`; `convex_smooth` takes
/// `dim` (default 1).
pub fn make_builtin(spec: &FunctionSpec) -> Result<Oracle> {
    let p = ParamReader {
        family: &spec.family,
        params: &spec.params,
    };
    let oracle: Oracle = match spec.family.as_str() {
        "neg_cos_sum" => {
            p.allow(&["a"])?;
            let half_width = p.number("a")?;
            if half_width.is_some_and(|a| a <= 0.0) {
                return Err(p.invalid("half-width `a` must be positive"));
            }
            Arc::new(NegCosSum { half_width })
        }
        "pw_quad" => {
            p.allow(&["a", "b"])?;
            Arc::new(PiecewiseQuadratic1D::new(p.required("a")?, p.required("b")?)?)
        }
        "kink" => {
            p.allow(&[])?;
            Arc::new(PiecewiseQuadratic1D::kink())
        }
        "mixed" => {
            p.allow(&[])?;
            Arc::new(PiecewiseQuadratic1D::mixed())
        }
        "quadratic" => {
            p.allow(&["q", "diag", "dim"])?;
            let q = if let Some(diag) = p.vector("diag")? {
                if diag.is_empty() {
                    return Err(p.invalid("`diag` must be nonempty"));
                }
                SymMatrix::from_diagonal(&diag)
            } else {
                match spec.params.get("q") {
                    Some(Value::Array(_)) => {
                        let m: Vec<Vec<f64>> = serde_json::from_value(spec.params["q"].clone())
                            .map_err(|e| p.invalid(format!("`q` matrix: {e}")))?;
                        SymMatrix::from_rows(&m, Symmetry::Symmetrize).map_err(|e| p.invalid(e.to_string()))?
                    }
                    Some(_) => {
                        let q = p.required("q")?;
                        let dim = dim_param(&p)?.unwrap_or(1);
                        &SymMatrix::identity(dim) * q
                    }
                    None => return Err(p.invalid("need `q` or `diag`")),
                }
            };
            Arc::new(Quadratic { q })
        }
        "convex_smooth" => {
            p.allow(&["dim"])?;
            Arc::new(ConvexSmooth {
                dim: dim_param(&p)?.unwrap_or(1),
            })
        }
        other => return Err(Error::UnknownFamily(other.into())),
    };
    Ok(oracle)
}

fn dim_param(p: &ParamReader<'_>) -> Result<Option<usize>> {
    match p.number("dim")? {
        None => Ok(None),
        Some(d) if d >= 1.0 && d.fract() == 0.0 => Ok(Some(d as usize)),
        Some(d) => Err(p.invalid(format!("`dim` must be a positive integer, got {d}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn vertices_1d(h: &HessianHull) -> Vec<f64> {
        h.vertices.iter().map(|v| v.get(0, 0)).collect()
    }

    #[test]
    fn kink_and_mixed_exact_sets_at_origin() {
        let kink = make_builtin(&FunctionSpec::new("kink")).unwrap();
        assert_eq!(vertices_1d(&kink.exact_hessian_set(&[0.0]).unwrap()), vec![-3.0, -1.0]);
        let mixed = make_builtin(&FunctionSpec::new("mixed")).unwrap();
        assert_eq!(vertices_1d(&mixed.exact_hessian_set(&[0.0]).unwrap()), vec![-1.0, 1.0]);
    }

    #[test]
    fn kink_matches_closed_form() {
        let kink = PiecewiseQuadratic1D::kink();
        for t in [-2.0, -0.3, 0.0, 0.7, 1.5] {
            let closed = -t * t + 0.5 * t * f64::abs(t);
            assert_abs_diff_eq!(kink.value(&[t]), closed, epsilon = 1e-15);
        }
        let mixed = PiecewiseQuadratic1D::mixed();
        for t in [-2.0, -0.3, 0.0, 0.7] {
            assert_abs_diff_eq!(mixed.value(&[t]), 0.5 * t * t.abs(), epsilon = 1e-15);
        }
    }

    #[test]
    fn neg_cos_sum_is_singleton() {
        let f = make_builtin(&FunctionSpec::new("neg_cos_sum")).unwrap();
        let x = [0.4, -1.3];
        let h = f.exact_hessian_set(&x).unwrap();
        assert_eq!(h.vertices, vec![SymMatrix::from_diagonal(&[0.4f64.cos(), (-1.3f64).cos()])]);
    }

    #[test]
    fn pw_quad_is_continuous_at_origin() {
        let f = PiecewiseQuadratic1D::new(2.5, -4.0).unwrap();
        assert_eq!(f.gradient(&[0.0]), vec![0.0]);
        assert!(!f.is_twice_differentiable(&[0.0]));
        assert!(f.hessian_at(&[0.0]).is_none());
        assert_eq!(f.hessian_at(&[1e-300]).unwrap().get(0, 0), 2.5);
        assert_eq!(f.hessian_at(&[-1e-300]).unwrap().get(0, 0), -4.0);
        let equal = PiecewiseQuadratic1D::new(2.0, 2.0).unwrap();
        assert!(equal.is_twice_differentiable(&[0.0]));
        assert_eq!(equal.exact_hessian_set(&[0.0]).unwrap().vertices.len(), 1);
    }

    #[test]
    fn builtin_errors() {
        assert!(matches!(
            make_builtin(&FunctionSpec::new("max_type")),
            Err(Error::UnknownFamily(_))
        ));
        assert!(matches!(
            make_builtin(&FunctionSpec::new("pw_quad").with("a", 1.0)),
            Err(Error::InvalidParams { .. })
        ));
        assert!(matches!(
            make_builtin(&FunctionSpec::new("kink").with("a", 1.0)),
            Err(Error::InvalidParams { .. })
        ));
        assert!(PiecewiseQuadratic1D::new(f64::NAN, 1.0).is_err());
        assert!(make_builtin(&FunctionSpec::new("quadratic").with("q", "x")).is_err());
    }

    #[test]
    fn quadratic_param_forms() {
        let a = make_builtin(&FunctionSpec::new("quadratic").with("q", 1.0)).unwrap();
        assert_eq!(a.hessian_at(&[0.3]).unwrap(), SymMatrix::scalar(1.0));
        let b = make_builtin(&FunctionSpec::new("quadratic").with("diag", vec![1.0, -2.0])).unwrap();
        assert_eq!(b.hessian_at(&[0.0, 0.0]).unwrap(), SymMatrix::from_diagonal(&[1.0, -2.0]));
        let spec: FunctionSpec =
            serde_json::from_str(r#"{"family":"quadratic","params":{"q":[[0,1],[1,0]]}}"#).unwrap();
        let c = make_builtin(&spec).unwrap();
        assert_eq!(c.gradient(&[1.0, 2.0]), vec![2.0, 1.0]);
        let d = make_builtin(&FunctionSpec::new("quadratic").with("q", 3.0).with("dim", 3.0)).unwrap();
        assert_eq!(d.dim(), 3);
    }

    #[test]
    fn sum_of_quadratics_adds_hessians() {
        let q1 = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, -1.0]], Symmetry::Strict).unwrap();
        let q2 = SymMatrix::from_diagonal(&[0.5, 3.0]);
        let s = compose_sum(
            Arc::new(Quadratic { q: q1.clone() }),
            Arc::new(Quadratic { q: q2.clone() }),
        )
        .unwrap();
        assert_eq!(s.hessian_at(&[0.3, -0.2]).unwrap(), &q1 + &q2);
        assert!(s.exact_hessian_set(&[0.0, 0.0]).is_none());
    }

    #[test]
    fn sum_dimension_mismatch() {
        let err = compose_sum(
            Arc::new(PiecewiseQuadratic1D::kink()),
            Arc::new(NegCosSum { half_width: None }),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn sum_differentiability_is_conjunction() {
        let s = compose_sum(Arc::new(PiecewiseQuadratic1D::kink()), Arc::new(ConvexSmooth { dim: 1 })).unwrap();
        assert!(!s.is_twice_differentiable(&[0.0]));
        assert!(s.is_twice_differentiable(&[0.1]));
        assert!(s.hessian_at(&[0.0]).is_none());
    }

    #[test]
    fn rotate_identity_and_quarter_turn() {
        let f: Oracle = Arc::new(NegCosSum { half_width: None });
        let same = rotate(f.clone(), SquareMatrix::identity(2)).unwrap();
        let x = [0.3, -0.8];
        assert_eq!(same.value(&x), f.value(&x));
        assert_eq!(same.gradient(&x), f.gradient(&x));
        let quarter = rotate(f, SquareMatrix::givens(2, 0, 1, std::f64::consts::FRAC_PI_2)).unwrap();
        let h = quarter.hessian_at(&[0.0, 0.0]).unwrap();
        assert!(h.max_abs_diff(&SymMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn rotate_rejects_non_orthogonal() {
        let f: Oracle = Arc::new(NegCosSum { half_width: None });
        let u = SquareMatrix::from_rows(&[vec![1.0, 0.1], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(rotate(f, u), Err(Error::NotOrthogonal { .. })));
    }

    #[test]
    fn embedded_hessian_is_rank_one() {
        let f = embed_1d(Arc::new(PiecewiseQuadratic1D::kink()), &[3.0, 4.0]).unwrap();
        let h = f.hessian_at(&[1.0, 1.0]).unwrap();
        let u = [0.6, 0.8];
        assert!(h.max_abs_diff(&SymMatrix::outer(&u, -1.0)) < 1e-15);
        let set = f.exact_hessian_set(&[0.8, -0.6]).unwrap();
        assert_eq!(set.vertices.len(), 2);
        assert_eq!(f.kinks()[0].normal, vec![0.6, 0.8]);
    }

    #[test]
    fn convexity_checks() {
        let q: Oracle = Arc::new(Quadratic { q: SymMatrix::identity(2) });
        assert!(check_convex_on_segment(q.as_ref(), &[-1.0, 2.0], &[3.0, -1.0], 20).unwrap());
        let kink: Oracle = Arc::new(PiecewiseQuadratic1D::kink());
        assert!(!check_convex_on_segment(kink.as_ref(), &[-1.0], &[1.0], 100).unwrap());
        let shifted = quadratic_shift(kink, 3.0).unwrap();
        assert!(check_convex_on_segment(shifted.as_ref(), &[-1.0], &[1.0], 100).unwrap());
    }

    #[test]
    fn convexity_check_errors() {
        let kink: Oracle = Arc::new(PiecewiseQuadratic1D::kink());
        assert!(check_convex_on_segment(kink.as_ref(), &[-1.0], &[1.0], 1).is_err());
        let boxed: Oracle = Arc::new(NegCosSum { half_width: Some(1.0) });
        let err = check_convex_on_segment(boxed.as_ref(), &[0.0, 0.0], &[2.0, 0.0], 10).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn function_spec_json_shape() {
        let spec: FunctionSpec = serde_json::from_str(r#"{"family": "pw_quad", "params": {"a": -1, "b": -3}}"#).unwrap();
        let f = make_builtin(&spec).unwrap();
        assert_eq!(f.hessian_at(&[1.0]).unwrap().get(0, 0), -1.0);
        assert_eq!(f.hessian_at(&[-1.0]).unwrap().get(0, 0), -3.0);
    }
}
