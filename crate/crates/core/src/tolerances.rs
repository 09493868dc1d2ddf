//! Numerical tolerances shared across the crate.
//!
//! Every threshold used by the library and by the verification suites lives
//! here. Norm-relative tolerances are exposed as functions of the Frobenius
//! norm of the matrix they apply to.

/// Orthogonality defect allowed for `U Uᵀ = I`.
pub const ORTH: f64 = 1e-10;

/// Slack for inequalities that hold exactly in real arithmetic
/// (lower bounds, subadditivity).
pub const LEMMA: f64 = 1e-8;

/// Nuclear norm at or below which a matrix counts as the zero matrix.
pub const FLAT: f64 = 1e-12;

/// Slack in the gradient-monotonicity convexity test, relative to `‖y−z‖²`.
pub const CONVEXITY: f64 = 1e-8;

/// Hausdorff slack between sampled and exact hull vertex sets.
pub const HULL: f64 = 1e-6;

/// Distance at or below which a matrix counts as a member of a hull.
pub const MEMBER: f64 = 1e-6;

/// Frank–Wolfe gap at which the lower-endpoint solver stops.
pub const OPT_GAP: f64 = 1e-8;

/// Iteration cap for the lower-endpoint solver.
pub const OPT_MAX_ITERS: usize = 10_000;

/// Slack for interval-index invariants (sandwich, invariance).
pub const INDEX: f64 = 1e-8;

/// Sampling slack when comparing random convex combinations to endpoints.
pub const INTERVAL_SAMPLING: f64 = 1e-3;

/// Slack for the upper-semicontinuity spot check.
pub const USC: f64 = 1e-6;

/// Random interior points used by the normalized-index search.
pub const N_DIRICHLET: usize = 512;

/// Jacobi stops when off-diagonal Frobenius mass drops below this fraction
/// of the matrix Frobenius norm.
pub const JACOBI_REL: f64 = 1e-12;

pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues within this band of zero are snapped to zero.
pub fn psd(frobenius: f64) -> f64 {
    1e-10 * (1.0 + frobenius)
}

/// Reconstruction tolerance for `Q⁺ − Q⁻ = Q` in the max-entry norm.
pub fn reconstruction(frobenius: f64) -> f64 {
    1e-10 * (1.0 + frobenius)
}
