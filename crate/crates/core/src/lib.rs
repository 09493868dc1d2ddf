//! Interval-valued local nonconvexity indices for `C^{1,1}` functions.
//!
//! The pipeline is: a [`FunctionOracle`] is sampled near a point to estimate
//! its generalized Hessian set (a [`HessianHull`]), and the spectral
//! functional `ℓ(Q) = Σ max{0, −λᵢ(Q)}` is then bounded over that hull to
//! give a [`NonconvexityInterval`].

pub mod error;
pub mod functions;
pub mod hessian_set;
pub mod hull_index;
pub mod matrix;
pub mod smoothing;
pub mod spectral;
pub mod tolerances;
pub mod verify;

pub use error::{Error, Result};
pub use functions::{make_builtin, FunctionOracle, FunctionSpec, Oracle};
pub use hessian_set::{sample_hessian_set, HessianHull, SamplingConfig};
pub use hull_index::{compute_interval, interval_from_hull, NonconvexityInterval, SimplexWeights};
pub use matrix::{SquareMatrix, SymMatrix, Symmetry};
pub use smoothing::{mollification_membership_check, MollifierConfig};
pub use spectral::{eigendecompose, SpectralSplit};
