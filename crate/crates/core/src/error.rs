use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the index computations.
///
/// Variants split into two families: input errors (bad arguments, unknown
/// names, dimension mismatches) and numerical failures (solver
/// non-convergence, empty sample sets). [`Error::is_input`] tells them apart.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown function family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameters for `{family}`: {reason}")]
    InvalidParams { family: String, reason: String },

    #[error("point {point:?} with margin {margin} leaves the domain")]
    Domain { point: Vec<f64>, margin: f64 },

    #[error("matrix is not orthogonal: max deviation {deviation:e}")]
    NotOrthogonal { deviation: f64 },

    #[error("empty hull")]
    EmptyHull,

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off_diagonal:e})")]
    EigenNonConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("sampling failed: {drawn} points drawn, {differentiable} twice-differentiable, no vertices retained")]
    SamplingFailure { drawn: usize, differentiable: usize },

    #[error("integration failed: {0}")]
    Integration(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// True for errors caused by the caller's arguments rather than by
    /// numerical breakdown.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::Input(_)
                | Error::DimensionMismatch { .. }
                | Error::UnknownFamily(_)
                | Error::InvalidParams { .. }
                | Error::Domain { .. }
                | Error::NotOrthogonal { .. }
                | Error::EmptyHull
        )
    }
}
