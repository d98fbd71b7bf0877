use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph constraint violated: {0}")]
    GraphConstraint(String),

    #[error("residual {residual:.3e} exceeds the convergence bound {bound:.3e}")]
    NotConverged { residual: f64, bound: f64 },

    #[error("linear algebra backend failure: {0}")]
    Backend(String),

    #[error("matrix is numerically rank deficient (smallest singular value {sigma_min:.3e})")]
    RankDeficient { sigma_min: f64 },

    #[error("matrix is not unitary: defect {defect:.3e} exceeds {tolerance:.3e}")]
    NotUnitary { defect: f64, tolerance: f64 },

    #[error("retry budget exhausted after {attempts} attempts: {context}")]
    RetriesExhausted { attempts: usize, context: String },

    #[error("integer overflow in {0}")]
    Overflow(String),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
}

impl Error {
    /// True when the error reflects bad caller input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NonSquare { .. }
                | Error::DimensionMismatch(_)
                | Error::NonFinite { .. }
                | Error::InvalidArgument(_)
                | Error::GraphConstraint(_)
                | Error::InsufficientSamples { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
