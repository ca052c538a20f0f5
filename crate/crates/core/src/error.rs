use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    Shape { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("function undefined at eigenvalue {eigenvalue}")]
    Domain { eigenvalue: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("tensor dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("unsupported classical table: {0}")]
    UnsupportedTable(String),

    #[error("enumeration of {points} sample points exceeds cap {cap}")]
    EnumerationCap { points: u128, cap: u128 },

    #[error("unknown property `{0}`")]
    UnknownProperty(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn numerical(message: impl Into<String>, residual: f64) -> Self {
        Error::Numerical {
            message: message.into(),
            residual,
        }
    }

    /// True for failures of the floating-point machinery rather than of the caller.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. } | Error::Domain { .. })
    }
}
