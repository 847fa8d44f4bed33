use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unsupported dimension {0}; supported dimensions are 1, 2 and 3")]
    UnsupportedDimension(usize),

    #[error("density {0} is not admissible: ∫(1 ∧ |ξ|²) f(ξ) dξ diverges on the grid")]
    Inadmissible(String),

    #[error("no valid domination certificate for {0}")]
    NotCertified(String),

    #[error("duplicate spatial point at index {first} and {second}")]
    DuplicatePoint { first: usize, second: usize },

    #[error("imaginary residual {imag:e} exceeds tolerance for real part {real:e}")]
    ImaginaryResidual { real: f64, imag: f64 },

    #[error("covariance matrix is indefinite: factorisation failed with jitter {jitter:e}")]
    Indefinite { jitter: f64 },

    #[error("grid mismatch: expected {expected} values, got {actual}")]
    GridMismatch { expected: usize, actual: usize },

    #[error("grid too coarse: {points} points, need at least {required}")]
    GridTooCoarse { points: usize, required: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
