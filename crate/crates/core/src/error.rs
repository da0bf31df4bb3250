use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    /// An invalid frame-structure or experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Vector or matrix dimensions that do not match the configuration.
    #[error("dimension mismatch: {what}: expected {expected}, got {actual}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A cyclic prefix that is not shorter than the transform size.
    #[error("cyclic prefix length {cp} must be smaller than the transform size {size}")]
    CyclicPrefix { cp: usize, size: usize },

    #[error("slot index {slot} out of range for Q = {q}")]
    Slot { slot: usize, q: usize },

    /// The requested INI block couples a numerology with itself.
    #[error("INI blocks are defined between different numerologies, got {0}")]
    SameNumerology(String),

    /// The assembled coupling matrix cannot be inverted reliably.
    #[error("coupling matrix is singular or ill-conditioned (condition estimate {condition:e}, limit {limit:e})")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dim(what: &'static str, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            what,
            expected,
            actual,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
