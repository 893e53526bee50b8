use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("CFL violation: dt*sqrt(n)/dx = {ratio:.4} exceeds {limit}")]
    Cfl { ratio: f64, limit: f64 },

    #[error("quadrature did not converge on [{a}, {b}] (estimated error {error:e}); worst point {worst}")]
    Quadrature { a: f64, b: f64, error: f64, worst: String },

    #[error("solution blew up at t = {time}: norm grew by a factor {growth:e}")]
    BlowUp { time: f64, growth: f64 },

    #[error("unresolved carrier: {points_per_wavelength:.2} points per wavelength, need at least {required}")]
    Unresolved { points_per_wavelength: f64, required: f64 },

    #[error("configuration is not reducible to an X-ray transform: {0}")]
    Unreduced(String),

    #[error("field {field}: {message}")]
    Config { field: String, message: String },

    #[error("unknown catalog key `{0}`")]
    UnknownKey(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
