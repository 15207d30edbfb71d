use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid or run parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called on a field in the wrong representation,
    /// or with mismatched grids.
    #[error("usage error: {0}")]
    Usage(String),

    /// A mathematical precondition failed; `residual` is the measured violation.
    #[error("precondition failed: {what} (measured residual {residual:.3e})")]
    Precondition { what: String, residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The grid is too coarse to represent the requested construction.
    #[error("resolution error: {what}; minimum n = {min_n}")]
    Resolution { what: String, min_n: usize },

    /// Time integration produced a state norm above the blowup threshold.
    #[error("numerical blowup at t = {time:.6e} (last valid time {last_valid_time:.6e})")]
    Blowup { time: f64, last_valid_time: f64 },

    #[error("malformed field header: {0}")]
    MalformedHeader(String),

    #[error("payload length mismatch: expected {expected} bytes, found {found}")]
    PayloadLength { expected: usize, found: usize },

    #[error("kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) | Error::Unsupported(_) | Error::Resolution { .. } => 2,
            Error::MalformedHeader(_) => 3,
            Error::PayloadLength { .. } => 4,
            Error::KindMismatch { .. } => 5,
            Error::Io(_) | Error::Json(_) => 6,
            Error::Precondition { .. } | Error::Blowup { .. } => 1,
        }
    }
}
