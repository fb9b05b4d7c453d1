use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unknown scheme `{name}` (valid: {valid})")]
    UnknownScheme { name: String, valid: String },

    #[error("CFL violation: dt = {dt:e} exceeds stability limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("non-finite value in cell {cell}")]
    NonFinite { cell: usize },

    #[error("solver aborted at step {step} (t = {time}): {source}")]
    StepFailed {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("tridiagonal solve produced non-finite values")]
    SingularSystem,

    #[error("incompatible data: {0}")]
    Incompatible(String),

    #[error("configuration error:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
