use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    EmptyInput(String),
    #[error("invalid split fraction {fraction}: {reason}")]
    InvalidSplit { fraction: f64, reason: String },
    #[error("requested {requested} auxiliary samples but only {available} are available")]
    AuxiliaryPoolExceeded { requested: usize, available: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value in {location}")]
    NonFinite { location: String },
    #[error("training diverged (non-finite loss) at epoch {epoch}, step {step}")]
    Divergence { epoch: usize, step: usize },
    #[error("threshold sweep needs both classes: {0}")]
    SingleClass(String),
    #[error("token id {id} out of range for vocabulary of size {vocab_size}")]
    TokenIdRange { id: usize, vocab_size: usize },
    #[error("model bundle error: {0}")]
    Bundle(String),
    #[error("unsupported bundle format version {found}, this build supports {supported}")]
    BundleVersion { found: u32, supported: u32 },
    #[error("bundle checksum mismatch: header says {expected}, payload hashes to {actual}")]
    ChecksumMismatch { expected: String, actual: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    PlainIo(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
