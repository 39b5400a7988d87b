use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = KscError> = std::result::Result<T, E>;

/// Errors raised anywhere in the clustering pipeline.
#[derive(Debug, Error)]
pub enum KscError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("negative histogram entry {value} at position {position} (chi-square kernel needs nonnegative inputs)")]
    NegativeHistogram { position: usize, value: f64 },

    #[error("index {index} out of range for {len} rows")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("disconnected/near-zero degree {value:e} at row {index}")]
    ZeroDegree { index: usize, value: f64 },

    #[error("linear algebra failure in {stage}: {detail}")]
    Linalg { stage: &'static str, detail: String },

    #[error("only {found} distinct sign patterns in the training scores, {requested} clusters requested")]
    TooFewPatterns { found: usize, requested: usize },

    #[error("instance too large for the dense oracle: {size} rows (limit {limit})")]
    GuardExceeded { size: usize, limit: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("malformed image: {0}")]
    Image(String),

    #[error("unsupported model version: {0}")]
    ModelVersion(String),

    #[error("malformed model file in section {section}: {message}")]
    ModelFormat { section: String, message: String },

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<KscError>,
    },
}

impl KscError {
    /// Short, stable identifier printed by the command-line tool so failures
    /// can be matched by scripts.
    pub fn class(&self) -> &'static str {
        match self {
            KscError::DimensionMismatch { .. } => "dimension",
            KscError::NegativeHistogram { .. } => "histogram",
            KscError::IndexOutOfRange { .. } => "index",
            KscError::InvalidParameter(_) => "parameter",
            KscError::NonFinite(_) => "non-finite",
            KscError::ZeroDegree { .. } => "degree",
            KscError::Linalg { .. } => "linalg",
            KscError::TooFewPatterns { .. } => "patterns",
            KscError::GuardExceeded { .. } => "guard",
            KscError::Io { .. } => "io",
            KscError::Parse { .. } => "parse",
            KscError::Image(_) => "image",
            KscError::ModelVersion(_) => "model-version",
            KscError::ModelFormat { .. } => "model-format",
            KscError::Stage { source, .. } => source.class(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        KscError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ KscError::Stage { .. } => e,
            e => KscError::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
