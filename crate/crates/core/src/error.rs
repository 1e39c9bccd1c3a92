use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid value {value:?} for feature {feature:?}")]
    Value { feature: String, value: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("no candidates to rank")]
    EmptyCandidates,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("normalization error: {0}")]
    Normalization(String),
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("no remap rule for {feature}={value:?} (pos {pos:?})")]
    Remap {
        pos: String,
        feature: String,
        value: String,
    },
    #[error("sequences differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("inconsistent metric: {0}")]
    InconsistentMetric(String),
}

impl Error {
    pub(crate) fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }

    pub(crate) fn value(feature: &str, value: &str) -> Self {
        Error::Value {
            feature: feature.into(),
            value: value.into(),
        }
    }
}
