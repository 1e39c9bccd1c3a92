use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] morphdis_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{origin}:{line}: {reason}")]
    Format {
        origin: String,
        line: usize,
        reason: String,
    },
    /// A well-formed record that violates the schema or another contract.
    #[error("{origin}:{line}: {source}")]
    Data {
        origin: String,
        line: usize,
        source: morphdis_core::Error,
    },
    #[error("{origin}: format version {found} is newer than supported version {supported}")]
    Version {
        origin: String,
        found: u64,
        supported: u64,
    },
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        source: Box<Error>,
    },
    #[error("{0}")]
    Usage(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn internal(e: impl std::fmt::Display) -> Self {
        Error::Internal(e.to_string())
    }

    pub fn stage(stage: impl Into<String>) -> impl FnOnce(Error) -> Error {
        let stage = stage.into();
        move |e| Error::Stage {
            stage,
            source: Box::new(e),
        }
    }

    /// 1 for usage errors, 2 for bad input data, 3 for internal failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Usage(_) => 1,
            Error::Internal(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }

    /// The innermost error, skipping stage context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}
