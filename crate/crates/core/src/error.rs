use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: missing column `{column}`", path.display())]
    Schema { path: PathBuf, column: String },
    #[error("{}: dataset is empty", path.display())]
    EmptyDataset { path: PathBuf },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("missing resource `{0}`")]
    MissingResource(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("backend error for prompt {prompt:?}: {message}")]
    Backend { prompt: String, message: String },
    #[error("retrieval failed: {0}")]
    Retrieval(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse error families, used by the command line to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Backend,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::MissingResource(_) => ErrorClass::Config,
            Error::Backend { .. } | Error::Retrieval(_) => ErrorClass::Backend,
            Error::Context { source, .. } => source.class(),
            _ => ErrorClass::Data,
        }
    }
}
