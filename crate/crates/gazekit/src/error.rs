use std::path::{Path, PathBuf};

/// Process exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Usage = 1,
    InvalidData = 2,
    Runtime = 3,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{path}:{line}: {field}: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        field: String,
        message: String,
    },
    #[error("unknown corpus format {0:?} (known: unified-jsonl)")]
    UnknownFormat(String),
    #[error("{path}: {count} validation violation(s), first: {first}")]
    Invalid { path: PathBuf, count: usize, first: String },
    #[error("{0}")]
    Data(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Core(#[from] gazekit_core::Error),
    #[error("stage {stage} failed: {source}")]
    Stage { stage: String, source: Box<Error> },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
        move |source| Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn json(path: &Path) -> impl FnOnce(serde_json::Error) -> Error + '_ {
        move |source| Error::Json {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn csv(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
        move |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        use gazekit_core::Error as C;
        match self {
            Error::Usage(_) | Error::UnknownFormat(_) => ExitCode::Usage,
            Error::Record { .. } | Error::Invalid { .. } | Error::Data(_) | Error::Csv { .. } => ExitCode::InvalidData,
            Error::Core(
                C::InvalidCorpus(_)
                | C::EmptyCorpus
                | C::EmptyDataset
                | C::TooFewSentences { .. }
                | C::LengthMismatch(_)
                | C::UnsupportedLanguage(_),
            ) => ExitCode::InvalidData,
            Error::Core(C::InvalidConfig(_) | C::InvalidRatios(_) | C::InvalidFractions(_) | C::UnknownFeature(_)) => {
                ExitCode::Usage
            }
            Error::Stage { source, .. } => source.exit_code(),
            _ => ExitCode::Runtime,
        }
    }
}
