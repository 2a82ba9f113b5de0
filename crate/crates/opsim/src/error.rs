use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] opsim_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Validation-class failures map to exit code 1, everything else to 2.
    pub fn is_validation(&self) -> bool {
        use opsim_core::Error as E;
        match self {
            Error::Io { .. } | Error::Json { .. } | Error::Csv { .. } | Error::Config(_) => true,
            Error::Core(e) => !matches!(
                e,
                E::Infeasible(_) | E::SolverLimit(_) | E::Unbounded(_) | E::StateGap(_) | E::StaleState(_) | E::Io(_)
            ),
        }
    }
}
