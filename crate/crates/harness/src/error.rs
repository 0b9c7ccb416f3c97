use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("unknown suite '{0}'; expected one of lemma5, lemma7, lemma8, thm1, thm2, thm3, thm4, phi_star")]
    UnknownSuite(String),
    #[error(transparent)]
    Model(#[from] corrarms::ModelError),
    #[error(transparent)]
    Objective(#[from] corrarms::objective::ObjectiveError),
    #[error(transparent)]
    Algorithm(#[from] corrarms::AlgorithmError),
    #[error(transparent)]
    Theory(#[from] corrarms::theory::TheoryError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
}

impl HarnessError {
    /// Process exit code: 1 validation, 3 I/O. Suite failures (2) are not
    /// errors and are mapped by the caller.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io { .. } | HarnessError::Csv(_) => 3,
            HarnessError::Model(corrarms::ModelError::Io(_)) => 3,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }
}
