use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("formula: {0}")]
    Formula(String),
    #[error("{path}: {message}")]
    Data { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Eval(#[from] smoothspatial::logic::EvalError),
    #[error(transparent)]
    Optimize(#[from] smoothspatial::opt::OptError),
    #[error(transparent)]
    Learn(#[from] smoothspatial::learn::LearnError),
    #[error(transparent)]
    Spatial(#[from] smoothspatial::SpatialError),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn data(path: &Path, message: impl Into<String>) -> Self {
        CliError::Data { path: path.display().to_string(), message: message.into() }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data { path: "csv".into(), message: e.to_string() }
    }
}
