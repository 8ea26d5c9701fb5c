use std::path::PathBuf;

use socnet::society::ConfigError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("unsupported config extension for {0}; expected .toml or .json")]
    Format(PathBuf),
    #[error(transparent)]
    Invalid(#[from] ConfigError),
    #[error("invalid preset {name}: {message}")]
    Preset { name: String, message: String },
    #[error("unknown preset {0:?}; run `socnet-sim list` for the available names")]
    UnknownPreset(String),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

impl HarnessError {
    /// Errors caused by bad user input rather than by the run itself.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            HarnessError::Read { .. }
                | HarnessError::Parse { .. }
                | HarnessError::Format(_)
                | HarnessError::Invalid(_)
                | HarnessError::Preset { .. }
                | HarnessError::UnknownPreset(_)
        )
    }
}
