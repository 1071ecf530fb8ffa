use std::path::PathBuf;

use thiserror::Error;

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Malformed or invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Resource limits, truncated runs and I/O failures.
pub const EXIT_RESOURCE: i32 = 3;
/// A cross-check between two computations disagreed.
pub const EXIT_CONSISTENCY: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] brwlab_core::Error),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use brwlab_core::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(E::Address(_) | E::Config(_) | E::Domain(_)) => EXIT_CONFIG,
            CliError::Core(E::Consistency(_)) => EXIT_CONSISTENCY,
            CliError::Core(_) | CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => EXIT_RESOURCE,
        }
    }

    /// Short machine-readable name for the manifest.
    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_CONFIG => "config",
            EXIT_CONSISTENCY => "consistency",
            _ => "resource",
        }
    }
}
