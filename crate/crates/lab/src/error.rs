use std::path::PathBuf;

use moyal_core::Error as CoreError;

/// Failure classes of a run. Each maps to one process exit code.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid config: `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("numerical failure in {engine}: {detail}")]
    Numerical { engine: String, detail: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type LabResult<T> = Result<T, LabError>;

impl LabError {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 validation, 2 numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation { .. } => 1,
            Self::Numerical { .. } => 2,
            Self::Io { .. } => 3,
        }
    }

    /// Classifies a core error raised while setting up or running `context`.
    /// Setup errors carry the config field they came from where the core
    /// error does not name one itself.
    pub fn from_core(err: CoreError, context: &str) -> Self {
        match err {
            CoreError::NumericalBlowup { .. } | CoreError::TangentRange { .. } => Self::Numerical {
                engine: context.to_string(),
                detail: err.to_string(),
            },
            CoreError::InvalidParameter { name, ref reason } => {
                Self::validation(format!("{context}.{name}"), reason.clone())
            }
            CoreError::Resolvability { .. } => Self::validation("grid", err.to_string()),
            CoreError::GridSize { axis, .. } => Self::validation(format!("grid.{axis}"), err.to_string()),
            CoreError::InvertedBounds { axis, .. } => Self::validation(format!("grid.{axis}_min"), err.to_string()),
            CoreError::Courant { .. } => Self::validation("time.dt", err.to_string()),
            CoreError::StateTooWide(_) => Self::validation("initial_state", err.to_string()),
            _ => Self::validation(context, err.to_string()),
        }
    }
}
