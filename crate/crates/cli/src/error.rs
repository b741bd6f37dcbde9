use std::path::PathBuf;

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{message}")]
    Validation { code: &'static str, message: String },

    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("cannot write {}: {message}", path.display())]
    Write { path: PathBuf, message: String },

    #[error(transparent)]
    Compute(#[from] janus_core::Error),
}

impl CliError {
    pub fn validation(code: &'static str, message: impl Into<String>) -> Self {
        Self::Validation {
            code,
            message: message.into(),
        }
    }

    pub fn write(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Self::Write {
            path: path.into(),
            message: err.to_string(),
        }
    }

    /// Machine-readable code such as `validation.kappa`.
    pub fn code(&self) -> &'static str {
        use janus_core::Error as E;
        match self {
            Self::Validation { code, .. } => code,
            Self::Read { .. } => "config.read",
            Self::Parse { .. } => "config.parse",
            Self::Write { .. } => "io.write",
            Self::Compute(e) => match e {
                E::StepUnderflow { .. } => "compute.step_underflow",
                E::NotConverged { .. } => "compute.not_converged",
                E::DegenerateNullSpace { .. } => "compute.degenerate_null_space",
                E::NoNullVector { .. } => "compute.no_null_vector",
                E::BandTooWide { .. } | E::DenseTooLarge { .. } | E::DimensionOverflow { .. } => {
                    "compute.too_large"
                }
                E::TruncationLoss { .. } => "compute.truncation_loss",
                _ => "compute",
            },
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "code": self.code(), "message": self.to_string() } })
    }
}
