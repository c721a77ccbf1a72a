use std::path::PathBuf;

use pvnls_core::{Error, ErrorCategory};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config line {line}{}: {message}", field.as_ref().map(|f| format!(", field `{f}`")).unwrap_or_default())]
    Parse {
        line: usize,
        field: Option<String>,
        message: String,
    },
    #[error("[{section}] {source}")]
    Validation {
        section: &'static str,
        #[source]
        source: Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{failed} of {total} verification checks failed")]
    VerifyFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Io { .. } => 2,
            CliError::Validation { source, .. } | CliError::Core(source) => match source.category() {
                ErrorCategory::Config => 2,
                ErrorCategory::Numerical => 3,
                ErrorCategory::Infeasible => 4,
                ErrorCategory::BlowUp => 5,
            },
            CliError::VerifyFailed { .. } => 3,
        }
    }
}

pub(crate) fn invalid(section: &'static str) -> impl FnOnce(Error) -> CliError {
    move |source| CliError::Validation { section, source }
}
