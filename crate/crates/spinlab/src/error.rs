use std::path::PathBuf;

use spinlab_core::Error as CoreError;

/// Everything that can end a run. Each variant maps to one exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config line {line}: {reason}")]
    Syntax { line: usize, reason: String },

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("invalid value for `{key}`: {reason}")]
    Value { key: String, reason: String },

    #[error("{0}")]
    Invalid(CoreError),

    #[error("{0}")]
    Numerical(CoreError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Data { path: String, reason: String },

    #[error("reproduction mismatch: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn config(key: &str, reason: impl Into<String>) -> Self {
        CliError::Config {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub fn value(key: &str, reason: impl Into<String>) -> Self {
        CliError::Value {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 usage or config syntax, 2 parameter validation, 3 file IO or
    /// malformed input data, 4 numerical failure, 5 reproduction mismatch.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Syntax { .. } | CliError::Config { .. } => 1,
            CliError::Value { .. } | CliError::Invalid(_) => 2,
            CliError::Io { .. } | CliError::Data { .. } => 3,
            CliError::Numerical(_) => 4,
            CliError::Mismatch(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Syntax { .. } | CliError::Config { .. } => "config",
            CliError::Value { .. } | CliError::Invalid(_) => "invalid",
            CliError::Io { .. } => "io",
            CliError::Data { .. } => "data",
            CliError::Numerical(_) => "numerical",
            CliError::Mismatch(_) => "mismatch",
        }
    }

    /// `error kind=<kind> code=<n>: <message>` on one line.
    pub fn one_line(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error kind={} code={}: {}", self.kind(), self.exit_code(), msg)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::DimensionMismatch { .. }
            | CoreError::SiteOutOfRange { .. }
            | CoreError::InvalidParameter { .. }
            | CoreError::InvalidDistribution(_)
            | CoreError::Domain(_)
            | CoreError::IllMatchedTransition { .. } => CliError::Invalid(e),
            CoreError::NotHermitian { .. }
            | CoreError::NoConvergence { .. }
            | CoreError::NoBracket { .. }
            | CoreError::StepUnderflow { .. }
            | CoreError::InsufficientData(_)
            | CoreError::Degenerate(_)
            | CoreError::FitFailed { .. } => CliError::Numerical(e),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
