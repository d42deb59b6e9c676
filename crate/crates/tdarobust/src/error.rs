use std::path::PathBuf;

use serde::Serialize;

/// Failure classes of the command-line front-end, each with its exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type AppResult<T> = Result<T, AppError>;

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

impl AppError {
    pub fn config(msg: impl Into<String>) -> Self {
        AppError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        AppError::Data(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Config(_) => "config",
            AppError::Data(_) | AppError::Io { .. } => "data",
            AppError::Numeric(_) => "numeric",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Data(_) | AppError::Io { .. } => 3,
            AppError::Numeric(_) => 4,
        }
    }

    /// One-line machine-readable description for stderr.
    pub fn to_json(&self) -> String {
        let report = ErrorReport {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        };
        serde_json::to_string(&report).expect("error report serializes")
    }
}

impl From<tdarobust_core::Error> for AppError {
    fn from(e: tdarobust_core::Error) -> Self {
        use tdarobust_core::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidParameter(_) | E::Unsupported(_) => AppError::Config(msg),
            E::DimensionMismatch { .. } | E::Empty(_) | E::DiagramMismatch(_) => AppError::Data(msg),
            E::DegenerateWeights | E::Numeric(_) => AppError::Numeric(msg),
        }
    }
}
