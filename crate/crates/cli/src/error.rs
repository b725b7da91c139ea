use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const SINGULAR: i32 = 3;
    pub const INTERNAL: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] cqnc_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("malformed table: {0}")]
    Table(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use cqnc_core::Error as E;
        match self {
            CliError::Core(E::Singular { .. } | E::ZeroSignal { .. }) => exit::SINGULAR,
            CliError::Core(E::Config(_) | E::InvalidParams(_) | E::ModeMismatch(_)) => exit::USAGE,
            CliError::Core(_) => exit::INTERNAL,
            CliError::Usage(_) | CliError::Read { .. } => exit::USAGE,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) | CliError::Table(_) => exit::INTERNAL,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
