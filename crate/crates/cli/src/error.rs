use std::fmt;

use blowuplab_core::Error as CoreError;

/// Failure classes, each tied to a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Tolerance,
    Resource,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Tolerance => 3,
            ErrorKind::Resource => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ErrorKind::Config => "config",
            ErrorKind::Tolerance => "tolerance",
            ErrorKind::Resource => "resource",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Config,
            message: msg.into(),
        }
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Resource,
            message: msg.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind.label(), self.message)
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let kind = match &e {
            CoreError::Config(_)
            | CoreError::Domain { .. }
            | CoreError::InsufficientData(_)
            | CoreError::Resolution(_) => ErrorKind::Config,
            CoreError::Accuracy { .. } | CoreError::Range { .. } => ErrorKind::Tolerance,
            CoreError::SearchExhausted(_) => ErrorKind::Resource,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::resource(format!("i/o: {e}"))
    }
}
