//! Library side of the `qfisher` command-line tool: configuration, report
//! documents, and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod report;

use std::fmt;
use std::path::Path;

use serde::Serialize;

pub use config::AnalysisConfig;
pub use report::ReportDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Parse,
    Validation,
    Numerical,
    DimensionCap,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Parse => 2,
            ErrorKind::Validation => 3,
            ErrorKind::Numerical => 4,
            ErrorKind::DimensionCap => 5,
        }
    }
}

/// Machine-readable failure, printed as JSON on stderr.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into(), path: None }
    }

    pub fn parse(path: &Path, err: impl fmt::Display) -> Self {
        Self::new(ErrorKind::Parse, err.to_string()).at(path)
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::new(ErrorKind::Parse, format!("cannot read file: {err}")).at(path)
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Validation, message)
    }

    pub fn at(mut self, path: &Path) -> Self {
        self.path = Some(path.display().to_string());
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.path {
            Some(p) => write!(f, "{p}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qfisher::Error> for CliError {
    fn from(e: qfisher::Error) -> Self {
        use qfisher::Error as E;
        let kind = match &e {
            E::DimensionCap { .. } => ErrorKind::DimensionCap,
            E::Numerical(_) | E::NonFinite => ErrorKind::Numerical,
            _ => ErrorKind::Validation,
        };
        CliError::new(kind, e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
