//! CLI error taxonomy with stable exit codes and a machine-parsable error
//! document on stderr.

use serde::Serialize;

/// Exit codes: 0 success, 2 usage, 3 data/schema, 4 fit failure.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("fit error: {0}")]
    Fit(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Fit(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Fit(_) => "fit",
        }
    }
}

impl From<squidmw_core::Error> for CliError {
    fn from(e: squidmw_core::Error) -> Self {
        use squidmw_core::Error as E;
        match e {
            E::Fit(_) | E::Solver(_) | E::Conditioning(_) => CliError::Fit(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(format!("i/o: {e}"))
    }
}

#[derive(Serialize)]
struct ErrorDocument<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    exit_code: i32,
}

/// Serialize the error as a JSON document for stderr.
pub fn error_document(err: &CliError) -> String {
    serde_json::to_string(&ErrorDocument {
        error: ErrorBody {
            kind: err.kind(),
            message: err.to_string(),
            exit_code: err.exit_code(),
        },
    })
    .unwrap_or_else(|_| format!("{{\"error\":{{\"message\":\"{err}\"}}}}"))
}

pub type Result<T> = std::result::Result<T, CliError>;
