use cbp_core::{Diagnostic, ProcessError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}", summary(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("cannot load seed repository: {0}")]
    Seed(String),
    #[error("deduction failed: {0}")]
    Deduction(String),
    #[error("assembly failed: {0}")]
    Assembly(String),
    #[error("unknown gateway `{0}`")]
    UnknownGateway(String),
    #[error("unsupported gateway type `{0}`")]
    UnsupportedType(String),
    #[error("{1}")]
    Incomplete(Vec<Diagnostic>, String),
    #[error("{0}")]
    Query(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Internal(String),
}

fn summary(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .find(|d| d.is_error())
        .map_or_else(|| "invalid input".to_string(), |d| d.message.clone())
}

impl Error {
    pub fn from_process(e: ProcessError) -> Self {
        match e {
            ProcessError::UnknownGateway(g) => Error::UnknownGateway(g),
            ProcessError::UnsupportedType(t) => Error::UnsupportedType(t),
            other => Error::Assembly(other.to_string()),
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "invalid-input",
            Error::Seed(_) => "seed-error",
            Error::Deduction(_) => "deduction-error",
            Error::Assembly(_) => "assembly-error",
            Error::UnknownGateway(_) => "unknown-gateway",
            Error::UnsupportedType(_) => "unsupported-gateway-type",
            Error::Incomplete(..) => "incomplete-process",
            Error::Query(_) => "query-error",
            Error::NotFound(_) => "not-found",
            Error::Conflict(_) => "wrong-status",
            Error::Io(_) => "io-error",
            Error::Internal(_) => "internal-error",
        }
    }

    /// Process exit status for the CLI. 2 is left to argument errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io(_) | Error::Internal(_) => 1,
            Error::Invalid(_) | Error::Seed(_) | Error::UnknownGateway(_) | Error::UnsupportedType(_) => 3,
            Error::Deduction(_) => 4,
            Error::Assembly(_) => 5,
            Error::Incomplete(..) => 6,
            Error::Query(_) => 7,
            Error::NotFound(_) | Error::Conflict(_) => 8,
        }
    }

    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        match self {
            Error::Invalid(d) | Error::Incomplete(d, _) => d.clone(),
            other => vec![Diagnostic::error(other.code(), other.to_string())],
        }
    }
}
