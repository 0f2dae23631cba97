use std::fmt;

use thiserror::Error;

use crate::solver::DivergenceNote;

/// A single validation finding, located either by a JSON path or by a
/// line/column position in the source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub location: Location,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Location {
    /// JSON-pointer style path such as `/time_partition/2`.
    Path(String),
    /// 1-based line and column in the document text.
    Text { line: usize, column: usize },
}

impl Diagnostic {
    pub fn at_path(path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            location: Location::Path(path.into()),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Location::Path(p) if p.is_empty() => write!(f, "/: {}", self.message),
            Location::Path(p) => write!(f, "{}: {}", p, self.message),
            Location::Text { line, column } => {
                write!(f, "line {} column {}: {}", line, column, self.message)
            }
        }
    }
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("overflow in {context}: exponent {exponent} exceeds {limit} (k = {k})")]
    Overflow {
        context: String,
        k: usize,
        exponent: f64,
        limit: f64,
    },

    #[error("overflow computing (k*pi/l)^{n} for mode k = {k}")]
    PowerOverflow { k: usize, n: usize },

    #[error("mode {k} exceeds the mode cap {cap}")]
    ModeCap { k: usize, cap: usize },

    #[error("out of domain: {0}")]
    Domain(String),

    #[error("value unavailable: cell ({}, {}) overflowed at mode {}", .0.cell.0, .0.cell.1, .0.k)]
    Unavailable(DivergenceNote),

    #[error("syntax error at line {line} column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{} validation error(s): {}", .0.len(), join_diagnostics(.0))]
    Validation(Vec<Diagnostic>),

    #[error("finite-difference oracle supports order <= 2, got {0}")]
    UnsupportedOrder(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
