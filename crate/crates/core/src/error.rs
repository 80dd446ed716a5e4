use thiserror::Error;

use crate::ir::Diagnostic;

#[derive(Debug, Error)]
pub enum IrError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("statement {index} out of range (program has {len})")]
    OutOfRange { index: usize, len: usize },
    #[error("statement {index} is not a control block")]
    NotControl { index: usize },
    #[error("invalid program: {}", join(.0))]
    Invalid(Vec<Diagnostic>),
}

fn join(diags: &[Diagnostic]) -> String {
    diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("line {line}: unsupported construct: {what}")]
    Unsupported { line: usize, what: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("IR statement {index} has no source mapping")]
    Unmapped { index: usize },
}

impl FrontendError {
    /// Source line of the problem; 0 when not tied to a line.
    pub fn line(&self) -> usize {
        match self {
            FrontendError::Unsupported { line, .. } | FrontendError::Syntax { line, .. } => *line,
            FrontendError::Unmapped { .. } => 0,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("no edge {0} -> {1}")]
    NoSuchEdge(usize, usize),
    #[error("no vertex {0}")]
    NoSuchVertex(usize),
    #[error("label {label} is not an endpoint of edge {edge:?}")]
    BadLabel { edge: (usize, usize), label: usize },
    #[error("merging {0} and {1} would give the vertex two control parents")]
    TwoControlParents(usize, usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no vertex {0}")]
    NoSuchVertex(usize),
    #[error("vertex {0} is not a primary control vertex")]
    NotPrimary(usize),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("{name} threshold must lie in (0, 1], got {value}")]
    Threshold { name: &'static str, value: f64 },
    #[error(transparent)]
    Ir(#[from] IrError),
}
