use thiserror::Error;

/// Errors produced anywhere in the scoring and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("infeasible marginals: {0}")]
    InfeasibleMarginals(String),

    #[error("exact solver did not terminate within {pivots} pivots")]
    SolverFailure { pivots: usize },

    #[error("sinkhorn did not converge after {iterations} iterations (marginal error {marginal_error:e})")]
    NonConvergence { iterations: usize, marginal_error: f64 },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty measure")]
    EmptyMeasure,

    #[error("empty text: {0}")]
    EmptyText(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("every text-level row is degenerate")]
    AllRowsDegenerate,

    #[error("incomplete grid: missing (text_id, system_id) cells {}", format_cells(.missing))]
    IncompleteGrid { missing: Vec<(String, String)> },

    #[error("missing scores for (text_id, system_id) cells {}", format_cells(.missing))]
    MissingScores { missing: Vec<(String, String)> },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error at line {line}{}: {message}", record.as_ref().map(|r| format!(" (record {r})")).unwrap_or_default())]
    Schema {
        line: usize,
        record: Option<String>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_cells(cells: &[(String, String)]) -> String {
    cells
        .iter()
        .map(|(t, s)| format!("({t}, {s})"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
