//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("rank-deficient matrix: numerical rank {rank} < {cols} columns")]
    RankDeficient { rank: usize, cols: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Solver hit the iteration cap. Carries the best iterate and its
    /// duality gap so callers can still inspect the near-solution.
    #[error("solver did not converge in {iterations} iterations (dual gap {gap:.3e})")]
    NonConvergence {
        iterations: usize,
        gap: f64,
        best: Vec<f64>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("internal consistency: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable discriminant, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Dimension(_) => "dimension",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::Degenerate(_) => "degenerate",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Precondition(_) => "precondition",
            Error::UnsupportedRegime(_) => "unsupported_regime",
            Error::Budget(_) => "budget",
            Error::Internal(_) => "internal",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
