use thiserror::Error;

/// Errors produced by the solvers, factorizations and file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("SVD failed to converge for a {rows}x{cols} matrix")]
    Factorization { rows: usize, cols: usize },

    #[error("{dim}x{dim} matrix is not symmetric positive definite (non-positive pivot)")]
    NotSpd { dim: usize },

    #[error("tridiagonal system is singular (zero pivot at row {row})")]
    SingularTridiagonal { row: usize },

    #[error("ill-conditioned constraint: {0}")]
    IllConditioned(String),

    #[error("tau root-finding did not reach tolerance (best tau {best_tau:e}, |g-1| = {defect:e})")]
    TauConvergence { best_tau: f64, defect: f64 },

    #[error("ill-posed problem: {0}")]
    IllPosed(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
