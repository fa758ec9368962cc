use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("region is empty")]
    EmptyRegion,

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid decomposition: {0}")]
    Decomposition(String),

    #[error("Hilbert space dimension {local_dim}^{sites} exceeds the budget of {budget}")]
    BudgetExceeded {
        local_dim: usize,
        sites: usize,
        budget: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown builtin model `{0}`")]
    UnknownModel(String),

    #[error("invalid interaction term: {0}")]
    InvalidTerm(String),

    #[error("not an orthogonal projection: {0}")]
    NotProjector(String),

    #[error("frustration-freeness violated: {0}")]
    NotFrustrationFree(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("eigensolver did not converge after {iterations} restarts (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("ambiguous kernel: eigenvalue {eigenvalue:.3e} lies in [tol/10, tol] with tol = {tol:.3e}; adjust the kernel tolerance")]
    AmbiguousKernel { eigenvalue: f64, tol: f64 },

    #[error("invalid split: {0}")]
    Split(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
