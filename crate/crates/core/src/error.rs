use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("capacity exceeded: {n} nodes (dense limit is {limit})")]
    Capacity { n: usize, limit: usize },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("eigensolver did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("spectral consistency: {spectral} eigenvalues at 1 but {components} components")]
    Consistency { spectral: usize, components: usize },

    #[error("undefined radius: convergence factor v = {v} >= 1")]
    UndefinedRadius { v: f64 },

    #[error("divergence at layer {layer}: entries exceed {limit:e}")]
    Divergence { layer: usize, limit: f64 },

    #[error("missing layer input: {0}")]
    MissingExtras(String),

    #[error("theorem check failed: {0}")]
    TheoremCheck(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
