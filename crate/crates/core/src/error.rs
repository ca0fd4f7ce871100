use thiserror::Error;

/// Errors surfaced by the solver and harness layers.
#[derive(Debug, Error)]
pub enum ShsError {
    #[error("field layout mismatch: expected {expected}, got {got}")]
    LayoutMismatch { expected: &'static str, got: &'static str },

    #[error("incompatible grids: {0}")]
    GridMismatch(String),

    #[error("lambda = {lambda} outside sector (eps = {eps}, gamma_b = {gamma_b})")]
    OutOfSector { lambda: num_complex::Complex64, eps: f64, gamma_b: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("input not solenoidal: max per-mode divergence {0:.3e}")]
    NonSolenoidal(f64),

    #[error("compatibility condition violated: {0:.3e}")]
    Compatibility(f64),

    #[error("Lagrangian smallness violated: sup |int grad u| = {0:.3}")]
    Smallness(f64),

    #[error("fixed-point iteration not contracting: factor {0:.3}")]
    NonContraction(f64),

    #[error("regularity index s = {s} outside admissible range ({lo}, {hi})")]
    IndexRange { s: f64, lo: f64, hi: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ShsError>;
