use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix {0} is not unimodular (determinant {1})")]
    NotUnimodular(String, i64),

    #[error("lift `{label}` is not strictly increasing near x = {at}")]
    NotMonotone { label: String, at: f64 },

    #[error("lift `{label}` violates the period identity at {at:?} (defect {defect:e})")]
    PeriodDefect {
        label: String,
        at: [f64; 2],
        defect: f64,
    },

    #[error("linear part {0} is required to be the identity")]
    NonIdentityLinearPart(String),

    #[error("mismatched spaces: {0}")]
    SpaceMismatch(String),

    #[error("numerical inverse of `{label}` failed to converge at {at:?}")]
    InverseFailed { label: String, at: [f64; 2] },

    #[error("relation h f h^-1 = f^n violated: residual {residual:e} exceeds {threshold:e}")]
    RelationViolated { residual: f64, threshold: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("word parse error: {0}")]
    WordParse(String),

    #[error("integer overflow while {0}")]
    Overflow(&'static str),

    #[error("graph transform did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergent { iterations: usize, residual: f64 },

    #[error("image of the graph is not a graph over the fiber (fold near sample {0})")]
    GraphFold(usize),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
