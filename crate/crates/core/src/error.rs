use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis mismatch: {left} vs {right}")]
    BasisMismatch { left: String, right: String },

    #[error("parse error in `{input}`: {message}")]
    Parse { input: String, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("operator {operator} is not certified continuous from {from} to {to}")]
    NotCertified { operator: String, from: String, to: String },

    #[error("defect defined only at regular points (lambda = {lambda}, c_low = {c_low:e})")]
    NotRegular { lambda: Complex64, c_low: f64 },

    #[error("lambda = {lambda} is not in the resolvent set of the pair ({from}, {to}): {status}")]
    NotInResolvent { lambda: Complex64, from: String, to: String, status: String },

    #[error("outside Neumann radius: |lambda - lambda0| = {distance:e} >= {radius:e}")]
    OutsideNeumannRadius { distance: f64, radius: f64 },

    #[error("lambda = {lambda} is an eigenvalue of S_alpha (alpha = {alpha})")]
    MomentumEigenvalue { lambda: Complex64, alpha: Complex64 },

    #[error("no bound state: coupling alpha = {0} >= 0")]
    NoBoundState(f64),

    #[error("product undefined in the family: no admissible triple for {left} . {right}")]
    ProductUndefined { left: String, right: String },

    #[error("symbol `{0}` violates the polynomial growth condition")]
    GrowthCondition(String),

    #[error("Hermite recurrence overflow: |lambda| = {lambda} exceeds safe bound {bound}")]
    RecurrenceOverflow { lambda: f64, bound: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(input: &str, message: impl Into<String>) -> Self {
        Error::Parse { input: input.to_string(), message: message.into() }
    }
}
