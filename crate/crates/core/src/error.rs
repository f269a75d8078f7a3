use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state became non-finite at grid index {index}")]
    NonFiniteState { index: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite (smallest pivot {smallest_pivot:e})")]
    NotPositiveDefinite { smallest_pivot: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("solution left the state domain at grid index {index}")]
    DomainExit { index: usize },

    #[error("determinant condition needs a single output, system has k = {0}")]
    WrongOutputDimension(usize),

    #[error("kappa vanished at t = {t} (y = {y})")]
    KappaVanished { t: f64, y: f64 },

    #[error("Gram matrix degenerate at reset t = {t}")]
    GramDegenerate { t: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("hypothesis {0} fails for this parameter set")]
    HypothesisFails(String),

    #[error("singular denominator ({0:e})")]
    SingularDenominator(f64),

    #[error("frequency estimate undefined: z2 = {0} is not negative")]
    NonNegativeZ2(f64),
}
