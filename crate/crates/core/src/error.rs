use thiserror::Error;

/// Coarse classification used by callers that map failures to process exit
/// codes: input/shape problems versus numerical breakdowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet size must be at least 2, got {0}")]
    AlphabetTooSmall(usize),
    #[error("symbol {symbol} out of range for alphabet of size {alphabet_size}")]
    SymbolOutOfRange { symbol: usize, alphabet_size: usize },
    #[error("context code {code} out of range for {expected} contexts")]
    ContextOutOfRange { code: u64, expected: u64 },
    #[error("state space {alphabet_size}^{order} exceeds the supported size")]
    DimensionTooLarge { alphabet_size: usize, order: usize },
    #[error("expected {expected} rows for order {order}, got {got}")]
    RowCountMismatch {
        order: usize,
        expected: usize,
        got: usize,
    },
    #[error("row {context} has {got} entries, expected {expected}")]
    RowLengthMismatch {
        context: u64,
        got: usize,
        expected: usize,
    },
    #[error("row {context} has invalid entry {value}")]
    InvalidEntry { context: u64, value: f64 },
    #[error("row {context} sums to {sum}, outside tolerance of 1")]
    RowSumOutOfTolerance { context: u64, sum: f64 },
    #[error("word of length {got} does not match order {expected}")]
    WordLengthMismatch { got: usize, expected: usize },
    #[error("operation requires order at least 1")]
    OrderZero,
    #[error("singular linear system in the stationary solve")]
    SingularSystem,
    #[error("operation requires a strictly positive tensor (min entry {min:e})")]
    NonPositiveTensor { min: f64 },
    #[error("target order {target} exceeds the available order {available}")]
    TargetAboveSource { target: usize, available: usize },
    #[error("iteration did not converge within {0} steps")]
    NonConvergence(usize),
    #[error("stationary vector residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("stationary vector has a non-positive entry")]
    DegenerateStationaryVector,
    #[error("zero denominator while renormalizing a stationary vector")]
    ZeroDenominator,
    #[error("depth {depth} exceeds the enumeration cap {cap}")]
    DepthTooLarge { depth: usize, cap: usize },
    #[error("kernel sequence is empty")]
    EmptyKernelSequence,
    #[error("kernel at position {position} has order {got}, expected {position}")]
    KernelOrderMismatch { position: usize, got: usize },
    #[error("order distribution has no mass")]
    ZeroMass,
    #[error("order weight {value} at order {order} is invalid")]
    InvalidWeight { order: usize, value: f64 },
    #[error("Dirichlet parameter {value} in row {context} must be positive and finite")]
    InvalidAlpha { context: u64, value: f64 },
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("trajectory of length {n} is too short for order {order}")]
    TrajectoryTooShort { n: usize, order: usize },
    #[error("gram length must be at least 1")]
    GramLengthZero,
    #[error("window span {span} exceeds maximum {max} for gram length {gram_length}")]
    SpanTooLarge {
        span: usize,
        gram_length: usize,
        max: usize,
    },
    #[error("alphabet size {got} does not match expected {expected}")]
    AlphabetMismatch { got: usize, expected: usize },
    #[error("missing prior for order {order}")]
    MissingPrior { order: usize },
    #[error("context window of length {got} is shorter than the top order {need}")]
    WindowTooShort { got: usize, need: usize },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NonConvergence(_)
            | Error::ResidualTooLarge { .. }
            | Error::DegenerateStationaryVector
            | Error::SingularSystem
            | Error::ZeroDenominator => ErrorClass::Numerical,
            _ => ErrorClass::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
