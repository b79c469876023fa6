use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MintError {
    #[error("degenerate wall {0}: endpoints coincide")]
    DegenerateWall(i64),
    #[error("invalid floor plan: {0}")]
    InvalidFloorPlan(String),
    #[error("coincident points: angle undefined")]
    CoincidentPoints,
    #[error("pulse undersampled: sample rate {sample_rate} Hz < 4/Tp = {required} Hz")]
    Undersampled { sample_rate: f64, required: f64 },
    #[error("zero-energy pulse")]
    ZeroEnergy,
    #[error("path delay {delay} s is outside the measurement window of {window} s")]
    DelayOutOfWindow { delay: f64, window: f64 },
    #[error("requested {requested} components but the delay grid has only {grid} bins")]
    TooManyComponents { requested: usize, grid: usize },
    #[error("window too short: {len} < {required}")]
    WindowTooShort { len: usize, required: usize },
    #[error("non-positive argument: {0}")]
    NonPositive(&'static str),
    #[error("singular information matrix: geometry is not localizable")]
    Singular,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("belief propagation did not converge after {iterations} iterations (last change {last_change:e})")]
    NoConvergence {
        iterations: usize,
        last_change: f64,
        last_marginals: Vec<Vec<f64>>,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, MintError>;
