use thiserror::Error;

/// Errors raised by the library. Each variant names the violated condition.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {0}: must be at least 1")]
    InvalidDimension(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("time index {index} is off the grid (n_steps = {n_steps})")]
    InvalidIndex { index: usize, n_steps: usize },
    #[error("invalid intensity {0}: must be finite and nonnegative")]
    InvalidIntensity(f64),
    #[error("invalid time {t}: must lie in (0, {t_max}]")]
    InvalidTime { t: f64, t_max: f64 },
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("point (s = {s}, x = {x:?}) lies outside the box")]
    InvalidPoint { s: f64, x: Vec<f64> },
    #[error("incompatible boxes for superposition")]
    IncompatibleBox,
    #[error("invalid count: {0}")]
    InvalidCount(String),
    #[error("path {path} leaves the environment window at step {step}")]
    WindowCoverage { path: usize, step: usize },
    #[error("invalid delta {0}: must lie in (0, 1/2]")]
    InvalidDelta(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invariant violated (seed {seed}, replicate {replicate}): {detail}")]
    InvariantViolation {
        seed: u64,
        replicate: usize,
        detail: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
