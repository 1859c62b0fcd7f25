use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("GBS index {index} out of range (scenario has {count} GBSs)")]
    GbsIndexOutOfRange { index: usize, count: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{slots} slots cannot cover {distance:.3} m at {step:.3} m per slot")]
    TooFewSlots { slots: usize, distance: f64, step: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config field `{0}` must be finite and positive")]
    NotPositive(&'static str),
    #[error("config field `{0}` must be at least 1")]
    ZeroIterations(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("simplex exceeded {0} pivots without terminating")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScaError {
    #[error("trajectory subproblem failed: {reason}")]
    SubproblemFailure { reason: String, iterate: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TspError {
    #[error("exact visiting-order solver supports at most {max} GBSs, got {got}")]
    TooManyNodes { got: usize, max: usize },
}

/// Top-level error for planner, baselines and the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Sca(#[from] ScaError),
    #[error(transparent)]
    Tsp(#[from] TspError),
    #[error("time allocation LP did not reach an optimum: {0}")]
    AllocationStatus(String),
    #[error("no feasible slot count found up to {0}")]
    NoFeasibleSlotCount(usize),
    #[error("scenario file {path}: {message}")]
    ScenarioFile { path: String, message: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error comes from malformed or invalid input rather than
    /// from the solver.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Model(_) | Error::Config(_) | Error::ScenarioFile { .. } | Error::InvalidInput(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
