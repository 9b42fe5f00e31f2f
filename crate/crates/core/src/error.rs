use thiserror::Error;

/// Errors raised while loading, analysing or simulating a landscape.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse landscape document: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("state index {index} out of range for {len} states")]
    UnknownState { index: usize, len: usize },

    #[error("unknown state name {0:?}")]
    UnknownStateName(String),

    #[error("invalid proposal rate Q({from}, {to}) = {rate}")]
    InvalidRate { from: usize, to: usize, rate: f64 },

    #[error("duplicate proposal rate entry ({0}, {1})")]
    DuplicateRate(usize, usize),

    #[error("stationary distribution pi is required when proposal rates are not symmetric")]
    MissingStationary,

    #[error("invalid stationary distribution: {0}")]
    InvalidStationary(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("proposal chain is not irreducible: {0}")]
    Reducible(String),

    #[error("temperature must be positive and finite, got {0}")]
    Temperature(f64),

    #[error("temperature {temperature} too low for this landscape: rate exp({log_rate:.1}) is not representable")]
    TemperatureTooLow { temperature: f64, log_rate: f64 },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("generators are not comparable: {0}")]
    Mismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("uniformization bound not representable: {0}")]
    Representability(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
