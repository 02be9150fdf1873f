use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed path: {0}")]
    MalformedPath(&'static str),
    #[error("walk of length {0} exceeds the 64-step encoding")]
    WalkTooLong(usize),
    #[error("exit level must be nonnegative, got {0}")]
    NegativeExitLevel(i64),
    #[error("auxiliary walk too short: {needed} steps needed, {available} available")]
    AuxiliaryTooShort { needed: usize, available: usize },
    #[error("horizon mismatch: {left} vs {right}")]
    HorizonMismatch { left: usize, right: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("horizon {requested} exceeds the cap {cap}")]
    CapExceeded { requested: usize, cap: usize },
    #[error("masses sum to {0} instead of 1")]
    MassNotOne(alloc::string::String),
    #[error("mass must be positive")]
    NonPositiveMass,
    #[error("need {needed} sign bits, got {available}")]
    InsufficientBits { needed: usize, available: usize },
    #[error("horizon {0} is not block-complete (expected 2^k - 1)")]
    NotBlockComplete(usize),
    #[error("mesh must be positive and finite")]
    NonPositiveMesh,
    #[error("time grid must be strictly increasing")]
    NonMonotoneTimes,
    #[error("path must start at time 0 with value 0")]
    BadOrigin,
    #[error("time {time} lies beyond the horizon {horizon}")]
    BeyondHorizon { time: f64, horizon: f64 },
    #[error("|lambda| * mesh = {0} is not below pi/2")]
    CosineNotPositive(f64),
    #[error("need at least {needed} samples, got {available}")]
    TooFewSamples { needed: usize, available: usize },
    #[error("clock path must be nondecreasing with unit steps")]
    BadClock,
    #[error("no reflection word maps the paths into each other")]
    Unreachable,
}
