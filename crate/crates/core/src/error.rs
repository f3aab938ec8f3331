use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: {values} values but {probs} probabilities")]
    LengthMismatch { values: usize, probs: usize },

    #[error("probabilities sum to {0}, expected 1")]
    MassSum(f64),

    #[error("value {0} lies outside [0, 1]")]
    ValueOutOfRange(f64),

    #[error("invalid probability {0}")]
    InvalidProbability(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bidder index {index} out of range for {n} bidders")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("feasible set is fractional; operation needs a set system")]
    NotBinary,

    #[error("set system is not downward-closed")]
    NotDownwardClosed,

    #[error("set system is a matroid")]
    IsMatroid,

    #[error("exact enumeration needs {profiles} profiles, cap is {cap}")]
    EnumerationCap { profiles: u128, cap: u128 },

    #[error("revenue {revenue} and virtual welfare {welfare} disagree")]
    RevenueIdentity { revenue: f64, welfare: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}
