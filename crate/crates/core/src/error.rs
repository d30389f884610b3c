use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid time {0}: must be finite and nonnegative")]
    InvalidTime(f64),

    #[error("invalid probability {0}")]
    InvalidProbability(f64),

    #[error("no finite quantile: {0}")]
    NoFiniteQuantile(String),

    #[error("infinite mean: {0}")]
    InfiniteMean(String),

    /// The waiting time is infinite with probability one (a zero mutation rate).
    #[error("waiting time is almost surely infinite: {0}")]
    AlmostSurelyInfinite(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("empty sample set")]
    EmptySample,

    #[error("no closed-form reference: {0}")]
    NoReference(String),

    #[error("too much censoring: {censored} of {total} draws exceeded the horizon")]
    Censored { censored: u64, total: u64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
