use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested closed-loop poles do not sum to the plant-fixed value.
    #[error("pole sum constraint violated: poles sum to {actual}, required sum is {required}")]
    PoleSumConstraint { required: f64, actual: f64 },

    #[error("simulation diverged at t = {time} s")]
    Divergence { time: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
