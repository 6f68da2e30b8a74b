use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Evaluation point closer to a transducer than the near-field guard.
    #[error("point is {distance:.3e} m from transducer {transducer}, below the {min:.0e} m near-field guard")]
    TooClose {
        transducer: usize,
        distance: f64,
        min: f64,
    },
    #[error("grid cell ({u}, {v}): {source}")]
    GridCell {
        u: usize,
        v: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("time went backwards: {now} s < {last} s")]
    TimeRegression { now: f64, last: f64 },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
