use std::fmt;

/// Error type shared by every solver in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input violates a documented precondition (non-positive range,
    /// probability outside (0, 1), mismatched lengths, ...).
    Domain(String),
    /// An allocation was requested but no candidate can receive time
    /// (all weights zero, or every direction empty).
    NoAllocation(&'static str),
    /// Exact inclusion-exclusion was refused because too many targets
    /// share one direction.
    UnionTooLarge { targets: usize, limit: usize },
    /// Pseudo-sensor enumeration was refused because the sensor count
    /// exceeds the exhaustive-search guard.
    TooManySensors { sensors: usize, limit: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NoAllocation(why) => write!(f, "nothing to allocate: {why}"),
            Error::UnionTooLarge { targets, limit } => write!(
                f,
                "refusing exact union expansion over {targets} targets (limit {limit})"
            ),
            Error::TooManySensors { sensors, limit } => write!(
                f,
                "refusing pseudo-sensor enumeration over {sensors} sensors (limit {limit})"
            ),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
