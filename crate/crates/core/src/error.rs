use std::fmt;

/// Errors shared by the geometry, bounds and solver layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A scenario parameter violates its invariant (non-positive speed,
    /// target outside the reachable set, invalid cone declaration, ...).
    InvalidScenario(String),
    /// An operation was called outside its mathematical domain.
    Domain(String),
    /// The queried point cannot be reached at the given muzzle speed
    /// (negative discriminant, range beyond the maximum, or below the
    /// minimum downrange distance).
    Unreachable,
    /// The expanding sphere no longer intersects the reachable set.
    EmptySphere,
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidScenario(msg) => write!(f, "invalid scenario: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Unreachable => write!(f, "point is not reachable at the given muzzle speed"),
            Error::EmptySphere => write!(f, "search sphere does not intersect the reachable set"),
        }
    }
}

impl std::error::Error for Error {}
