use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A trace has a timestamp that does not strictly increase.
    /// Carries the index of the offending (later) observation.
    #[error("timestamps must strictly increase: violation at index {0}")]
    NonMonotoneTime(usize),

    /// A state-space exploration exceeded the configured cap.
    #[error("state-space exploration exceeded the cap of {limit} states")]
    ExplosionLimit { limit: usize },

    /// Attempted to combine systems with different label modes.
    #[error("cannot combine a timed and a delay-insensitive system")]
    ModeMismatch,

    /// `merge` was called on observations with different timestamps.
    #[error("cannot merge observations with different timestamps")]
    TimeMismatch,

    /// The composability-oracle decomposition bound was exceeded.
    #[error("observation pair has {size} events, above the decomposition bound of {limit}")]
    DecompositionLimit { size: usize, limit: usize },

    /// A predicate or query needs a component that the system lacks.
    #[error("system is missing a required component: {0}")]
    MissingComponent(String),

    /// A grid was initialised with out-of-bounds or overlapping positions.
    #[error("invalid grid initialisation: {0}")]
    InvalidInit(String),

    /// Swap protocols require the first robot identifier to be the smaller one.
    #[error("swap protocol identifiers must satisfy i < j (got {i} and {j})")]
    IdentifierOrder { i: u32, j: u32 },

    /// The runtime found no composable joint transition.
    #[error("runtime deadlock: no composable joint transition is enabled")]
    RuntimeDeadlock,

    /// A composability relation was declared with an empty observable on one side.
    #[error("composability relations may not relate empty observables")]
    EmptyObservableInRelation,

    /// A timestamp was constructed with a negative or undefined value.
    #[error("timestamps must be non-negative rationals: {0}")]
    InvalidTimeStamp(String),

    /// Failure while parsing a term, event, or spec file.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
