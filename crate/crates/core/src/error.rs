use thiserror::Error;

/// Errors shared across the library.
///
/// Routines that enumerate full realization spaces refuse inputs beyond a
/// configurable cell budget instead of silently running for hours; structural
/// routines report which precondition failed so the CLI can surface it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An exhaustive enumeration was requested for an instance larger than
    /// the configured oracle budget (`nA * nB` cells).
    #[error("oracle limit exceeded: instance has {cells} cells, limit is {limit}")]
    OracleLimitExceeded { cells: usize, limit: usize },

    /// A switch move referenced cells that do not form an alternating
    /// 4-cycle in the current realization.
    #[error("invalid switch move: ({a1},{b1}),({a2},{b2}) is not switchable here")]
    InvalidMove {
        a1: usize,
        a2: usize,
        b1: usize,
        b2: usize,
    },

    /// Two objects that must share a degree sequence do not.
    #[error("degree sequences disagree: {context}")]
    DegreeMismatch { context: String },

    /// The degree sequence admits no bipartite realization.
    #[error("degree sequence is not bigraphic: {context}")]
    NotGraphic { context: String },

    /// A structural precondition unrelated to the other variants failed.
    #[error("domain error: {0}")]
    DomainError(String),

    /// An arc set violates the flow-representation invariants
    /// (orientation, multiplicity, or divergence).
    #[error("inadmissible flow: {0}")]
    InadmissibleFlow(String),

    /// No buffer realization exists for the requested window; carries a
    /// violated-cut witness when one was found.
    #[error("buffer infeasible for window [{start}, {start}+{width}): {detail}")]
    BufferInfeasible {
        start: usize,
        width: usize,
        detail: String,
    },

    /// The instance is below the size threshold required by the routine.
    #[error("instance too small: {0}")]
    TooSmall(String),

    /// An alternating cycle handed to the extraction routine is not a
    /// shortest one, so the structure theorem does not apply.
    #[error("alternating cycle is not shortest: {0}")]
    CycleNotShortest(String),

    /// The excess profile has more than one source, but the routine only
    /// supports single-source profiles.
    #[error("excess profile is not single-source: {0}")]
    NotSingleSource(String),

    /// A nonnegative matrix handed to the Perron solver is not primitive,
    /// so power iteration need not converge.
    #[error("matrix is not primitive: {0}")]
    NotPrimitive(String),

    /// A path encoding does not determine a unique endpoint pair.
    #[error("inconsistent encoding: {0}")]
    InconsistentEncoding(String),
}

pub type Result<T> = std::result::Result<T, Error>;
