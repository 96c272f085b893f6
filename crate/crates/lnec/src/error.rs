use thiserror::Error;

/// Errors produced by network validation, code construction, and analysis.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("element {value} out of range for field of order {order}")]
    ElementOutOfRange { value: u64, order: u64 },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("network contains a cycle through channels {0:?}")]
    CycleDetected(Vec<String>),

    #[error("unknown node id {0:?}")]
    UnknownNode(String),

    #[error("unknown channel id {0:?}")]
    UnknownChannel(String),

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error(
        "field of order {order} too small: no admissible kernel for channel {channel:?} \
         (blocked at sink {sink:?}, pattern {pattern:?})"
    )]
    FieldTooSmall {
        order: u64,
        sink: String,
        pattern: Vec<String>,
        channel: String,
    },

    #[error("no node with min-cut capacity >= rate; nothing to construct")]
    NoEligibleSink,

    #[error("size guard: {0}")]
    SizeGuard(String),

    #[error("minimum distance undefined for target {0} (message space is trivial)")]
    DistanceUndefined(String),

    #[error("no intersecting pattern of weight <= {cap}; minimum distance exceeds the cap")]
    DistanceExceedsCap { cap: usize },

    #[error("target {0} cannot decode: message space has dimension {1} < rate {2}")]
    Undecodable(String, usize, usize),

    #[error("decode search space too large ({estimated} candidates > limit {limit})")]
    SearchSpace { estimated: u128, limit: u128 },

    #[error("no disjoint path family: {0}")]
    Infeasible(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
