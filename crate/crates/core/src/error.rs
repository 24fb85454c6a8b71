use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("operands belong to different ambient spaces")]
    MixedAmbient,
    #[error("operation not supported for this system: {0}")]
    Unsupported(&'static str),
    #[error("set has positive measure, expected a null set")]
    NotNull,
    #[error("input region is empty")]
    EmptyInput,
    #[error("closed set touches the boundary of its open neighbourhood")]
    NoGap,
    #[error("closed sets are not disjoint")]
    NotDisjoint,
    #[error("closed set is not contained in the open set")]
    NotContained,
    #[error("closures are not separated")]
    NotSeparated,
    #[error("point lies outside the open set")]
    PointOutside,
    #[error("closed set is not covered by the given pieces")]
    CoverFailure,
    #[error("breakpoint count {count} exceeds cap {cap}")]
    BreakpointBudget { count: usize, cap: usize },
    #[error("return time exceeded {0} steps")]
    NonTermination(u64),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("duplicate entries in input")]
    DuplicateInput,
    #[error("search exhausted at depth {0}")]
    SearchExhausted(u64),
    #[error("certificate is not proven")]
    UnprovenInput,
    #[error("measure gap is not positive")]
    GapNonpositive,
    #[error("tower level straddles the region")]
    UnrefinedTower,
    #[error("column {0} has no more target levels than source levels")]
    ColumnDeficit(usize),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
}
