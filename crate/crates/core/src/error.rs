use thiserror::Error;

use crate::kucera::PruneReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("depth {requested} exceeds the limit {limit}")]
    DepthExceeded { requested: u32, limit: u32 },
    #[error("no level up to depth {depth} holds 2^{k} nodes")]
    NoSuchLevel { k: u32, depth: u32 },
    #[error("epsilon must be positive{}", if *.below_one { " and below 1" } else { "" })]
    InvalidEpsilon { below_one: bool },
    #[error("delta must be positive")]
    InvalidDelta,
    #[error("pruning removed the whole tree")]
    EmptyAfterPruning(Box<PruneReport>),
    #[error("measure {measure} is too small (needs more than {bound})")]
    MeasureTooSmall { measure: String, bound: String },
    #[error("schedule level {level} exceeds tree depth {depth}")]
    ScheduleExceedsDepth { level: u32, depth: u32 },
    #[error("first splitting level {level} already exceeds depth {depth}")]
    ScheduleTooCoarse { level: u32, depth: u32 },
    #[error("no color admits a homogeneous copy of 2^<{k} within depth {depth}")]
    NoHomogeneousTree { k: u32, depth: u32 },
    #[error("index {index} lies outside the halting table of size {size}")]
    OutOfTable { index: usize, size: usize },
    #[error("string has {ones} ones, decoding {count} entries needs at least {}", .count + 1)]
    InsufficientOnes { ones: usize, count: usize },
    #[error("string is not in the class C of the halting table")]
    NotInC,
    #[error("cylinder has measure zero")]
    EmptyCylinder,
    #[error("not a forcing condition: {0}")]
    InvalidCondition(String),
    #[error("target sequence has {len} bits but the functional reads {inputs} inputs")]
    TargetTooShort { len: usize, inputs: usize },
    #[error("tree is empty")]
    EmptyTree,
    #[error("measure {measure} does not exceed delta {delta}")]
    MeasureBelowDelta { measure: String, delta: String },
    #[error("witness search failed at level {level}")]
    WitnessNotFound { level: u32 },
    #[error("enumeration would visit {count} trees (limit {limit})")]
    SearchSpaceTooLarge { count: u128, limit: u128 },
    #[error("not prefix-closed: {0} is present but its parent is not")]
    NotPrefixClosed(String),
    #[error("string longer than {limit} bits")]
    StringTooLong { limit: u32 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown functional {0:?}")]
    UnknownFunctional(String),
    #[error("unknown format version {0:?}")]
    UnknownVersion(String),
    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
