use thiserror::Error;

use crate::seqcore::PartyRole;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("value {value} does not fit in {width} bits")]
    EncodingOverflow { value: String, width: usize },

    #[error("value {value} at position {index} is outside [0, 2^{m})")]
    ValueOutOfRange { index: usize, value: u64, m: u32 },

    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("instance mismatch: {0}")]
    InstanceMismatch(String),

    #[error("threshold {threshold} must be below n * 2^(2m) = {limit}")]
    ThresholdOutOfRange { threshold: u128, limit: String },

    #[error("not a permutation of 0..{n}: {mapping:?}")]
    InvalidAssignment { n: usize, mapping: Vec<usize> },

    #[error("rank {rank} out of range, there are only {count} multisets")]
    InvalidRank { rank: String, count: String },

    #[error("{what}: size {size} exceeds guard {limit}")]
    TooLarge {
        what: String,
        size: String,
        limit: String,
    },

    #[error("protocol {protocol} did not terminate within {rounds} messages")]
    NonTermination { protocol: String, rounds: usize },

    #[error("malformed protocol: {0}")]
    Malformed(String),

    #[error("{role} received an input of the wrong shape for {protocol}")]
    InputShape { protocol: String, role: PartyRole },

    #[error("fooling set must be verified before bounding")]
    MustVerifyFirst,

    #[error("fooling set contains duplicate pair at positions {first} and {second}")]
    DuplicatePair { first: usize, second: usize },

    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

impl Error {
    pub(crate) fn too_large(
        what: impl Into<String>,
        size: impl ToString,
        limit: impl ToString,
    ) -> Self {
        Error::TooLarge {
            what: what.into(),
            size: size.to_string(),
            limit: limit.to_string(),
        }
    }
}
