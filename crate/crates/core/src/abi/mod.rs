//! Event ABI handling: canonical signatures, topic hashing and decoding of
//! indexed and non-indexed parameters.

mod decode;
mod event;
mod types;
mod value;

pub use decode::{decode_data, decode_log, decode_word, DecodedEvent};
pub use event::{canonical_signature, event_topic0, keccak256, EventAbi, EventParam};
pub use types::SolType;
pub use value::AbiValue;

use thiserror::Error;

use crate::types::H256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbiError {
    #[error("unsupported type {0:?}")]
    UnsupportedType(String),
    #[error("invalid event abi: {0}")]
    InvalidAbi(String),
    #[error("anonymous event {0} has no topic0")]
    Anonymous(String),
    #[error("topic0 {actual} does not match {expected} for {event}")]
    TopicMismatch {
        event: String,
        expected: H256,
        actual: H256,
    },
    #[error("{event}: expected {expected} topics, log has {actual}")]
    ArityMismatch {
        event: String,
        expected: usize,
        actual: usize,
    },
    #[error("data truncated: need {needed} bytes at offset {offset}, have {available}")]
    TruncatedData {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("non-canonical padding for {ty}")]
    NonCanonicalPadding { ty: String },
    #[error("invalid utf-8 in string value")]
    InvalidUtf8,
    #[error("log block {log_block} does not match block info {block}")]
    BlockMismatch { log_block: u64, block: u64 },
}
