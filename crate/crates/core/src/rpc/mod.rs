//! JSON-RPC chain access: endpoint rotation, chunked `eth_getLogs`,
//! timestamp to block resolution, and a replay backend for offline runs.

mod chunk;
mod client;
mod pool;
mod replay;
mod transport;
mod wire;

pub(crate) use wire::hex_bytes as wire_hex;

pub use chunk::{chunk_ranges, BlockRange};
pub use client::{ChainClient, ChunkResult, RetryPolicy, SearchMode};
pub use pool::{RpcEndpointPool, DEFAULT_MAX_CHUNK};
pub use replay::{canonical_json, ReplayBackend, ReplayTransport};
pub use transport::{HttpTransport, Transport, TransportError};
pub use wire::{BlockInfo, LogEntry, ReceiptStatus, TransactionReceipt};

use thiserror::Error;

use crate::types::ChainId;

#[derive(Debug, Error)]
pub enum RpcError {
    #[error("chain {chain_id}: all endpoints failed for {method} after {attempts} attempts: {last}")]
    RpcExhausted {
        chain_id: ChainId,
        method: String,
        attempts: u32,
        last: TransportError,
    },
    #[error("chain {chain_id}: malformed {method} response: {reason}")]
    MalformedResponse {
        chain_id: ChainId,
        method: String,
        reason: String,
    },
    #[error("chain {chain_id}: {what} not found")]
    NotFound { chain_id: ChainId, what: String },
    #[error("chain {chain_id}: timestamp {target} outside [{genesis_ts}, {head_ts}]")]
    OutOfRange {
        chain_id: ChainId,
        target: u64,
        genesis_ts: u64,
        head_ts: u64,
    },
    #[error("invalid block range [{from}, {to}]")]
    InvalidRange { from: u64, to: u64 },
    /// A replay fixture had no recorded response for a request.
    #[error("replay miss on chain {chain_id}: {method} {params}")]
    ReplayMiss {
        chain_id: ChainId,
        method: String,
        params: String,
    },
}

impl RpcError {
    /// Errors that abort a whole run rather than a single chunk.
    pub fn is_fatal(&self) -> bool {
        matches!(self, RpcError::ReplayMiss { .. })
    }
}
