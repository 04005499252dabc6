//! Persistence of decoded events and cctxs behind a repository interface.
//!
//! Every event kind of a bridge lives in its own relation, named
//! `<bridge>_<EventName>`. Event inserts are idempotent on
//! `(chain_id, tx_hash, log_index)`, so re-extracting an overlapping range
//! never duplicates rows.

mod export;
mod memory;
mod sqlite;

pub use export::{write_cctxs_csv, write_events_csv};
pub use memory::MemoryRepository;
pub use sqlite::SqliteRepository;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abi::{AbiValue, DecodedEvent};
use crate::config::{StorageConfig, StorageKind};
use crate::generate::CrossChainTx;
use crate::rpc::ReceiptStatus;
use crate::types::{display_str, Address, ChainId, H256};

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("storage backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("unknown relation {0:?}")]
    UnknownRelation(String),
    #[error("invalid relation name {0:?}")]
    InvalidRelationName(String),
    #[error("cctx {cctx_id:?} already stored for bridge {bridge:?}")]
    DuplicateCctx { bridge: String, cctx_id: String },
    #[error("corrupt stored record: {0}")]
    Corrupt(String),
}

/// A decoded event together with the receipt data and the run that
/// extracted it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub event: DecodedEvent,
    pub run_id: String,
    pub gas_used: u64,
    #[serde(with = "display_str")]
    pub effective_gas_price: u128,
    pub status: ReceiptStatus,
}

pub type EventKey = (ChainId, H256, u64);

impl EventRecord {
    pub fn key(&self) -> EventKey {
        (self.event.chain_id, self.event.tx_hash, self.event.log_index)
    }

    pub fn fee_wei(&self) -> u128 {
        self.gas_used as u128 * self.effective_gas_price
    }

    fn order_key(&self) -> (ChainId, u64, u64, H256) {
        (self.event.chain_id, self.event.block_number, self.event.log_index, self.event.tx_hash)
    }
}

/// Conjunctive filter over an event relation. `None` fields match anything.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventFilter {
    pub chain_id: Option<ChainId>,
    pub from_block: Option<u64>,
    pub to_block: Option<u64>,
    pub contract: Option<Address>,
    /// `(param name, value)` equality predicates.
    pub fields: Vec<(String, AbiValue)>,
}

impl EventFilter {
    pub fn chain(mut self, chain_id: ChainId) -> Self {
        self.chain_id = Some(chain_id);
        self
    }

    pub fn blocks(mut self, from: u64, to: u64) -> Self {
        self.from_block = Some(from);
        self.to_block = Some(to);
        self
    }

    pub fn contract(mut self, address: Address) -> Self {
        self.contract = Some(address);
        self
    }

    pub fn field(mut self, name: impl Into<String>, value: AbiValue) -> Self {
        self.fields.push((name.into(), value));
        self
    }

    pub fn matches(&self, r: &EventRecord) -> bool {
        let e = &r.event;
        self.chain_id.is_none_or(|c| c == e.chain_id)
            && self.from_block.is_none_or(|b| e.block_number >= b)
            && self.to_block.is_none_or(|b| e.block_number <= b)
            && self.contract.is_none_or(|a| a == e.contract)
            && self.fields.iter().all(|(k, v)| e.fields.get(k) == Some(v))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CctxFilter {
    pub bridge: Option<String>,
    pub src_chain: Option<ChainId>,
    pub dst_chain: Option<ChainId>,
}

impl CctxFilter {
    pub fn bridge(name: impl Into<String>) -> Self {
        Self {
            bridge: Some(name.into()),
            ..Self::default()
        }
    }

    pub fn pair(mut self, src: ChainId, dst: ChainId) -> Self {
        self.src_chain = Some(src);
        self.dst_chain = Some(dst);
        self
    }

    pub fn matches(&self, c: &CrossChainTx) -> bool {
        self.bridge.as_ref().is_none_or(|b| *b == c.bridge)
            && self.src_chain.is_none_or(|s| s == c.src_chain)
            && self.dst_chain.is_none_or(|d| d == c.dst_chain)
    }
}

/// Storage contract shared by all backends.
///
/// Event queries return rows ordered by `(chain_id, block_number,
/// log_index)`; cctx queries by `(bridge, cctx_id)`. Implementations
/// serialize writes internally and may be shared across threads.
pub trait Repository: Send + Sync {
    /// Creates an empty relation if it does not exist yet.
    fn ensure_relation(&self, relation: &str) -> Result<(), StorageError>;

    /// All relation names, sorted.
    fn relations(&self) -> Result<Vec<String>, StorageError>;

    /// Inserts records not already present; returns how many were new.
    /// Creates the relation when needed.
    fn put_events(&self, relation: &str, records: &[EventRecord]) -> Result<usize, StorageError>;

    fn query_events(&self, relation: &str, filter: &EventFilter) -> Result<Vec<EventRecord>, StorageError>;

    /// Inserts cctxs. A cctx id already stored for the same bridge, or
    /// repeated within `records`, rejects the whole batch.
    fn put_cctxs(&self, records: &[CrossChainTx]) -> Result<usize, StorageError>;

    fn query_cctxs(&self, filter: &CctxFilter) -> Result<Vec<CrossChainTx>, StorageError>;

    /// Removes every cctx of `bridge`; returns how many were removed.
    fn delete_cctxs(&self, bridge: &str) -> Result<usize, StorageError>;

    fn has_relation(&self, relation: &str) -> Result<bool, StorageError> {
        Ok(self.relations()?.iter().any(|r| r == relation))
    }
}

pub fn open(config: &StorageConfig) -> Result<Arc<dyn Repository>, StorageError> {
    match (config.kind, &config.path) {
        (StorageKind::Memory, _) => Ok(Arc::new(MemoryRepository::new())),
        (StorageKind::Sqlite, Some(path)) => Ok(Arc::new(SqliteRepository::open(path)?)),
        (StorageKind::Sqlite, None) => Err(StorageError::BackendUnavailable("sqlite storage needs a path".into())),
    }
}

pub(crate) fn check_relation_name(name: &str) -> Result<(), StorageError> {
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(StorageError::InvalidRelationName(name.to_string()));
    }
    Ok(())
}

pub(crate) fn sort_events(rows: &mut [EventRecord]) {
    rows.sort_by_key(EventRecord::order_key);
}

pub(crate) fn check_cctx_batch(
    records: &[CrossChainTx],
    mut exists: impl FnMut(&str, &str) -> bool,
) -> Result<(), StorageError> {
    let mut seen = std::collections::HashSet::new();
    for c in records {
        if exists(&c.bridge, &c.cctx_id) || !seen.insert((c.bridge.as_str(), c.cctx_id.as_str())) {
            return Err(StorageError::DuplicateCctx {
                bridge: c.bridge.clone(),
                cctx_id: c.cctx_id.clone(),
            });
        }
    }
    Ok(())
}
