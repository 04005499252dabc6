use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::abi::AbiValue;
use crate::config::{EventConfig, FieldRole};
use crate::storage::EventRecord;
use crate::types::{Address, ChainId, H256};

/// Pointer to a persisted event.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EventRef {
    pub event: String,
    pub chain_id: ChainId,
    pub block_number: u64,
    pub log_index: u64,
    pub tx_hash: H256,
}

/// An event reduced to what the matchers need: position, time, the fee of
/// its transaction and its parameters keyed by semantic role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leg {
    pub event: String,
    pub chain_id: ChainId,
    pub contract: Address,
    pub tx_hash: H256,
    pub block_number: u64,
    pub log_index: u64,
    pub timestamp: u64,
    pub fee_wei: u128,
    pub gas_price_wei: u128,
    pub values: BTreeMap<FieldRole, AbiValue>,
}

impl Leg {
    /// Maps a stored record through the field roles of its event config.
    pub fn from_record(rec: &EventRecord, cfg: &EventConfig) -> Result<Leg, String> {
        let mut values = BTreeMap::new();
        for (role, param) in &cfg.fields {
            let role: FieldRole = role.parse()?;
            let v = rec
                .event
                .fields
                .get(param)
                .ok_or_else(|| format!("missing parameter {param}"))?;
            values.insert(role, v.clone());
        }
        let e = &rec.event;
        Ok(Leg {
            event: e.event_name.clone(),
            chain_id: e.chain_id,
            contract: e.contract,
            tx_hash: e.tx_hash,
            block_number: e.block_number,
            log_index: e.log_index,
            timestamp: e.block_timestamp,
            fee_wei: rec.fee_wei(),
            gas_price_wei: rec.effective_gas_price,
            values,
        })
    }

    pub fn reference(&self) -> EventRef {
        EventRef {
            event: self.event.clone(),
            chain_id: self.chain_id,
            block_number: self.block_number,
            log_index: self.log_index,
            tx_hash: self.tx_hash,
        }
    }

    /// Tie-break order: earliest timestamp, then chain, block, log index.
    pub fn order(&self) -> (u64, ChainId, u64, u64) {
        (self.timestamp, self.chain_id, self.block_number, self.log_index)
    }

    /// Join-key rendering of a value (decimal for integers, hex otherwise).
    pub fn key(&self, role: FieldRole) -> Option<String> {
        self.values.get(&role).map(|v| v.to_string())
    }

    pub fn address(&self, role: FieldRole) -> Option<Address> {
        self.values.get(&role).and_then(AbiValue::as_address)
    }

    pub fn uint(&self, role: FieldRole) -> Option<&BigUint> {
        self.values.get(&role).and_then(AbiValue::as_uint)
    }

    pub fn chain(&self, role: FieldRole) -> Option<ChainId> {
        self.uint(role).map(|v| v.to_u64().unwrap_or(u64::MAX))
    }

    pub fn amount(&self) -> BigUint {
        self.uint(FieldRole::Amount).cloned().unwrap_or_default()
    }
}
