//! Wire-level records returned by the node, parsed from JSON-RPC payloads.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::types::{parse_data, parse_quantity, Address, ChainId, H256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockInfo {
    pub number: u64,
    pub timestamp: u64,
    pub hash: H256,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub chain_id: ChainId,
    pub address: Address,
    pub topics: Vec<H256>,
    #[serde(with = "hex_bytes")]
    pub data: Vec<u8>,
    pub block_number: u64,
    pub tx_hash: H256,
    pub log_index: u64,
    pub removed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiptStatus {
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransactionReceipt {
    pub chain_id: ChainId,
    pub tx_hash: H256,
    pub block_number: u64,
    pub gas_used: u64,
    pub effective_gas_price: u128,
    pub status: ReceiptStatus,
}

impl TransactionReceipt {
    /// `gas_used * effective_gas_price`, in wei.
    pub fn fee_wei(&self) -> u128 {
        self.gas_used as u128 * self.effective_gas_price
    }
}

pub(crate) mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&format_args!("0x{}", hex::encode(v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        crate::types::parse_data(&s).map_err(serde::de::Error::custom)
    }
}

fn field<'a>(obj: &'a Value, key: &str) -> Result<&'a Value, String> {
    obj.get(key).ok_or_else(|| format!("missing field {key:?}"))
}

fn str_field<'a>(obj: &'a Value, key: &str) -> Result<&'a str, String> {
    field(obj, key)?
        .as_str()
        .ok_or_else(|| format!("field {key:?} is not a string"))
}

fn quantity(obj: &Value, key: &str) -> Result<u128, String> {
    parse_quantity(str_field(obj, key)?).map_err(|e| format!("field {key:?}: {e}"))
}

fn quantity_u64(obj: &Value, key: &str) -> Result<u64, String> {
    u64::try_from(quantity(obj, key)?).map_err(|_| format!("field {key:?} exceeds u64"))
}

fn word(obj: &Value, key: &str) -> Result<H256, String> {
    str_field(obj, key)?
        .parse()
        .map_err(|e| format!("field {key:?}: {e}"))
}

pub(crate) fn parse_block(v: &Value) -> Result<BlockInfo, String> {
    if !v.is_object() {
        return Err("block is not an object".into());
    }
    Ok(BlockInfo {
        number: quantity_u64(v, "number")?,
        timestamp: quantity_u64(v, "timestamp")?,
        hash: word(v, "hash")?,
    })
}

pub(crate) fn parse_log(chain_id: ChainId, v: &Value) -> Result<LogEntry, String> {
    if !v.is_object() {
        return Err("log is not an object".into());
    }
    let topics = field(v, "topics")?
        .as_array()
        .ok_or("field \"topics\" is not an array")?
        .iter()
        .map(|t| {
            t.as_str()
                .ok_or_else(|| "topic is not a string".to_string())?
                .parse::<H256>()
                .map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    if topics.len() > 4 {
        return Err(format!("{} topics, at most 4 allowed", topics.len()));
    }
    let removed = match v.get("removed") {
        None | Some(Value::Null) => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => return Err("field \"removed\" is not a boolean".into()),
    };
    Ok(LogEntry {
        chain_id,
        address: str_field(v, "address")?
            .parse()
            .map_err(|e| format!("field \"address\": {e}"))?,
        topics,
        data: parse_data(str_field(v, "data")?).map_err(|e| format!("field \"data\": {e}"))?,
        block_number: quantity_u64(v, "blockNumber")?,
        tx_hash: word(v, "transactionHash")?,
        log_index: quantity_u64(v, "logIndex")?,
        removed,
    })
}

pub(crate) fn parse_receipt(chain_id: ChainId, v: &Value) -> Result<TransactionReceipt, String> {
    if !v.is_object() {
        return Err("receipt is not an object".into());
    }
    let status = match quantity(v, "status")? {
        1 => ReceiptStatus::Success,
        0 => ReceiptStatus::Failure,
        other => return Err(format!("unknown receipt status {other}")),
    };
    Ok(TransactionReceipt {
        chain_id,
        tx_hash: word(v, "transactionHash")?,
        block_number: quantity_u64(v, "blockNumber")?,
        gas_used: quantity_u64(v, "gasUsed")?,
        effective_gas_price: quantity(v, "effectiveGasPrice")?,
        status,
    })
}
