#![allow(dead_code)]

pub mod fixture;
pub mod oracles;

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use ccx_core::config::{BridgeConfig, ChainRegistry};
use ccx_core::rpc::{Transport, TransportError};
use serde_json::{json, Value};

pub fn hex_u64(n: u64) -> String {
    format!("0x{n:x}")
}

pub fn parse_hex(s: &str) -> u64 {
    u64::from_str_radix(s.trim_start_matches("0x"), 16).unwrap()
}

pub fn word_u128(v: u128) -> String {
    format!("{v:064x}")
}

pub fn word_addr(a: &str) -> String {
    format!("{:0>64}", a.trim_start_matches("0x"))
}

pub fn tx_hash(seed: u64) -> String {
    format!("0x{seed:064x}")
}

/// In-memory chain answering the four JSON-RPC methods directly, without
/// any recorded fixture.
#[derive(Default)]
pub struct SyntheticChain {
    pub timestamps: Vec<u64>,
    pub logs: Vec<Value>,
    pub receipts: HashMap<String, Value>,
    /// getLogs ranges that always answer with a node error.
    pub failing: Mutex<BTreeSet<(u64, u64)>>,
    /// After this many getLogs calls every call is a fatal miss.
    pub abort_after_logs: Option<usize>,
    pub logs_calls: AtomicUsize,
}

impl SyntheticChain {
    pub fn regular(n_blocks: u64, block_time: u64) -> Self {
        Self::with_timestamps((0..n_blocks).map(|i| i * block_time).collect())
    }

    pub fn with_timestamps(timestamps: Vec<u64>) -> Self {
        Self {
            timestamps,
            ..Self::default()
        }
    }

    pub fn block_hash(n: u64) -> String {
        format!("0x{:064x}", 0xb10c_0000_0000u64 + n)
    }

    /// Adds a log and its receipt (if the tx has none yet).
    #[allow(clippy::too_many_arguments)]
    pub fn push_log(&mut self, address: &str, topics: Vec<String>, data: String, block: u64, tx: u64, log_index: u64, removed: bool) {
        let hash = tx_hash(tx);
        self.logs.push(json!({
            "address": address,
            "topics": topics,
            "data": format!("0x{data}"),
            "blockNumber": hex_u64(block),
            "transactionHash": hash,
            "logIndex": hex_u64(log_index),
            "removed": removed,
        }));
        self.receipts.entry(hash.clone()).or_insert_with(|| {
            json!({
                "transactionHash": hash,
                "blockNumber": hex_u64(block),
                "gasUsed": hex_u64(21_000 + tx),
                "effectiveGasPrice": hex_u64(1_000_000_000 + tx),
                "status": "0x1",
            })
        });
    }
}

impl Transport for SyntheticChain {
    fn call(&self, _url: &str, method: &str, params: &Value) -> Result<Value, TransportError> {
        match method {
            "eth_blockNumber" => Ok(json!(hex_u64(self.timestamps.len() as u64 - 1))),
            "eth_getBlockByNumber" => {
                let n = parse_hex(params[0].as_str().unwrap());
                Ok(match self.timestamps.get(n as usize) {
                    Some(ts) => json!({"number": hex_u64(n), "timestamp": hex_u64(*ts), "hash": Self::block_hash(n)}),
                    None => Value::Null,
                })
            }
            "eth_getTransactionReceipt" => {
                Ok(self.receipts.get(params[0].as_str().unwrap()).cloned().unwrap_or(Value::Null))
            }
            "eth_getLogs" => {
                let calls = self.logs_calls.fetch_add(1, Ordering::SeqCst);
                if self.abort_after_logs.is_some_and(|k| calls >= k) {
                    return Err(TransportError::ReplayMiss {
                        method: method.into(),
                        params: params.to_string(),
                    });
                }
                let f = &params[0];
                let from = parse_hex(f["fromBlock"].as_str().unwrap());
                let to = parse_hex(f["toBlock"].as_str().unwrap());
                if self.failing.lock().unwrap().contains(&(from, to)) {
                    return Err(TransportError::Rpc {
                        code: -32000,
                        message: "upstream unavailable".into(),
                    });
                }
                let addrs: Vec<String> = f["address"].as_array().unwrap().iter().map(|a| a.as_str().unwrap().to_lowercase()).collect();
                let topics: Vec<String> = f["topics"][0].as_array().unwrap().iter().map(|t| t.as_str().unwrap().to_lowercase()).collect();
                let out: Vec<Value> = self
                    .logs
                    .iter()
                    .filter(|l| {
                        let b = parse_hex(l["blockNumber"].as_str().unwrap());
                        b >= from
                            && b <= to
                            && addrs.contains(&l["address"].as_str().unwrap().to_lowercase())
                            && topics.contains(&l["topics"][0].as_str().unwrap().to_lowercase())
                    })
                    .cloned()
                    .collect();
                Ok(json!(out))
            }
            other => Err(TransportError::Rpc {
                code: -32601,
                message: format!("method {other} not found"),
            }),
        }
    }
}

pub const RPC_TOML: &str = r#"
[[chains]]
chain_id = 1
name = "chainA"
layer = "L1"
native_symbol = "ETH"
max_chunk = 10

[[chains]]
chain_id = 10
name = "chainB"
layer = "L2"
native_symbol = "ETH"
max_chunk = 10
"#;

pub const SRC_CONTRACT: &str = "0x1111111111111111111111111111111111111111";
pub const DST_CONTRACT: &str = "0x2222222222222222222222222222222222222222";
pub const TOKEN_A: &str = "0x00000000000000000000000000000000000000a1";
pub const TOKEN_B: &str = "0x00000000000000000000000000000000000000b1";

pub const MSG_BRIDGE_TOML: &str = r#"
name = "synth"
adapter = "message_finality"

[[tokens]]
chain_id = 1
address = "0x00000000000000000000000000000000000000a1"
symbol = "USDC"
decimals = 6

[[tokens]]
chain_id = 10
address = "0x00000000000000000000000000000000000000b1"
symbol = "USDC"
decimals = 6

[[contracts]]
chain_id = 1
address = "0x1111111111111111111111111111111111111111"

[[contracts.events]]
role = "deposit"
abi = '{"type":"event","name":"Sent","inputs":[{"name":"id","type":"uint256","indexed":true},{"name":"sender","type":"address","indexed":false},{"name":"recipient","type":"address","indexed":false},{"name":"token","type":"address","indexed":false},{"name":"amount","type":"uint256","indexed":false}]}'
fields = { id = "id", sender = "sender", recipient = "recipient", token = "token", amount = "amount" }

[[contracts]]
chain_id = 10
address = "0x2222222222222222222222222222222222222222"

[[contracts.events]]
role = "withdrawal"
abi = '{"type":"event","name":"Received","inputs":[{"name":"id","type":"uint256","indexed":true},{"name":"recipient","type":"address","indexed":false},{"name":"token","type":"address","indexed":false},{"name":"amount","type":"uint256","indexed":false}]}'
fields = { id = "id", recipient = "recipient", token = "token", amount = "amount" }
"#;

pub fn registry() -> ChainRegistry {
    ChainRegistry::from_toml_str(RPC_TOML, "rpc.toml").unwrap()
}

pub fn msg_bridge() -> BridgeConfig {
    BridgeConfig::from_toml_str(MSG_BRIDGE_TOML, "synth.toml", &registry()).unwrap()
}

pub fn topic0_of(bridge: &BridgeConfig, event: &str) -> String {
    bridge.events().find(|(_, e)| e.abi.name == event).unwrap().1.topic0.to_string()
}

pub fn user(i: u64) -> String {
    format!("0x{:040x}", 0xabc0 + i)
}

/// Source-side `Sent` log data: sender, recipient, token, amount.
pub fn sent_data(id: u64, amount: u128) -> String {
    [word_addr(&user(id)), word_addr(&user(id + 100)), word_addr(TOKEN_A), word_u128(amount)].concat()
}

pub fn received_data(id: u64, amount: u128) -> String {
    [word_addr(&user(id + 100)), word_addr(TOKEN_B), word_u128(amount)].concat()
}
