//! Per-bridge extraction: resolve the time window to block ranges, fetch
//! and decode every configured event, attach block time and receipt gas
//! data, and persist the records.

mod clients;

pub use clients::{build_clients, Backend};

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::abi::{decode_log, DecodedEvent};
use crate::config::{BridgeConfig, EventConfig};
use crate::rpc::{BlockInfo, ChainClient, LogEntry, RpcError, SearchMode, TransactionReceipt};
use crate::storage::{EventRecord, Repository, StorageError};
use crate::types::{Address, ChainId, H256};

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("start_ts {start} must be before end_ts {end}")]
    InvalidWindow { start: u64, end: u64 },
    #[error("unknown chain {0}")]
    UnknownChain(String),
    #[error("chain {chain} is not configured for bridge {bridge}")]
    ChainNotInBridge { bridge: String, chain: String },
    #[error("no RPC endpoints for chain {0}")]
    NoEndpoints(String),
    #[error("no client for chain {0}")]
    MissingClient(ChainId),
    #[error("chain {chain_id}: no blocks between {start_ts} and {end_ts}")]
    EmptyRange { chain_id: ChainId, start_ts: u64, end_ts: u64 },
    #[error(transparent)]
    Rpc(#[from] RpcError),
    #[error(transparent)]
    Storage(#[from] StorageError),
}

/// Block range covering `[start_ts, end_ts]` on the client's chain: the
/// first block at or after `start_ts` through the last block at or before
/// `end_ts`. The window is first clipped to the chain's history, so a
/// window running past the head resolves up to the head.
pub fn resolve_range(client: &ChainClient, start_ts: u64, end_ts: u64) -> Result<(u64, u64), ExtractError> {
    if start_ts >= end_ts {
        return Err(ExtractError::InvalidWindow {
            start: start_ts,
            end: end_ts,
        });
    }
    let empty = || ExtractError::EmptyRange {
        chain_id: client.chain_id(),
        start_ts,
        end_ts,
    };
    let head = client.block_number()?;
    let genesis_ts = client.get_block(0)?.timestamp;
    let head_ts = client.get_block(head)?.timestamp;
    let (lo, hi) = (start_ts.max(genesis_ts), end_ts.min(head_ts));
    if lo > hi {
        return Err(empty());
    }
    let start = client.find_block_by_timestamp(lo, SearchMode::AtOrAfter)?;
    let end = client.find_block_by_timestamp(hi, SearchMode::AtOrBefore)?;
    if start > end {
        return Err(empty());
    }
    Ok((start, end))
}

/// Deterministic identifier of an extraction run.
pub fn run_id(bridge: &str, start_ts: u64, end_ts: u64) -> String {
    format!("{bridge}-{start_ts}-{end_ts}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChunkFailure {
    pub chain_id: ChainId,
    pub from_block: u64,
    pub to_block: u64,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub chain_id: ChainId,
    pub start_block: Option<u64>,
    pub end_block: Option<u64>,
    /// Persisted events per event name (already-present rows included).
    pub events: BTreeMap<String, usize>,
    /// Rows that were not in the store before this run.
    pub inserted: usize,
    pub removed_skipped: usize,
    pub receipts_fetched: usize,
    pub rpc_calls: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtractionReport {
    pub bridge: String,
    pub run_id: String,
    pub chains: Vec<ChainReport>,
    pub failures: Vec<ChunkFailure>,
}

impl ExtractionReport {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn total_events(&self) -> usize {
        self.chains.iter().flat_map(|c| c.events.values()).sum()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "bridge {} run {}", self.bridge, self.run_id);
        for c in &self.chains {
            match (c.start_block, c.end_block) {
                (Some(a), Some(b)) => {
                    let _ = writeln!(s, "  chain {} blocks {a}..={b}", c.chain_id);
                }
                _ => {
                    let _ = writeln!(s, "  chain {} no blocks in window", c.chain_id);
                }
            }
            for (name, n) in &c.events {
                let _ = writeln!(s, "    {name:<24} {n}");
            }
            let _ = writeln!(
                s,
                "    inserted {} / removed skipped {} / receipts {} / rpc calls {}",
                c.inserted, c.removed_skipped, c.receipts_fetched, c.rpc_calls
            );
        }
        for f in &self.failures {
            let _ = writeln!(s, "  FAILED chain {} blocks {}..={}: {}", f.chain_id, f.from_block, f.to_block, f.error);
        }
        s
    }
}

/// Extracts all configured events of `bridge` on `chains` within
/// `[start_ts, end_ts]` and persists them into `repo`.
///
/// Chains run in parallel. A log chunk whose retries are exhausted, or
/// whose logs cannot be decoded, is recorded in the report and the run
/// carries on; a replay miss or a storage error aborts the run.
pub fn extract(
    bridge: &BridgeConfig,
    chains: &[ChainId],
    start_ts: u64,
    end_ts: u64,
    clients: &BTreeMap<ChainId, ChainClient>,
    repo: &dyn Repository,
) -> Result<ExtractionReport, ExtractError> {
    if start_ts >= end_ts {
        return Err(ExtractError::InvalidWindow {
            start: start_ts,
            end: end_ts,
        });
    }
    let configured = bridge.chain_ids();
    for &c in chains {
        if !configured.contains(&c) {
            return Err(ExtractError::ChainNotInBridge {
                bridge: bridge.name.clone(),
                chain: c.to_string(),
            });
        }
        if !clients.contains_key(&c) {
            return Err(ExtractError::MissingClient(c));
        }
    }
    for name in bridge.all_event_names() {
        repo.ensure_relation(&bridge.relation_name(&name))?;
    }
    let run = run_id(&bridge.name, start_ts, end_ts);
    let mut chains: Vec<ChainId> = chains.to_vec();
    chains.sort();
    chains.dedup();

    let results: Vec<Result<(ChainReport, Vec<ChunkFailure>), ExtractError>> = std::thread::scope(|s| {
        let handles: Vec<_> = chains
            .iter()
            .map(|&c| {
                let client = &clients[&c];
                let run = run.as_str();
                s.spawn(move || extract_chain(bridge, client, start_ts, end_ts, run, repo))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("extraction worker panicked")).collect()
    });

    let mut report = ExtractionReport {
        bridge: bridge.name.clone(),
        run_id: run,
        chains: Vec::new(),
        failures: Vec::new(),
    };
    for r in results {
        let (chain, failures) = r?;
        report.chains.push(chain);
        report.failures.extend(failures);
    }
    Ok(report)
}

fn extract_chain(
    bridge: &BridgeConfig,
    client: &ChainClient,
    start_ts: u64,
    end_ts: u64,
    run: &str,
    repo: &dyn Repository,
) -> Result<(ChainReport, Vec<ChunkFailure>), ExtractError> {
    let chain_id = client.chain_id();
    let calls_before = client.rpc_calls();
    let mut report = ChainReport {
        chain_id,
        ..ChainReport::default()
    };
    let mut failures = Vec::new();

    // (contract, topic0) -> event config
    let mut targets: HashMap<(Address, H256), &EventConfig> = HashMap::new();
    for (c, e) in bridge.events() {
        if c.chain_id == chain_id {
            targets.insert((c.address, e.topic0), e);
            report.events.entry(e.abi.name.clone()).or_insert(0);
        }
    }
    let addresses: Vec<Address> = targets.keys().map(|k| k.0).collect();
    let topics: Vec<H256> = targets.keys().map(|k| k.1).collect();

    let (from, to) = match resolve_range(client, start_ts, end_ts) {
        Ok(r) => r,
        Err(ExtractError::EmptyRange { .. }) => {
            report.rpc_calls = client.rpc_calls() - calls_before;
            return Ok((report, failures));
        }
        Err(ExtractError::Rpc(e)) if !e.is_fatal() => {
            failures.push(ChunkFailure {
                chain_id,
                from_block: 0,
                to_block: 0,
                error: format!("resolving block range: {e}"),
            });
            report.rpc_calls = client.rpc_calls() - calls_before;
            return Ok((report, failures));
        }
        Err(e) => return Err(e),
    };
    report.start_block = Some(from);
    report.end_block = Some(to);

    let mut blocks: HashMap<u64, BlockInfo> = HashMap::new();
    let mut receipts: HashMap<H256, TransactionReceipt> = HashMap::new();
    for chunk in client.fetch_log_chunks(&addresses, &topics, from, to)? {
        let fail = |error: String| ChunkFailure {
            chain_id,
            from_block: chunk.range.from,
            to_block: chunk.range.to,
            error,
        };
        let logs = match chunk.result {
            Ok(l) => l,
            Err(e) if e.is_fatal() => return Err(e.into()),
            Err(e) => {
                failures.push(fail(e.to_string()));
                continue;
            }
        };
        match process_chunk(bridge, client, &targets, logs, &mut blocks, &mut receipts, run, &mut report) {
            Ok(by_relation) => {
                for (relation, (event_name, records)) in by_relation {
                    report.inserted += repo.put_events(&relation, &records)?;
                    *report.events.entry(event_name).or_insert(0) += records.len();
                }
            }
            Err(ChunkError::Fatal(e)) => return Err(e),
            Err(ChunkError::Failed(msg)) => failures.push(fail(msg)),
        }
    }
    report.rpc_calls = client.rpc_calls() - calls_before;
    Ok((report, failures))
}

enum ChunkError {
    Fatal(ExtractError),
    Failed(String),
}

impl From<RpcError> for ChunkError {
    fn from(e: RpcError) -> Self {
        if e.is_fatal() {
            ChunkError::Fatal(e.into())
        } else {
            ChunkError::Failed(e.to_string())
        }
    }
}

type RelationBatch = BTreeMap<String, (String, Vec<EventRecord>)>;

/// Decodes one chunk's logs. Nothing from a chunk is persisted unless the
/// whole chunk succeeds, so a retried run sees either all of it or none.
#[allow(clippy::too_many_arguments)]
fn process_chunk(
    bridge: &BridgeConfig,
    client: &ChainClient,
    targets: &HashMap<(Address, H256), &EventConfig>,
    logs: Vec<LogEntry>,
    blocks: &mut HashMap<u64, BlockInfo>,
    receipts: &mut HashMap<H256, TransactionReceipt>,
    run: &str,
    report: &mut ChainReport,
) -> Result<RelationBatch, ChunkError> {
    let mut out: RelationBatch = BTreeMap::new();
    for log in logs {
        if log.removed {
            report.removed_skipped += 1;
            continue;
        }
        let Some(topic0) = log.topics.first() else { continue };
        let Some(cfg) = targets.get(&(log.address, *topic0)) else {
            continue;
        };
        let block = match blocks.get(&log.block_number) {
            Some(b) => *b,
            None => {
                let b = client.get_block(log.block_number)?;
                blocks.insert(b.number, b);
                b
            }
        };
        let receipt = match receipts.get(&log.tx_hash) {
            Some(r) => r.clone(),
            None => {
                let r = client.get_receipt(log.tx_hash)?;
                report.receipts_fetched += 1;
                receipts.insert(log.tx_hash, r.clone());
                r
            }
        };
        let event: DecodedEvent = decode_log(&bridge.name, &cfg.abi, &log, &block).map_err(|e| {
            ChunkError::Failed(format!(
                "decoding {} log {}/{}: {e}",
                cfg.abi.name, log.tx_hash, log.log_index
            ))
        })?;
        let relation = bridge.relation_name(&cfg.abi.name);
        out.entry(relation)
            .or_insert_with(|| (cfg.abi.name.clone(), Vec::new()))
            .1
            .push(EventRecord {
                event,
                run_id: run.to_string(),
                gas_used: receipt.gas_used,
                effective_gas_price: receipt.effective_gas_price,
                status: receipt.status,
            });
    }
    Ok(out)
}
