use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde_json::{json, Value};

use super::chunk::{chunk_ranges, BlockRange};
use super::pool::RpcEndpointPool;
use super::transport::{Transport, TransportError};
use super::wire::{self, BlockInfo, LogEntry, TransactionReceipt};
use super::RpcError;
use crate::types::{format_quantity, parse_quantity, Address, ChainId, H256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    /// Total attempts per request, each on the next endpoint.
    pub attempts: u32,
    /// Delay before the second attempt; doubles afterwards.
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            base_delay: Duration::from_millis(500),
        }
    }
}

impl RetryPolicy {
    pub fn no_delay(attempts: u32) -> Self {
        Self {
            attempts,
            base_delay: Duration::ZERO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Lowest block with timestamp >= target.
    AtOrAfter,
    /// Highest block with timestamp <= target.
    AtOrBefore,
}

/// Outcome of one `eth_getLogs` sub-range query.
#[derive(Debug)]
pub struct ChunkResult {
    pub range: BlockRange,
    pub result: Result<Vec<LogEntry>, RpcError>,
}

pub const DEFAULT_PARALLELISM: usize = 4;

/// Read access to one chain through a rotating endpoint pool.
pub struct ChainClient {
    pool: RpcEndpointPool,
    transport: Arc<dyn Transport>,
    retry: RetryPolicy,
    parallelism: usize,
    calls: AtomicU64,
}

type ChunkLogs = Result<Vec<LogEntry>, RpcError>;

impl ChainClient {
    pub fn new(pool: RpcEndpointPool, transport: Arc<dyn Transport>) -> Self {
        Self {
            pool,
            transport,
            retry: RetryPolicy::default(),
            parallelism: DEFAULT_PARALLELISM,
            calls: AtomicU64::new(0),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        assert!(retry.attempts >= 1);
        self.retry = retry;
        self
    }

    pub fn with_parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism.max(1);
        self
    }

    pub fn chain_id(&self) -> ChainId {
        self.pool.chain_id()
    }

    pub fn pool(&self) -> &RpcEndpointPool {
        &self.pool
    }

    /// Number of transport calls issued, retries included.
    pub fn rpc_calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn request(&self, method: &str, params: &Value) -> Result<Value, RpcError> {
        let chain_id = self.chain_id();
        let mut last = None;
        for attempt in 0..self.retry.attempts {
            if attempt > 0 && !self.retry.base_delay.is_zero() {
                std::thread::sleep(self.retry.base_delay * 2u32.pow(attempt - 1));
            }
            let url = self.pool.next_endpoint();
            self.calls.fetch_add(1, Ordering::Relaxed);
            match self.transport.call(url, method, params) {
                Ok(v) => return Ok(v),
                Err(TransportError::ReplayMiss { method, params }) => {
                    return Err(RpcError::ReplayMiss {
                        chain_id,
                        method,
                        params,
                    })
                }
                Err(TransportError::Malformed(reason)) => {
                    return Err(RpcError::MalformedResponse {
                        chain_id,
                        method: method.to_string(),
                        reason,
                    })
                }
                Err(e) => {
                    log::debug!("chain {chain_id} {method} via {url} failed: {e}");
                    last = Some(e);
                }
            }
        }
        Err(RpcError::RpcExhausted {
            chain_id,
            method: method.to_string(),
            attempts: self.retry.attempts,
            last: last.expect("at least one attempt"),
        })
    }

    fn malformed(&self, method: &str, reason: String) -> RpcError {
        RpcError::MalformedResponse {
            chain_id: self.chain_id(),
            method: method.to_string(),
            reason,
        }
    }

    pub fn block_number(&self) -> Result<u64, RpcError> {
        const M: &str = "eth_blockNumber";
        let v = self.request(M, &json!([]))?;
        let s = v
            .as_str()
            .ok_or_else(|| self.malformed(M, "result is not a string".into()))?;
        let n = parse_quantity(s).map_err(|e| self.malformed(M, e.to_string()))?;
        u64::try_from(n).map_err(|_| self.malformed(M, "block number exceeds u64".into()))
    }

    pub fn get_block(&self, number: u64) -> Result<BlockInfo, RpcError> {
        const M: &str = "eth_getBlockByNumber";
        let v = self.request(M, &json!([format_quantity(number), false]))?;
        if v.is_null() {
            return Err(RpcError::NotFound {
                chain_id: self.chain_id(),
                what: format!("block {number}"),
            });
        }
        let block = wire::parse_block(&v).map_err(|e| self.malformed(M, e))?;
        if block.number != number {
            return Err(self.malformed(M, format!("asked for block {number}, got {}", block.number)));
        }
        Ok(block)
    }

    pub fn get_receipt(&self, tx_hash: H256) -> Result<TransactionReceipt, RpcError> {
        const M: &str = "eth_getTransactionReceipt";
        let v = self.request(M, &json!([tx_hash.to_string()]))?;
        if v.is_null() {
            return Err(RpcError::NotFound {
                chain_id: self.chain_id(),
                what: format!("receipt {tx_hash}"),
            });
        }
        wire::parse_receipt(self.chain_id(), &v).map_err(|e| self.malformed(M, e))
    }

    /// The `eth_getLogs` filter used for one sub-range.
    pub fn log_filter(addresses: &[Address], topic0s: &[H256], range: BlockRange) -> Value {
        let mut addrs: Vec<String> = addresses.iter().map(|a| a.to_string()).collect();
        addrs.sort();
        addrs.dedup();
        let mut topics: Vec<String> = topic0s.iter().map(|t| t.to_string()).collect();
        topics.sort();
        topics.dedup();
        json!([{
            "address": addrs,
            "fromBlock": format_quantity(range.from),
            "toBlock": format_quantity(range.to),
            "topics": [topics],
        }])
    }

    fn get_logs_range(
        &self,
        addresses: &[Address],
        topic0s: &[H256],
        range: BlockRange,
    ) -> Result<Vec<LogEntry>, RpcError> {
        const M: &str = "eth_getLogs";
        let v = self.request(M, &Self::log_filter(addresses, topic0s, range))?;
        let arr = v
            .as_array()
            .ok_or_else(|| self.malformed(M, "result is not an array".into()))?;
        arr.iter()
            .map(|l| {
                let log = wire::parse_log(self.chain_id(), l).map_err(|e| self.malformed(M, e))?;
                if log.block_number < range.from || log.block_number > range.to {
                    return Err(self.malformed(
                        M,
                        format!("log at block {} outside [{}, {}]", log.block_number, range.from, range.to),
                    ));
                }
                Ok(log)
            })
            .collect()
    }

    /// Issues one query per sub-range of at most `max_chunk` blocks, with
    /// bounded parallelism, and returns per-chunk outcomes in range order.
    pub fn fetch_log_chunks(
        &self,
        addresses: &[Address],
        topic0s: &[H256],
        from_block: u64,
        to_block: u64,
    ) -> Result<Vec<ChunkResult>, RpcError> {
        if from_block > to_block {
            return Err(RpcError::InvalidRange {
                from: from_block,
                to: to_block,
            });
        }
        let ranges = chunk_ranges(from_block, to_block, self.pool.max_chunk());
        let slots: Vec<Mutex<Option<ChunkLogs>>> = ranges.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = self.parallelism.min(ranges.len());
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(range) = ranges.get(i) else { break };
                    let r = self.get_logs_range(addresses, topic0s, *range);
                    *slots[i].lock().unwrap() = Some(r);
                });
            }
        });
        Ok(ranges
            .into_iter()
            .zip(slots)
            .map(|(range, slot)| ChunkResult {
                range,
                result: slot.into_inner().unwrap().expect("every chunk is fetched"),
            })
            .collect())
    }

    /// All logs in `[from_block, to_block]`, sorted by `(block, log_index)`
    /// with duplicates removed. Fails on the first chunk that fails.
    pub fn get_logs_chunked(
        &self,
        addresses: &[Address],
        topic0s: &[H256],
        from_block: u64,
        to_block: u64,
    ) -> Result<Vec<LogEntry>, RpcError> {
        let mut logs = Vec::new();
        for chunk in self.fetch_log_chunks(addresses, topic0s, from_block, to_block)? {
            logs.extend(chunk.result?);
        }
        Ok(sort_logs(logs))
    }

    /// Binary search for the block closest to `target_ts` in the given
    /// direction. Blocks fetched during one call are cached.
    pub fn find_block_by_timestamp(&self, target_ts: u64, mode: SearchMode) -> Result<u64, RpcError> {
        let head = self.block_number()?;
        let mut cache: HashMap<u64, u64> = HashMap::new();
        let mut ts = |n: u64| -> Result<u64, RpcError> {
            if let Some(t) = cache.get(&n) {
                return Ok(*t);
            }
            let t = self.get_block(n)?.timestamp;
            cache.insert(n, t);
            Ok(t)
        };
        let genesis_ts = ts(0)?;
        let head_ts = ts(head)?;
        if target_ts < genesis_ts || target_ts > head_ts {
            return Err(RpcError::OutOfRange {
                chain_id: self.chain_id(),
                target: target_ts,
                genesis_ts,
                head_ts,
            });
        }
        let (mut lo, mut hi) = (0u64, head);
        match mode {
            SearchMode::AtOrAfter => {
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    if ts(mid)? >= target_ts {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
            }
            SearchMode::AtOrBefore => {
                while lo < hi {
                    let mid = lo + (hi - lo).div_ceil(2);
                    if ts(mid)? <= target_ts {
                        lo = mid;
                    } else {
                        hi = mid - 1;
                    }
                }
            }
        }
        Ok(lo)
    }
}

pub(crate) fn sort_logs(mut logs: Vec<LogEntry>) -> Vec<LogEntry> {
    logs.sort_by(|a, b| {
        (a.block_number, a.log_index, a.tx_hash).cmp(&(b.block_number, b.log_index, b.tx_hash))
    });
    logs.dedup_by(|a, b| a.tx_hash == b.tx_hash && a.log_index == b.log_index);
    logs
}
