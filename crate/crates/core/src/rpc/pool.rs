use std::sync::atomic::{AtomicUsize, Ordering};

use crate::types::ChainId;

pub const DEFAULT_MAX_CHUNK: u64 = 2000;

/// Round-robin pool of RPC URLs for one chain.
#[derive(Debug)]
pub struct RpcEndpointPool {
    chain_id: ChainId,
    urls: Vec<String>,
    cursor: AtomicUsize,
    max_chunk: u64,
}

impl RpcEndpointPool {
    /// Panics if `urls` is empty or `max_chunk` is zero; config validation
    /// rejects both before a pool is built.
    pub fn new(chain_id: ChainId, urls: Vec<String>, max_chunk: u64) -> Self {
        assert!(!urls.is_empty(), "endpoint pool needs at least one url");
        assert!(max_chunk >= 1, "max_chunk must be at least 1");
        Self {
            chain_id,
            urls,
            cursor: AtomicUsize::new(0),
            max_chunk,
        }
    }

    pub fn chain_id(&self) -> ChainId {
        self.chain_id
    }

    pub fn urls(&self) -> &[String] {
        &self.urls
    }

    pub fn max_chunk(&self) -> u64 {
        self.max_chunk
    }

    pub fn cursor(&self) -> usize {
        self.cursor.load(Ordering::SeqCst)
    }

    /// Returns the URL under the cursor and advances it modulo the pool size.
    pub fn next_endpoint(&self) -> &str {
        let len = self.urls.len();
        let prev = self
            .cursor
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |c| Some((c + 1) % len))
            .expect("closure always returns Some");
        &self.urls[prev]
    }
}
