use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use super::ExtractError;
use crate::config::ChainRegistry;
use crate::rpc::{ChainClient, HttpTransport, ReplayBackend, RetryPolicy, RpcEndpointPool};
use crate::types::ChainId;

/// Where chain data comes from.
pub enum Backend {
    Http { timeout: Duration, retry: RetryPolicy },
    /// Recorded responses, one sub-directory per chain name.
    Replay(ReplayBackend),
}

/// Builds one client per requested chain.
pub fn build_clients(
    registry: &ChainRegistry,
    chains: &[ChainId],
    backend: &Backend,
) -> Result<BTreeMap<ChainId, ChainClient>, ExtractError> {
    let mut out = BTreeMap::new();
    for &id in chains {
        let entry = registry.by_id(id).ok_or(ExtractError::UnknownChain(id.to_string()))?;
        let client = match backend {
            Backend::Http { timeout, retry } => {
                let pool = entry
                    .pool()
                    .ok_or_else(|| ExtractError::NoEndpoints(entry.name.clone()))?;
                ChainClient::new(pool, Arc::new(HttpTransport::new(*timeout))).with_retry(*retry)
            }
            Backend::Replay(replay) => {
                let transport = replay
                    .chain(&entry.name)
                    .ok_or_else(|| ExtractError::NoEndpoints(format!("{} (no replay fixture)", entry.name)))?;
                let pool = RpcEndpointPool::new(id, vec![format!("replay://{}", entry.name)], entry.max_chunk());
                ChainClient::new(pool, transport).with_retry(RetryPolicy::no_delay(1))
            }
        };
        out.insert(id, client);
    }
    Ok(out)
}
