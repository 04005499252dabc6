use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ConfigError;
use crate::rpc::{RpcEndpointPool, DEFAULT_MAX_CHUNK};
use crate::types::{ChainDescriptor, ChainId, Layer};

/// Prefix of the per-chain environment override, e.g.
/// `CCX_RPC_URLS_CHAINA="https://a,https://b"`.
pub const RPC_URL_ENV_PREFIX: &str = "CCX_RPC_URLS_";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainEntry {
    pub chain_id: ChainId,
    pub name: String,
    pub layer: Layer,
    pub native_symbol: String,
    #[serde(default)]
    pub rpc_urls: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_chunk: Option<u64>,
}

impl ChainEntry {
    pub fn descriptor(&self) -> ChainDescriptor {
        ChainDescriptor {
            chain_id: self.chain_id,
            name: self.name.clone(),
            layer: self.layer,
            native_symbol: self.native_symbol.clone(),
        }
    }

    pub fn max_chunk(&self) -> u64 {
        self.max_chunk.unwrap_or(DEFAULT_MAX_CHUNK)
    }

    /// Endpoint pool over the configured URLs. `None` when no URL is set.
    pub fn pool(&self) -> Option<RpcEndpointPool> {
        if self.rpc_urls.is_empty() {
            return None;
        }
        Some(RpcEndpointPool::new(self.chain_id, self.rpc_urls.clone(), self.max_chunk()))
    }

    fn env_var(&self) -> String {
        let mut s = String::from(RPC_URL_ENV_PREFIX);
        s.extend(
            self.name
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_uppercase() } else { '_' }),
        );
        s
    }
}

/// Chain registry and RPC endpoints, loaded from `rpc.toml`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainRegistry {
    pub chains: Vec<ChainEntry>,
}

impl ChainRegistry {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&super::read(path)?, &path.display().to_string())
    }

    pub fn from_toml_str(s: &str, origin: &str) -> Result<Self, ConfigError> {
        let reg: ChainRegistry = toml::from_str(s).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            reason: e.message().to_string(),
        })?;
        reg.validate(origin)?;
        Ok(reg)
    }

    pub fn validate(&self, origin: &str) -> Result<(), ConfigError> {
        let invalid = |i: usize, field: &str, reason: String| ConfigError::Validation {
            path: origin.to_string(),
            field: format!("chains[{i}].{field}"),
            reason,
        };
        let mut ids = HashSet::new();
        let mut names = HashSet::new();
        for (i, c) in self.chains.iter().enumerate() {
            if c.chain_id == 0 {
                return Err(invalid(i, "chain_id", "must be positive".into()));
            }
            if !ids.insert(c.chain_id) {
                return Err(invalid(i, "chain_id", format!("duplicate chain id {}", c.chain_id)));
            }
            if c.name.is_empty() || !c.name.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-') {
                return Err(invalid(i, "name", format!("{:?} is not a short identifier", c.name)));
            }
            if !names.insert(c.name.as_str()) {
                return Err(invalid(i, "name", format!("duplicate chain name {:?}", c.name)));
            }
            if c.native_symbol.is_empty() {
                return Err(invalid(i, "native_symbol", "must not be empty".into()));
            }
            if c.max_chunk == Some(0) {
                return Err(invalid(i, "max_chunk", "must be at least 1".into()));
            }
            for (j, u) in c.rpc_urls.iter().enumerate() {
                if !(u.starts_with("http://") || u.starts_with("https://")) {
                    return Err(invalid(i, &format!("rpc_urls[{j}]"), format!("{u:?} is not an http(s) URL")));
                }
            }
        }
        Ok(())
    }

    /// Replaces the URL list of every chain whose override variable is set.
    /// Values are comma separated.
    pub fn apply_env_overrides(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        for c in &mut self.chains {
            if let Some(v) = lookup(&c.env_var()) {
                let urls: Vec<String> = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect();
                if !urls.is_empty() {
                    c.rpc_urls = urls;
                }
            }
        }
    }

    pub fn by_id(&self, id: ChainId) -> Option<&ChainEntry> {
        self.chains.iter().find(|c| c.chain_id == id)
    }

    pub fn by_name(&self, name: &str) -> Option<&ChainEntry> {
        self.chains.iter().find(|c| c.name == name)
    }

    pub fn layer(&self, id: ChainId) -> Option<Layer> {
        self.by_id(id).map(|c| c.layer)
    }

    pub fn name_of(&self, id: ChainId) -> String {
        self.by_id(id).map_or_else(|| id.to_string(), |c| c.name.clone())
    }
}
