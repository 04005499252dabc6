//! Loading and validation of the run inputs: bridge configs, the chain
//! registry with RPC endpoints, storage selection and daily price tables.
//!
//! A config directory is laid out as
//!
//! ```text
//! <dir>/rpc.toml              chain registry + RPC urls
//! <dir>/storage.toml          storage backend (optional)
//! <dir>/bridges/<name>.toml   one file per bridge
//! ```

mod bridge;
mod chains;
mod prices;
mod storage;

pub use bridge::{
    load_bridge_config, AdapterKind, BridgeConfig, ContractConfig, EventConfig, EventRole, FieldRole,
    RoleSpec, Side, TokenInfo,
};
pub use chains::{ChainEntry, ChainRegistry, RPC_URL_ENV_PREFIX};
pub use prices::{load_price_table, PriceTable};
pub use storage::{StorageConfig, StorageKind};

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error: {reason}")]
    Parse { path: String, reason: String },
    #[error("{path}: invalid {field}: {reason}")]
    Validation {
        path: String,
        field: String,
        reason: String,
    },
    #[error("duplicate price for {token} on {date}")]
    DuplicateKey { token: String, date: String },
    #[error("non-positive price {price} for {token} on {date}")]
    NonPositivePrice {
        token: String,
        date: String,
        price: String,
    },
    #[error("no price for {token} on {date}")]
    PriceMissing { token: String, date: String },
}

pub(crate) fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// A directory holding `rpc.toml`, `bridges/*.toml` and optionally
/// `storage.toml`.
#[derive(Debug, Clone)]
pub struct ConfigDir {
    root: PathBuf,
}

impl ConfigDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn chains(&self) -> Result<ChainRegistry, ConfigError> {
        ChainRegistry::load(&self.root.join("rpc.toml"))
    }

    pub fn bridge_path(&self, name: &str) -> PathBuf {
        self.root.join("bridges").join(format!("{name}.toml"))
    }

    /// Names of every `bridges/*.toml` file, sorted.
    pub fn bridge_names(&self) -> Result<Vec<String>, ConfigError> {
        let dir = self.root.join("bridges");
        let entries = std::fs::read_dir(&dir).map_err(|source| ConfigError::Io {
            path: dir.clone(),
            source,
        })?;
        let mut names = Vec::new();
        for e in entries {
            let p = e
                .map_err(|source| ConfigError::Io {
                    path: dir.clone(),
                    source,
                })?
                .path();
            if p.extension().is_some_and(|x| x == "toml") {
                if let Some(stem) = p.file_stem() {
                    names.push(stem.to_string_lossy().into_owned());
                }
            }
        }
        names.sort();
        Ok(names)
    }

    pub fn bridge(&self, name: &str, registry: &ChainRegistry) -> Result<BridgeConfig, ConfigError> {
        load_bridge_config(&self.bridge_path(name), registry)
    }

    /// `storage.toml` if present.
    pub fn storage(&self) -> Result<Option<StorageConfig>, ConfigError> {
        let p = self.root.join("storage.toml");
        if !p.exists() {
            return Ok(None);
        }
        StorageConfig::load(&p).map(Some)
    }
}
