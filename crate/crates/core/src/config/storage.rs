use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StorageKind {
    Memory,
    Sqlite,
}

/// Storage backend selection. On the command line this is written as
/// `memory` or `sqlite:<path>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageConfig {
    pub kind: StorageKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl StorageConfig {
    pub fn memory() -> Self {
        Self {
            kind: StorageKind::Memory,
            path: None,
        }
    }

    pub fn sqlite(path: impl Into<PathBuf>) -> Self {
        Self {
            kind: StorageKind::Sqlite,
            path: Some(path.into()),
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let origin = path.display().to_string();
        let mut cfg: StorageConfig = toml::from_str(&super::read(path)?).map_err(|e| ConfigError::Parse {
            path: origin.clone(),
            reason: e.message().to_string(),
        })?;
        cfg.validate(&origin)?;
        // relative sqlite paths are taken relative to the config file
        if let (Some(p), Some(dir)) = (&cfg.path, path.parent()) {
            if p.is_relative() {
                cfg.path = Some(dir.join(p));
            }
        }
        Ok(cfg)
    }

    fn validate(&self, origin: &str) -> Result<(), ConfigError> {
        let err = |reason: &str| ConfigError::Validation {
            path: origin.to_string(),
            field: "path".into(),
            reason: reason.into(),
        };
        match (self.kind, &self.path) {
            (StorageKind::Sqlite, None) => Err(err("sqlite storage needs a path")),
            (StorageKind::Memory, Some(_)) => Err(err("memory storage takes no path")),
            _ => Ok(()),
        }
    }
}

impl FromStr for StorageConfig {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "memory" {
            return Ok(Self::memory());
        }
        match s.strip_prefix("sqlite:") {
            Some(p) if !p.is_empty() => Ok(Self::sqlite(p)),
            _ => Err(ConfigError::Validation {
                path: "<storage>".into(),
                field: "kind".into(),
                reason: format!("{s:?}: expected \"memory\" or \"sqlite:<path>\""),
            }),
        }
    }
}

impl fmt::Display for StorageConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.kind, &self.path) {
            (StorageKind::Sqlite, Some(p)) => write!(f, "sqlite:{}", p.display()),
            _ => f.write_str("memory"),
        }
    }
}
