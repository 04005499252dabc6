//! Fixture-backed transport.
//!
//! Fixture layout: one directory per chain (named after the chain in the RPC
//! config). Inside it, every `*.jsonl` file holds one
//! `{"request": {"method", "params"}, "response": {"result"|"error"}}` object
//! per line, and every `*.json` file holds exactly one such object.
//! Responses are keyed by `(method, canonical params)`; a request without a
//! recorded response is an error, never an empty result.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, BufRead};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Deserialize;
use serde_json::Value;

use super::transport::{unwrap_response, Transport, TransportError};

/// Serializes JSON with object keys sorted at every level.
pub fn canonical_json(v: &Value) -> String {
    fn sort(v: &Value) -> Value {
        match v {
            Value::Object(m) => {
                let sorted: BTreeMap<_, _> = m.iter().map(|(k, v)| (k.clone(), sort(v))).collect();
                Value::Object(sorted.into_iter().collect())
            }
            Value::Array(a) => Value::Array(a.iter().map(sort).collect()),
            other => other.clone(),
        }
    }
    // serde_json keeps insertion order only with `preserve_order`; the
    // BTreeMap pass above makes the output independent of that feature.
    serde_json::to_string(&sort(v)).expect("json values always serialize")
}

#[derive(Debug, Deserialize)]
struct Recorded {
    request: RecordedRequest,
    response: Value,
}

#[derive(Debug, Deserialize)]
struct RecordedRequest {
    method: String,
    #[serde(default)]
    params: Value,
}

#[derive(Debug, Default)]
pub struct ReplayTransport {
    responses: HashMap<(String, String), Value>,
    hits: AtomicU64,
}

impl ReplayTransport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a response object (`{"result": ..}` or `{"error": ..}`).
    pub fn insert(&mut self, method: &str, params: &Value, response: Value) {
        self.responses
            .insert((method.to_string(), canonical_json(params)), response);
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn load_dir(dir: &Path) -> io::Result<Self> {
        let mut out = Self::new();
        let mut files: Vec<PathBuf> = fs::read_dir(dir)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        files.sort();
        for path in files {
            match path.extension().and_then(|e| e.to_str()) {
                Some("jsonl") => {
                    let reader = io::BufReader::new(fs::File::open(&path)?);
                    for (i, line) in reader.lines().enumerate() {
                        let line = line?;
                        if line.trim().is_empty() {
                            continue;
                        }
                        let rec: Recorded = serde_json::from_str(&line).map_err(|e| {
                            invalid(format!("{}:{}: {e}", path.display(), i + 1))
                        })?;
                        out.add_recorded(rec, &path)?;
                    }
                }
                Some("json") => {
                    let text = fs::read_to_string(&path)?;
                    let rec: Recorded = serde_json::from_str(&text)
                        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
                    out.add_recorded(rec, &path)?;
                }
                _ => {}
            }
        }
        Ok(out)
    }

    fn add_recorded(&mut self, rec: Recorded, path: &Path) -> io::Result<()> {
        let key = (rec.request.method, canonical_json(&rec.request.params));
        if let Some(prev) = self.responses.get(&key) {
            if prev != &rec.response {
                return Err(invalid(format!(
                    "{}: conflicting responses for {} {}",
                    path.display(),
                    key.0,
                    key.1
                )));
            }
        }
        self.responses.insert(key, rec.response);
        Ok(())
    }
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

impl Transport for ReplayTransport {
    fn call(&self, _url: &str, method: &str, params: &Value) -> Result<Value, TransportError> {
        let key = (method.to_string(), canonical_json(params));
        match self.responses.get(&key) {
            Some(resp) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                unwrap_response(resp.clone())
            }
            None => Err(TransportError::ReplayMiss {
                method: key.0,
                params: key.1,
            }),
        }
    }
}

/// Replay transports for every chain directory under a fixture root.
#[derive(Debug, Default)]
pub struct ReplayBackend {
    chains: BTreeMap<String, std::sync::Arc<ReplayTransport>>,
}

impl ReplayBackend {
    pub fn load(root: &Path) -> io::Result<Self> {
        let mut chains = BTreeMap::new();
        for entry in fs::read_dir(root)? {
            let entry = entry?;
            if entry.file_type()?.is_dir() {
                let name = entry.file_name().to_string_lossy().into_owned();
                chains.insert(name, std::sync::Arc::new(ReplayTransport::load_dir(&entry.path())?));
            }
        }
        Ok(Self { chains })
    }

    pub fn chain(&self, name: &str) -> Option<std::sync::Arc<ReplayTransport>> {
        self.chains.get(name).cloned()
    }

    pub fn chain_names(&self) -> impl Iterator<Item = &str> {
        self.chains.keys().map(String::as_str)
    }
}
