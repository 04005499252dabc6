//! Loading and running the checked-in two-chain replay fixture.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use ccx_core::analytics::{write_report, GroupBy, Pricing};
use ccx_core::config::{load_price_table, BridgeConfig, ChainRegistry, ConfigDir};
use ccx_core::extract::{build_clients, extract, Backend, ExtractError, ExtractionReport};
use ccx_core::generate::{generate, GenerateOptions, GenerationReport};
use ccx_core::rpc::{ChainClient, ReplayBackend, RetryPolicy, RpcEndpointPool, Transport, TransportError};
use ccx_core::storage::{write_cctxs_csv, write_events_csv, CctxFilter, EventFilter, Repository};
use ccx_core::ChainId;
use serde_json::Value;

pub fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn golden(name: &str) -> Value {
    let text = std::fs::read_to_string(root().join("golden").join(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub struct Fixture {
    pub registry: ChainRegistry,
    pub bridges: Vec<BridgeConfig>,
    pub start_ts: u64,
    pub end_ts: u64,
}

pub fn load() -> Fixture {
    let dir = ConfigDir::new(root().join("config"));
    let registry = dir.chains().unwrap();
    let bridges = dir
        .bridge_names()
        .unwrap()
        .iter()
        .map(|n| dir.bridge(n, &registry).unwrap())
        .collect();
    let w = golden("window.json");
    Fixture {
        registry,
        bridges,
        start_ts: w["start_ts"].as_u64().unwrap(),
        end_ts: w["end_ts"].as_u64().unwrap(),
    }
}

impl Fixture {
    pub fn bridge(&self, name: &str) -> &BridgeConfig {
        self.bridges.iter().find(|b| b.name == name).unwrap()
    }

    pub fn chains(&self) -> Vec<ChainId> {
        self.registry.chains.iter().map(|c| c.chain_id).collect()
    }

    pub fn clients(&self) -> BTreeMap<ChainId, ChainClient> {
        let backend = Backend::Replay(ReplayBackend::load(&root().join("replay")).unwrap());
        build_clients(&self.registry, &self.chains(), &backend).unwrap()
    }

    pub fn extract(&self, bridge: &BridgeConfig, repo: &dyn Repository) -> Result<ExtractionReport, ExtractError> {
        extract(bridge, &bridge.chain_ids().into_iter().collect::<Vec<_>>(), self.start_ts, self.end_ts, &self.clients(), repo)
    }

    /// Extracts and generates every bridge.
    pub fn run(&self, repo: &dyn Repository) -> (Vec<ExtractionReport>, Vec<GenerationReport>) {
        let mut ex = Vec::new();
        let mut gen = Vec::new();
        for b in &self.bridges {
            ex.push(self.extract(b, repo).unwrap());
            gen.push(generate(b, repo, GenerateOptions::default()).unwrap());
        }
        (ex, gen)
    }

    /// Events per relation and cctxs per bridge, as CSV.
    pub fn export(&self, repo: &dyn Repository) -> BTreeMap<String, Vec<u8>> {
        let mut out = BTreeMap::new();
        for rel in repo.relations().unwrap() {
            let mut buf = Vec::new();
            write_events_csv(&repo.query_events(&rel, &EventFilter::default()).unwrap(), &mut buf).unwrap();
            out.insert(format!("{rel}.csv"), buf);
        }
        for b in &self.bridges {
            let mut buf = Vec::new();
            write_cctxs_csv(&repo.query_cctxs(&CctxFilter::bridge(&b.name)).unwrap(), &mut buf).unwrap();
            out.insert(format!("{}_cctxs.csv", b.name), buf);
        }
        out
    }

    /// Writes every report file for every bridge and returns their bytes
    /// keyed by `<bridge>/<file>`.
    pub fn reports(&self, repo: &dyn Repository, dir: &Path) -> BTreeMap<String, Vec<u8>> {
        let prices = load_price_table(&root().join("prices.csv")).unwrap();
        let mut out = BTreeMap::new();
        for b in &self.bridges {
            let cctxs = repo.query_cctxs(&CctxFilter::bridge(&b.name)).unwrap();
            let pricing = Pricing {
                prices: &prices,
                chains: &self.registry,
                tokens: &b.tokens,
            };
            let d = dir.join(&b.name);
            for g in [GroupBy::Pair, GroupBy::Layer] {
                write_report(&d, &b.name, &cctxs, &pricing, g).unwrap();
            }
            for e in std::fs::read_dir(&d).unwrap() {
                let p = e.unwrap().path();
                let name = format!("{}/{}", b.name, p.file_name().unwrap().to_string_lossy());
                out.insert(name, std::fs::read(&p).unwrap());
            }
        }
        out
    }
}

/// Checked-in report goldens keyed like [`Fixture::reports`].
pub fn golden_reports() -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let base = root().join("golden/report");
    for b in std::fs::read_dir(&base).unwrap() {
        let b = b.unwrap().path();
        for f in std::fs::read_dir(&b).unwrap() {
            let f = f.unwrap().path();
            let key = format!(
                "{}/{}",
                b.file_name().unwrap().to_string_lossy(),
                f.file_name().unwrap().to_string_lossy()
            );
            out.insert(key, std::fs::read(&f).unwrap());
        }
    }
    out
}

/// Replay transport that turns into a fatal miss after `budget` getLogs calls.
pub struct Aborting {
    pub inner: Arc<dyn Transport>,
    pub budget: usize,
    pub used: AtomicUsize,
}

impl Transport for Aborting {
    fn call(&self, url: &str, method: &str, params: &Value) -> Result<Value, TransportError> {
        if method == "eth_getLogs" && self.used.fetch_add(1, Ordering::SeqCst) >= self.budget {
            return Err(TransportError::ReplayMiss {
                method: method.into(),
                params: "simulated abort".into(),
            });
        }
        self.inner.call(url, method, params)
    }
}

/// Clients whose every chain aborts after `budget` log queries.
pub fn aborting_clients(fx: &Fixture, budget: usize) -> BTreeMap<ChainId, ChainClient> {
    let replay = ReplayBackend::load(&root().join("replay")).unwrap();
    fx.registry
        .chains
        .iter()
        .map(|c| {
            let inner: Arc<dyn Transport> = replay.chain(&c.name).unwrap();
            let pool = RpcEndpointPool::new(c.chain_id, vec![format!("replay://{}", c.name)], c.max_chunk());
            let t = Aborting {
                inner,
                budget,
                used: AtomicUsize::new(0),
            };
            let client = ChainClient::new(pool, Arc::new(t)).with_retry(RetryPolicy::no_delay(1)).with_parallelism(1);
            (c.chain_id, client)
        })
        .collect()
}
