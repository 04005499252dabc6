use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use ccx_core::analytics::{write_report, GroupBy, Pricing};
use ccx_core::config::{load_price_table, BridgeConfig, ChainRegistry, ConfigDir, StorageConfig};
use ccx_core::extract::{build_clients, extract, Backend};
use ccx_core::generate::{generate, GenerateOptions};
use ccx_core::rpc::{ReplayBackend, RetryPolicy};
use ccx_core::storage::{self, write_cctxs_csv, write_events_csv, CctxFilter, EventFilter, Repository};
use ccx_core::ChainId;
use clap::{Args, Parser, Subcommand};

const EXIT_HARD: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "ccx", version, about = "Extract bridge events, link cross-chain transactions and report latency and cost")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Directory holding rpc.toml, bridges/*.toml and optionally storage.toml
    #[arg(long, global = true, default_value = "config")]
    config_dir: PathBuf,
    /// `memory` or `sqlite:<path>`; overrides storage.toml
    #[arg(long, global = true)]
    storage: Option<StorageConfig>,
    /// Print machine-readable JSON reports
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fetch and store the bridge's events in a time window
    Extract(ExtractArgs),
    /// Link stored events into cross-chain transactions
    Generate(GenerateArgs),
    /// Write latency/cost summaries for stored cross-chain transactions
    Report(ReportArgs),
    /// Dump stored events and cross-chain transactions as CSV
    Export(ExportArgs),
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[arg(long)]
    bridge: String,
    #[arg(long = "start_ts", alias = "start-ts")]
    start_ts: u64,
    #[arg(long = "end_ts", alias = "end-ts")]
    end_ts: u64,
    /// Chain names; defaults to every chain the bridge is deployed on
    #[arg(long, num_args = 1..)]
    blockchains: Vec<String>,
    /// Serve RPC from recorded responses under DIR/<chain name>/
    #[arg(long, value_name = "DIR")]
    replay: Option<PathBuf>,
    /// Per-request HTTP timeout in seconds
    #[arg(long, default_value_t = 30)]
    timeout: u64,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    bridge: String,
    /// Persist id-matched pairs that fail an integrity check, marked as flagged
    #[arg(long)]
    keep_flagged: bool,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    bridge: String,
    #[arg(long, default_value = "pair")]
    group_by: GroupBy,
    /// CSV with columns token,date,usd_price
    #[arg(long)]
    prices: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Include cctxs flagged by integrity checks
    #[arg(long)]
    include_flagged: bool,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    bridge: String,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Hard(String),
}

fn hard(e: impl std::fmt::Display) -> Failure {
    Failure::Hard(e.to_string())
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Hard(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_HARD)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let common = &cli.common;
    match cli.command {
        Command::Extract(a) => cmd_extract(common, a),
        Command::Generate(a) => cmd_generate(common, a),
        Command::Report(a) => cmd_report(common, a),
        Command::Export(a) => cmd_export(common, a),
    }
}

fn registry(common: &Common) -> Result<ChainRegistry, Failure> {
    let mut r = ConfigDir::new(&common.config_dir).chains().map_err(hard)?;
    r.apply_env_overrides(|k| std::env::var(k).ok());
    r.validate("environment").map_err(hard)?;
    Ok(r)
}

fn bridge(common: &Common, name: &str, registry: &ChainRegistry) -> Result<BridgeConfig, Failure> {
    let dir = ConfigDir::new(&common.config_dir);
    if !dir.bridge_path(name).exists() {
        let available = dir.bridge_names().unwrap_or_default();
        return Err(Failure::Hard(format!(
            "unknown bridge {name:?}; available bridges: {}",
            if available.is_empty() { "(none)".to_string() } else { available.join(", ") }
        )));
    }
    dir.bridge(name, registry).map_err(hard)
}

fn repository(common: &Common) -> Result<std::sync::Arc<dyn Repository>, Failure> {
    let cfg = match &common.storage {
        Some(c) => c.clone(),
        None => ConfigDir::new(&common.config_dir)
            .storage()
            .map_err(hard)?
            .unwrap_or_else(StorageConfig::memory),
    };
    storage::open(&cfg).map_err(hard)
}

fn cmd_extract(common: &Common, a: ExtractArgs) -> Outcome {
    if a.start_ts >= a.end_ts {
        return Err(Failure::Usage(format!(
            "--start_ts ({}) must be before --end_ts ({})",
            a.start_ts, a.end_ts
        )));
    }
    let registry = registry(common)?;
    let bridge = bridge(common, &a.bridge, &registry)?;
    let chains: Vec<ChainId> = if a.blockchains.is_empty() {
        bridge.chain_ids().into_iter().collect()
    } else {
        let mut ids = Vec::new();
        for name in &a.blockchains {
            let entry = registry
                .by_name(name)
                .or_else(|| name.parse().ok().and_then(|id| registry.by_id(id)))
                .ok_or_else(|| Failure::Usage(format!("unknown blockchain {name:?}")))?;
            ids.push(entry.chain_id);
        }
        ids
    };
    let backend = match &a.replay {
        Some(dir) => Backend::Replay(
            ReplayBackend::load(dir).map_err(|e| hard(format!("loading replay fixtures from {}: {e}", dir.display())))?,
        ),
        None => Backend::Http {
            timeout: Duration::from_secs(a.timeout),
            retry: RetryPolicy::default(),
        },
    };
    let repo = repository(common)?;
    // validate chain membership before building any client
    let configured = bridge.chain_ids();
    if let Some(c) = chains.iter().find(|c| !configured.contains(c)) {
        return Err(Failure::Hard(format!(
            "chain {} is not configured for bridge {}",
            registry.name_of(*c),
            bridge.name
        )));
    }
    let clients = build_clients(&registry, &chains, &backend).map_err(hard)?;
    let report = extract(&bridge, &chains, a.start_ts, a.end_ts, &clients, repo.as_ref()).map_err(hard)?;
    if common.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print!("{}", report.to_text());
    }
    Ok(if report.is_partial() { EXIT_PARTIAL } else { 0 })
}

fn cmd_generate(common: &Common, a: GenerateArgs) -> Outcome {
    let registry = registry(common)?;
    let bridge = bridge(common, &a.bridge, &registry)?;
    let repo = repository(common)?;
    let report = generate(
        &bridge,
        repo.as_ref(),
        GenerateOptions {
            keep_flagged: a.keep_flagged,
        },
    )
    .map_err(hard)?;
    if common.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_text());
    }
    Ok(0)
}

fn cmd_report(common: &Common, a: ReportArgs) -> Outcome {
    if !a.prices.is_file() {
        return Err(Failure::Usage(format!("price file {} does not exist", a.prices.display())));
    }
    let registry = registry(common)?;
    let bridge = bridge(common, &a.bridge, &registry)?;
    let prices = load_price_table(&a.prices).map_err(hard)?;
    let repo = repository(common)?;
    let mut cctxs = repo.query_cctxs(&CctxFilter::bridge(&bridge.name)).map_err(hard)?;
    let flagged = cctxs.iter().filter(|c| c.is_flagged()).count();
    if !a.include_flagged {
        cctxs.retain(|c| !c.is_flagged());
    }
    let pricing = Pricing {
        prices: &prices,
        chains: &registry,
        tokens: &bridge.tokens,
    };
    let out = write_report(&a.out, &bridge.name, &cctxs, &pricing, a.group_by).map_err(hard)?;
    if common.json {
        println!("{}", serde_json::to_string_pretty(&out.groups).expect("report serializes"));
        return Ok(0);
    }
    println!("bridge {} ({} cctxs, grouped by {})", bridge.name, cctxs.len(), a.group_by);
    if flagged > 0 && !a.include_flagged {
        println!("  flagged excluded  {flagged}");
    }
    println!("  priced            {}", out.groups.priced);
    println!("  unpriced excluded {}", out.groups.unpriced.len());
    for (id, reason) in &out.groups.unpriced {
        println!("    {id}: {reason}");
    }
    println!("  profitable cctxs  {}", out.profit_count);
    match out.fee_gas_correlation {
        Some(r) => println!("  fee/gas-price correlation {r:.6}"),
        None => println!("  fee/gas-price correlation n/a"),
    }
    for s in &out.groups.summaries {
        println!("  {:<20} n={} priced={} latency_q2={}s", s.group, s.n, s.n_priced, s.latency.q2);
    }
    for f in &out.files {
        println!("  wrote {}", f.display());
    }
    Ok(0)
}

fn cmd_export(common: &Common, a: ExportArgs) -> Outcome {
    let registry = registry(common)?;
    let bridge = bridge(common, &a.bridge, &registry)?;
    let repo = repository(common)?;
    std::fs::create_dir_all(&a.out).map_err(hard)?;
    for name in bridge.all_event_names() {
        let rel = bridge.relation_name(&name);
        if !repo.has_relation(&rel).map_err(hard)? {
            continue;
        }
        let records = repo.query_events(&rel, &EventFilter::default()).map_err(hard)?;
        let path = a.out.join(format!("{rel}.csv"));
        let f = std::fs::File::create(&path).map_err(hard)?;
        write_events_csv(&records, f).map_err(hard)?;
        println!("wrote {} ({} events)", path.display(), records.len());
    }
    let cctxs = repo.query_cctxs(&CctxFilter::bridge(&bridge.name)).map_err(hard)?;
    let path = a.out.join(format!("{}_cctxs.csv", bridge.name));
    let f = std::fs::File::create(&path).map_err(hard)?;
    write_cctxs_csv(&cctxs, f).map_err(hard)?;
    println!("wrote {} ({} cctxs)", path.display(), cctxs.len());
    Ok(0)
}
