//! Linking of persisted events into cross-chain transactions.
//!
//! Each bridge names an adapter family. The family decides which event
//! roles are joined and how: id joins for message passing and intents
//! ([`match_message`], [`match_intent`]) and seat-order fan-out for bus
//! batches ([`match_batch`]). Pairs that share an id but fail an integrity
//! check are reported as violations instead of becoming cctxs.

mod batch;
mod cctx;
mod fees;
mod legs;
mod matching;

pub use batch::match_batch;
pub use cctx::CrossChainTx;
pub use fees::{amortize_tx_fee, split_tx_fee};
pub use legs::{EventRef, Leg};
pub use matching::{match_by_id, match_intent, match_message, MatchContext, MatchOutcome, Violation, ViolationKind};

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::config::{AdapterKind, BridgeConfig, EventRole};
use crate::rpc::ReceiptStatus;
use crate::storage::{EventFilter, Repository, StorageError};

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("unknown adapter {0:?}")]
    UnknownAdapter(String),
    #[error("bridge {bridge}: relations missing: {}", missing.join(", "))]
    MissingRelations { bridge: String, missing: Vec<String> },
    #[error("{relation}: malformed event at {chain_id}/{tx_hash}/{log_index}: {reason}")]
    MalformedEvent {
        relation: String,
        chain_id: u64,
        tx_hash: String,
        log_index: u64,
        reason: String,
    },
    #[error(transparent)]
    Storage(#[from] StorageError),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GenerateOptions {
    /// Persist id-matched pairs that failed a check, marked as flagged.
    pub keep_flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenerationReport {
    pub bridge: String,
    pub adapter: String,
    pub cctx_count: usize,
    pub flagged_kept: usize,
    pub unmatched_src_count: usize,
    pub unmatched_dst_count: usize,
    pub violation_count: usize,
    pub failed_receipts_skipped: usize,
    pub unmatched_src: Vec<EventRef>,
    pub unmatched_dst: Vec<EventRef>,
    pub violations: Vec<Violation>,
}

impl GenerationReport {
    fn empty(bridge: &BridgeConfig) -> Self {
        Self::from_outcome(bridge, MatchOutcome::default(), 0, 0)
    }

    fn from_outcome(bridge: &BridgeConfig, o: MatchOutcome, kept: usize, skipped: usize) -> Self {
        GenerationReport {
            bridge: bridge.name.clone(),
            adapter: bridge.adapter.clone(),
            cctx_count: o.cctxs.len(),
            flagged_kept: kept,
            unmatched_src_count: o.unmatched_src.len(),
            unmatched_dst_count: o.unmatched_dst.len(),
            violation_count: o.violations.len(),
            failed_receipts_skipped: skipped,
            unmatched_src: o.unmatched_src,
            unmatched_dst: o.unmatched_dst,
            violations: o.violations,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "bridge {} ({})", self.bridge, self.adapter);
        let _ = writeln!(s, "  cctxs            {}", self.cctx_count);
        if self.flagged_kept > 0 {
            let _ = writeln!(s, "  flagged kept     {}", self.flagged_kept);
        }
        let _ = writeln!(s, "  unmatched src    {}", self.unmatched_src_count);
        let _ = writeln!(s, "  unmatched dst    {}", self.unmatched_dst_count);
        let _ = writeln!(s, "  violations       {}", self.violation_count);
        if self.failed_receipts_skipped > 0 {
            let _ = writeln!(s, "  failed receipts  {}", self.failed_receipts_skipped);
        }
        for (label, refs) in [("src", &self.unmatched_src), ("dst", &self.unmatched_dst)] {
            for r in refs {
                let _ = writeln!(
                    s,
                    "  unmatched {label} {} chain={} block={} log={} tx={}",
                    r.event, r.chain_id, r.block_number, r.log_index, r.tx_hash
                );
            }
        }
        for v in &self.violations {
            let _ = writeln!(s, "  violation {} key={} {}", v.kind, v.key, v.detail);
        }
        s
    }
}

/// Sets `n_src`, `n_dst` and `n_dispatch` to the number of cctxs in
/// `cctxs` sharing the respective transaction.
pub fn assign_fanouts(cctxs: &mut [CrossChainTx]) {
    let counts = FanoutCounts::of(cctxs.iter());
    for c in cctxs.iter_mut() {
        counts.apply(c);
    }
}

#[derive(Default)]
struct FanoutCounts {
    src: HashMap<(u64, crate::H256), u32>,
    dst: HashMap<(u64, crate::H256), u32>,
    dispatch: HashMap<(u64, crate::H256), u32>,
}

impl FanoutCounts {
    fn of<'a>(cctxs: impl Iterator<Item = &'a CrossChainTx>) -> Self {
        let mut f = FanoutCounts::default();
        for c in cctxs {
            *f.src.entry((c.src_chain, c.src_tx_hash)).or_default() += 1;
            *f.dst.entry((c.dst_chain, c.dst_tx_hash)).or_default() += 1;
            if let Some(tx) = c.dispatch_tx_hash {
                *f.dispatch.entry((c.src_chain, tx)).or_default() += 1;
            }
        }
        f
    }

    fn apply(&self, c: &mut CrossChainTx) {
        c.n_src = self.src[&(c.src_chain, c.src_tx_hash)];
        c.n_dst = self.dst[&(c.dst_chain, c.dst_tx_hash)];
        c.n_dispatch = c.dispatch_tx_hash.map(|tx| self.dispatch[&(c.src_chain, tx)]);
    }
}

/// Loads every event carrying `role` as matcher legs. Events from failed
/// transactions are skipped and counted.
pub fn load_legs(
    bridge: &BridgeConfig,
    repo: &dyn Repository,
    role: EventRole,
) -> Result<(Vec<Leg>, usize), GenerateError> {
    let mut legs = Vec::new();
    let mut skipped = 0;
    for (contract, ev) in bridge.events_with_role(role) {
        let relation = bridge.relation_name(&ev.abi.name);
        let filter = EventFilter::default().chain(contract.chain_id).contract(contract.address);
        for rec in repo.query_events(&relation, &filter)? {
            if rec.status != ReceiptStatus::Success {
                skipped += 1;
                continue;
            }
            let leg = Leg::from_record(&rec, ev).map_err(|reason| GenerateError::MalformedEvent {
                relation: relation.clone(),
                chain_id: rec.event.chain_id,
                tx_hash: rec.event.tx_hash.to_string(),
                log_index: rec.event.log_index,
                reason,
            })?;
            legs.push(leg);
        }
    }
    legs.sort_by_key(|l| l.order());
    Ok((legs, skipped))
}

/// Runs the bridge's adapter over its stored events and replaces the
/// bridge's cctxs with the result.
///
/// A store holding none of the bridge's relations yields an empty report;
/// one holding only some of them is an error.
pub fn generate(
    bridge: &BridgeConfig,
    repo: &dyn Repository,
    opts: GenerateOptions,
) -> Result<GenerationReport, GenerateError> {
    let kind: AdapterKind = bridge
        .adapter_kind()
        .map_err(|_| GenerateError::UnknownAdapter(bridge.adapter.clone()))?;

    let relations = repo.relations()?;
    let wanted: Vec<String> = bridge.all_event_names().iter().map(|n| bridge.relation_name(n)).collect();
    let missing: Vec<String> = wanted.iter().filter(|r| !relations.contains(r)).cloned().collect();
    if missing.len() == wanted.len() {
        repo.delete_cctxs(&bridge.name)?;
        return Ok(GenerationReport::empty(bridge));
    }
    if !missing.is_empty() {
        return Err(GenerateError::MissingRelations {
            bridge: bridge.name.clone(),
            missing,
        });
    }

    let ctx = MatchContext {
        bridge: bridge.name.clone(),
        adapter: kind,
        slack_secs: bridge.match_slack_secs,
        tokens: bridge.tokens.clone(),
    };
    let mut skipped = 0;
    let mut load = |role| -> Result<Vec<Leg>, GenerateError> {
        let (legs, n) = load_legs(bridge, repo, role)?;
        skipped += n;
        Ok(legs)
    };
    let mut outcome = match kind {
        AdapterKind::MessageFinality | AdapterKind::CommitteeFlatFee | AdapterKind::PoolTaxi => {
            let d = load(EventRole::Deposit)?;
            let w = load(EventRole::Withdrawal)?;
            match_message(&ctx, &d, &w)
        }
        AdapterKind::IntentFill => {
            let d = load(EventRole::Deposit)?;
            let f = load(EventRole::Fill)?;
            match_intent(&ctx, &d, &f)
        }
        AdapterKind::PoolBus => {
            let d = load(EventRole::Deposit)?;
            let b = load(EventRole::Dispatch)?;
            let t = load(EventRole::Transfer)?;
            match_batch(&ctx, &d, &b, &t)
        }
    };

    assign_fanouts(&mut outcome.cctxs);
    let mut to_store = outcome.cctxs.clone();
    let mut kept = 0;
    if opts.keep_flagged {
        let counts = FanoutCounts::of(outcome.cctxs.iter().chain(outcome.flagged.iter()));
        for mut f in std::mem::take(&mut outcome.flagged) {
            counts.apply(&mut f);
            to_store.push(f);
            kept += 1;
        }
    }
    repo.delete_cctxs(&bridge.name)?;
    repo.put_cctxs(&to_store)?;
    log::info!(
        "{}: {} cctxs, {} violations",
        bridge.name,
        outcome.cctxs.len(),
        outcome.violations.len()
    );
    Ok(GenerationReport::from_outcome(bridge, outcome, kept, skipped))
}
