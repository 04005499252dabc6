use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::legs::{EventRef, Leg};
use super::CrossChainTx;
use crate::config::{AdapterKind, FieldRole, TokenInfo};
use crate::types::{Address, ChainId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    DuplicateKey,
    RecipientMismatch,
    TokenMismatch,
    AmountExceedsInput,
    NegativeLatency,
    SeatCountMismatch,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::DuplicateKey => "duplicate_key",
            ViolationKind::RecipientMismatch => "recipient_mismatch",
            ViolationKind::TokenMismatch => "token_mismatch",
            ViolationKind::AmountExceedsInput => "amount_exceeds_input",
            ViolationKind::NegativeLatency => "negative_latency",
            ViolationKind::SeatCountMismatch => "seat_count_mismatch",
        };
        f.write_str(s)
    }
}

/// An id match that failed an integrity check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub key: String,
    pub src: Option<EventRef>,
    pub dst: Option<EventRef>,
    pub detail: String,
}

/// Matcher parameters shared by all adapters.
#[derive(Debug, Clone)]
pub struct MatchContext {
    pub bridge: String,
    pub adapter: AdapterKind,
    /// Maximum |dst_ts - src_ts| for a candidate pair.
    pub slack_secs: u64,
    pub tokens: Vec<TokenInfo>,
}

impl MatchContext {
    pub fn symbol(&self, chain: ChainId, token: Address) -> Option<&str> {
        self.tokens
            .iter()
            .find(|t| t.chain_id == chain && t.address == token)
            .map(|t| t.symbol.as_str())
    }

    /// Both tokens are known and carry the same symbol.
    pub fn same_token(&self, a_chain: ChainId, a: Address, b_chain: ChainId, b: Address) -> bool {
        match (self.symbol(a_chain, a), self.symbol(b_chain, b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }

    pub fn in_window(&self, src_ts: u64, dst_ts: u64) -> bool {
        src_ts.abs_diff(dst_ts) <= self.slack_secs
    }

    /// Integrity checks applied to an id-matched pair; `None` if it passes.
    pub fn check_pair(&self, s: &Leg, d: &Leg) -> Option<(ViolationKind, String)> {
        use FieldRole as F;
        if d.timestamp < s.timestamp && !self.adapter.allows_negative_latency() {
            return Some((
                ViolationKind::NegativeLatency,
                format!("destination at {} precedes source at {}", d.timestamp, s.timestamp),
            ));
        }
        let (sr, dr) = (s.address(F::Recipient), d.address(F::Recipient));
        if sr != dr {
            return Some((ViolationKind::RecipientMismatch, format!("{} vs {}", fmt_opt(sr), fmt_opt(dr))));
        }
        let dst_token = d.address(F::Token).unwrap_or_default();
        if let Some(want) = s.address(F::OutputToken) {
            if want != dst_token {
                return Some((ViolationKind::TokenMismatch, format!("expected {want}, filled {dst_token}")));
            }
        }
        let src_token = s.address(F::Token).unwrap_or_default();
        if self.same_token(s.chain_id, src_token, d.chain_id, dst_token) && d.amount() > s.amount() {
            return Some((
                ViolationKind::AmountExceedsInput,
                format!("out {} > in {}", d.amount(), s.amount()),
            ));
        }
        None
    }

    /// Chain and time constraints for `d` to be a candidate of `s`.
    pub fn compatible(&self, s: &Leg, d: &Leg) -> bool {
        s.chain_id != d.chain_id
            && s.chain(FieldRole::DstChain).is_none_or(|c| c == d.chain_id)
            && d.chain(FieldRole::SrcChain).is_none_or(|c| c == s.chain_id)
            && self.in_window(s.timestamp, d.timestamp)
    }

    pub(crate) fn pair(&self, cctx_id: String, s: &Leg, d: &Leg) -> CrossChainTx {
        use FieldRole as F;
        CrossChainTx {
            cctx_id,
            bridge: self.bridge.clone(),
            src_chain: s.chain_id,
            dst_chain: d.chain_id,
            src_tx_hash: s.tx_hash,
            dst_tx_hash: d.tx_hash,
            src_event: s.event.clone(),
            dst_event: d.event.clone(),
            src_block: s.block_number,
            dst_block: d.block_number,
            src_log_index: s.log_index,
            dst_log_index: d.log_index,
            src_timestamp: s.timestamp,
            dst_timestamp: d.timestamp,
            sender: s.address(F::Sender).unwrap_or_default(),
            recipient: s.address(F::Recipient).unwrap_or_default(),
            src_token: s.address(F::Token).unwrap_or_default(),
            dst_token: d.address(F::Token).unwrap_or_default(),
            amount_in: s.amount(),
            amount_out: d.amount(),
            src_tx_fee_wei: s.fee_wei,
            src_gas_price_wei: s.gas_price_wei,
            dst_tx_fee_wei: d.fee_wei,
            n_src: 1,
            n_dst: 1,
            batch_id: None,
            dispatch_tx_hash: None,
            dispatch_fee_wei: None,
            n_dispatch: None,
            solver: d.address(F::Solver),
            flagged: None,
        }
    }
}

fn fmt_opt(a: Option<Address>) -> String {
    a.map_or_else(|| "none".into(), |a| a.to_string())
}

/// Result of one matcher run, before fanouts are assigned.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchOutcome {
    pub cctxs: Vec<CrossChainTx>,
    /// Id-matched pairs that failed a check, marked with the violation.
    pub flagged: Vec<CrossChainTx>,
    pub violations: Vec<Violation>,
    pub unmatched_src: Vec<EventRef>,
    pub unmatched_dst: Vec<EventRef>,
}

impl MatchOutcome {
    pub(crate) fn violate(&mut self, kind: ViolationKind, key: &str, s: Option<&Leg>, d: Option<&Leg>, detail: String) {
        self.violations.push(Violation {
            kind,
            key: key.to_string(),
            src: s.map(Leg::reference),
            dst: d.map(Leg::reference),
            detail,
        });
    }

    /// Fills the unmatched lists with every leg not used by a clean cctx,
    /// and sorts all outputs.
    pub(crate) fn finish(&mut self, src: &[&Leg], dst: &[&Leg]) {
        let used_src: std::collections::HashSet<_> =
            self.cctxs.iter().map(|c| (c.src_chain, c.src_tx_hash, c.src_log_index)).collect();
        let used_dst: std::collections::HashSet<_> =
            self.cctxs.iter().map(|c| (c.dst_chain, c.dst_tx_hash, c.dst_log_index)).collect();
        self.unmatched_src = src
            .iter()
            .filter(|l| !used_src.contains(&(l.chain_id, l.tx_hash, l.log_index)))
            .map(|l| l.reference())
            .collect();
        self.unmatched_dst = dst
            .iter()
            .filter(|l| !used_dst.contains(&(l.chain_id, l.tx_hash, l.log_index)))
            .map(|l| l.reference())
            .collect();
        self.unmatched_src.sort();
        self.unmatched_dst.sort();
        self.cctxs.sort_by(|a, b| a.cctx_id.cmp(&b.cctx_id));
        self.flagged.sort_by(|a, b| a.cctx_id.cmp(&b.cctx_id));
        self.violations.sort_by(|a, b| (a.kind, &a.key, &a.src, &a.dst).cmp(&(b.kind, &b.key, &b.src, &b.dst)));
    }
}

fn group_by_key<'a>(legs: &[&'a Leg], role: FieldRole) -> BTreeMap<String, Vec<&'a Leg>> {
    let mut m: BTreeMap<String, Vec<&Leg>> = BTreeMap::new();
    for l in legs {
        if let Some(k) = l.key(role) {
            m.entry(k).or_default().push(l);
        }
    }
    for g in m.values_mut() {
        g.sort_by_key(|l| l.order());
    }
    m
}

/// Id join used by the message-passing and intent adapters.
///
/// Per id, the earliest source event is the only one considered; later
/// ones are duplicate-key violations. Among its compatible destination
/// events the earliest wins and the rest are duplicate-key violations. The
/// winning pair becomes a cctx if it passes [`MatchContext::check_pair`].
pub fn match_by_id(ctx: &MatchContext, src: &[Leg], dst: &[Leg]) -> MatchOutcome {
    let src: Vec<&Leg> = src.iter().collect();
    let dst: Vec<&Leg> = dst.iter().collect();
    let src_groups = group_by_key(&src, FieldRole::Id);
    let dst_groups = group_by_key(&dst, FieldRole::Id);
    let mut out = MatchOutcome::default();
    for (key, group) in &src_groups {
        let primary = group[0];
        for extra in &group[1..] {
            out.violate(ViolationKind::DuplicateKey, key, Some(extra), None, "repeated source id".into());
        }
        let cands: Vec<&Leg> = dst_groups
            .get(key)
            .map(|g| g.iter().copied().filter(|d| ctx.compatible(primary, d)).collect())
            .unwrap_or_default();
        let Some((&winner, rest)) = cands.split_first() else {
            continue;
        };
        for extra in rest {
            out.violate(ViolationKind::DuplicateKey, key, Some(primary), Some(extra), "repeated destination id".into());
        }
        let id = format!("{}:{}", primary.chain_id, key);
        let cctx = ctx.pair(id, primary, winner);
        match ctx.check_pair(primary, winner) {
            None => out.cctxs.push(cctx),
            Some((kind, detail)) => {
                out.violate(kind, key, Some(primary), Some(winner), detail);
                out.flagged.push(CrossChainTx {
                    flagged: Some(kind.to_string()),
                    ..cctx
                });
            }
        }
    }
    out.finish(&src, &dst);
    out
}

/// Message-passing families: deposit/withdrawal joined on the message id.
pub fn match_message(ctx: &MatchContext, deposits: &[Leg], withdrawals: &[Leg]) -> MatchOutcome {
    match_by_id(ctx, deposits, withdrawals)
}

/// Intent family: deposit/fill joined on the deposit id. Fills may precede
/// their deposit; the solver is recorded on the cctx.
pub fn match_intent(ctx: &MatchContext, deposits: &[Leg], fills: &[Leg]) -> MatchOutcome {
    match_by_id(ctx, deposits, fills)
}
