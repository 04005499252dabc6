use std::collections::{BTreeMap, HashSet};

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::legs::Leg;
use super::matching::{MatchContext, MatchOutcome, ViolationKind};
use super::CrossChainTx;
use crate::config::FieldRole as F;
use crate::types::{ChainId, H256};

/// Bus family: riders deposit with a ticket, a dispatch event on the
/// source chain closes a batch covering tickets
/// `[start_ticket, start_ticket + seats)`, and one destination transaction
/// pays out the batch in seat order.
///
/// A batch whose destination transfer count differs from its declared
/// seats produces no cctxs; its deposits and transfers stay unmatched.
pub fn match_batch(ctx: &MatchContext, deposits: &[Leg], dispatches: &[Leg], transfers: &[Leg]) -> MatchOutcome {
    let mut out = MatchOutcome::default();

    // earliest deposit per (chain, ticket)
    let mut riders: BTreeMap<(ChainId, BigUint), Vec<&Leg>> = BTreeMap::new();
    for d in deposits {
        if let Some(t) = d.uint(F::Ticket) {
            riders.entry((d.chain_id, t.clone())).or_default().push(d);
        }
    }
    for ((_, ticket), g) in riders.iter_mut() {
        g.sort_by_key(|l| l.order());
        for extra in &g[1..] {
            out.violate(ViolationKind::DuplicateKey, &ticket.to_string(), Some(extra), None, "repeated ticket".into());
        }
    }

    let mut buses: BTreeMap<String, Vec<&Leg>> = BTreeMap::new();
    for d in dispatches {
        if let Some(k) = d.key(F::BatchId) {
            buses.entry(k).or_default().push(d);
        }
    }
    let mut primaries = Vec::new();
    for (key, g) in buses.iter_mut() {
        g.sort_by_key(|l| l.order());
        for extra in &g[1..] {
            out.violate(ViolationKind::DuplicateKey, key, Some(extra), None, "repeated batch id".into());
        }
        primaries.push((key.clone(), g[0]));
    }
    primaries.sort_by_key(|(_, d)| d.order());

    let mut arrivals: BTreeMap<String, Vec<&Leg>> = BTreeMap::new();
    for t in transfers {
        if let Some(k) = t.key(F::BatchId) {
            arrivals.entry(k).or_default().push(t);
        }
    }

    let mut claimed: HashSet<(ChainId, BigUint)> = HashSet::new();
    let mut used_dispatch: HashSet<(ChainId, H256, u64)> = HashSet::new();
    for (key, bus) in &primaries {
        let bus = *bus;
        let mut cands: Vec<&Leg> = arrivals
            .get(key)
            .map(|g| g.iter().copied().filter(|t| ctx.compatible(bus, t)).collect())
            .unwrap_or_default();
        if cands.is_empty() {
            continue;
        }
        cands.sort_by_key(|l| l.order());
        let (win_chain, win_tx) = (cands[0].chain_id, cands[0].tx_hash);
        let (mut seats_tx, others): (Vec<&Leg>, Vec<&Leg>) =
            cands.into_iter().partition(|t| t.chain_id == win_chain && t.tx_hash == win_tx);
        for extra in others {
            out.violate(ViolationKind::DuplicateKey, key, Some(bus), Some(extra), "batch paid out twice".into());
        }
        seats_tx.sort_by_key(|l| (l.block_number, l.log_index));

        let seats = bus.uint(F::Seats).and_then(|s| s.to_u64()).unwrap_or(0);
        if seats_tx.len() as u64 != seats {
            out.violate(
                ViolationKind::SeatCountMismatch,
                key,
                Some(bus),
                Some(seats_tx[0]),
                format!("dispatch declares {seats} seats, destination paid {}", seats_tx.len()),
            );
            continue;
        }
        let start = bus.uint(F::StartTicket).cloned().unwrap_or_default();
        for (i, arrival) in seats_tx.iter().enumerate() {
            let ticket = &start + BigUint::from(i);
            let rider_key = (bus.chain_id, ticket);
            if claimed.contains(&rider_key) {
                continue;
            }
            let Some(rider) = riders.get(&rider_key).map(|g| g[0]) else {
                continue;
            };
            if rider.timestamp > bus.timestamp || rider.chain(F::DstChain).is_some_and(|c| c != arrival.chain_id) {
                continue;
            }
            claimed.insert(rider_key);
            let base = ctx.pair(format!("{}:{}:{}", bus.chain_id, key, i), rider, arrival);
            let cctx = CrossChainTx {
                batch_id: Some(key.clone()),
                dispatch_tx_hash: Some(bus.tx_hash),
                dispatch_fee_wei: Some(bus.fee_wei),
                ..base
            };
            match ctx.check_pair(rider, arrival) {
                None => {
                    used_dispatch.insert((bus.chain_id, bus.tx_hash, bus.log_index));
                    out.cctxs.push(cctx);
                }
                Some((kind, detail)) => {
                    out.violate(kind, key, Some(rider), Some(arrival), detail);
                    out.flagged.push(CrossChainTx {
                        flagged: Some(kind.to_string()),
                        ..cctx
                    });
                }
            }
        }
    }

    let riders_all: Vec<&Leg> = deposits.iter().collect();
    let arrivals_all: Vec<&Leg> = transfers.iter().collect();
    out.finish(&riders_all, &arrivals_all);
    out.unmatched_src.extend(
        dispatches
            .iter()
            .filter(|d| !used_dispatch.contains(&(d.chain_id, d.tx_hash, d.log_index)))
            .map(Leg::reference),
    );
    out.unmatched_src.sort();
    out
}
