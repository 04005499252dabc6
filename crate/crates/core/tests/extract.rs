mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use ccx_core::extract::{extract, resolve_range, ExtractError};
use ccx_core::rpc::{ChainClient, RetryPolicy, RpcEndpointPool, SearchMode};
use ccx_core::storage::{EventFilter, MemoryRepository, Repository};
use common::*;
use rand::{Rng, SeedableRng};

fn client(chain_id: u64, chain: SyntheticChain, max_chunk: u64) -> ChainClient {
    let pool = RpcEndpointPool::new(chain_id, vec!["synthetic://a".into(), "synthetic://b".into()], max_chunk);
    ChainClient::new(pool, Arc::new(chain)).with_retry(RetryPolicy::no_delay(3))
}

fn linear_at_or_after(ts: &[u64], t: u64) -> Option<u64> {
    ts.iter().position(|&x| x >= t).map(|i| i as u64)
}

fn linear_at_or_before(ts: &[u64], t: u64) -> Option<u64> {
    ts.iter().rposition(|&x| x <= t).map(|i| i as u64)
}

#[test]
fn regular_chain_window_resolves_to_blocks() {
    let c = client(1, SyntheticChain::regular(200, 12), 2000);
    assert_eq!(resolve_range(&c, 780, 900).unwrap(), (65, 75));
    assert_eq!(c.find_block_by_timestamp(780, SearchMode::AtOrAfter).unwrap(), 65);
    assert_eq!(c.find_block_by_timestamp(780, SearchMode::AtOrBefore).unwrap(), 65);
}

#[test]
fn window_between_blocks_is_empty() {
    let c = client(1, SyntheticChain::regular(200, 12), 2000);
    assert!(matches!(resolve_range(&c, 781, 791), Err(ExtractError::EmptyRange { .. })));
    assert!(matches!(resolve_range(&c, 900, 900), Err(ExtractError::InvalidWindow { .. })));
    assert!(matches!(resolve_range(&c, 5000, 6000), Err(ExtractError::EmptyRange { .. })));
}

#[test]
fn window_past_head_is_clipped() {
    let c = client(1, SyntheticChain::regular(100, 12), 2000);
    assert_eq!(resolve_range(&c, 1100, 10_000).unwrap(), (92, 99));
}

#[test]
fn irregular_chain_matches_linear_scan() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for _ in 0..50 {
        let n = rng.gen_range(1..300);
        let mut t = rng.gen_range(0..1000u64);
        let ts: Vec<u64> = (0..n)
            .map(|_| {
                t += rng.gen_range(0..30);
                t
            })
            .collect();
        let c = client(1, SyntheticChain::with_timestamps(ts.clone()), 2000);
        let (g, h) = (ts[0], *ts.last().unwrap());
        for _ in 0..20 {
            let target = rng.gen_range(g..=h);
            assert_eq!(
                c.find_block_by_timestamp(target, SearchMode::AtOrAfter).unwrap(),
                linear_at_or_after(&ts, target).unwrap()
            );
            assert_eq!(
                c.find_block_by_timestamp(target, SearchMode::AtOrBefore).unwrap(),
                linear_at_or_before(&ts, target).unwrap()
            );
            let a = rng.gen_range(g.saturating_sub(50)..h + 50);
            let b = a + rng.gen_range(1..200);
            let lo = linear_at_or_after(&ts, a);
            let hi = linear_at_or_before(&ts, b);
            match (lo, hi) {
                (Some(lo), Some(hi)) if lo <= hi => assert_eq!(resolve_range(&c, a, b).unwrap(), (lo, hi)),
                _ => assert!(matches!(resolve_range(&c, a, b), Err(ExtractError::EmptyRange { .. }))),
            }
        }
    }
}

#[test]
fn out_of_range_target_errors() {
    let c = client(1, SyntheticChain::regular(10, 12), 2000);
    assert!(c.find_block_by_timestamp(1000, SearchMode::AtOrAfter).is_err());
}

/// Source chain with `n` Sent logs in blocks 1..=n (two per tx where even),
/// plus one removed log, and destination chain with matching Received logs.
fn synth_chains(n: u64) -> (SyntheticChain, SyntheticChain) {
    let bridge = msg_bridge();
    let sent = topic0_of(&bridge, "Sent");
    let recv = topic0_of(&bridge, "Received");
    let mut a = SyntheticChain::regular(100, 12);
    let mut b = SyntheticChain::regular(400, 2);
    for i in 1..=n {
        a.push_log(SRC_CONTRACT, vec![sent.clone(), format!("0x{}", word_u128(i as u128))], sent_data(i, 1000 * i as u128), i * 3, i / 2, i % 2, false);
        b.push_log(DST_CONTRACT, vec![recv.clone(), format!("0x{}", word_u128(i as u128))], received_data(i, 1000 * i as u128), i * 18 + 10, 1000 + i, 0, false);
    }
    a.push_log(SRC_CONTRACT, vec![sent, format!("0x{}", word_u128(999))], sent_data(999, 5), 50, 999, 0, true);
    (a, b)
}

fn clients(a: SyntheticChain, b: SyntheticChain) -> BTreeMap<u64, ChainClient> {
    BTreeMap::from([(1, client(1, a, 10)), (10, client(10, b, 10))])
}

fn contents(repo: &dyn Repository) -> Vec<String> {
    let mut out = Vec::new();
    for rel in repo.relations().unwrap() {
        for r in repo.query_events(&rel, &EventFilter::default()).unwrap() {
            out.push(format!("{rel} {}", serde_json::to_string(&r).unwrap()));
        }
    }
    out
}

#[test]
fn extracts_both_chains_and_skips_removed() {
    let (a, b) = synth_chains(8);
    let bridge = msg_bridge();
    let repo = MemoryRepository::new();
    let report = extract(&bridge, &[1, 10], 0, 1188, &clients(a, b), &repo).unwrap();
    assert!(!report.is_partial(), "{report:?}");
    let ca = &report.chains[0];
    assert_eq!(ca.chain_id, 1);
    assert_eq!(ca.events["Sent"], 8);
    assert_eq!(ca.removed_skipped, 1);
    assert_eq!(ca.inserted, 8);
    assert_eq!(ca.receipts_fetched, 5, "receipts are fetched once per tx");
    assert_eq!(report.chains[1].events["Received"], 8);
    assert!(report.chains.iter().all(|c| c.rpc_calls > 0));

    let sent = repo.query_events("synth_Sent", &EventFilter::default()).unwrap();
    assert_eq!(sent.len(), 8);
    assert_eq!(report.total_events(), 16);
    for r in &sent {
        assert_eq!(r.event.block_timestamp, r.event.block_number * 12);
        assert_eq!(r.gas_used, 21_000 + r.event.block_number / 3 / 2);
        assert!(r.effective_gas_price > 0);
        assert_eq!(r.run_id, "synth-0-1188");
    }
    // idempotent re-run
    let (a, b) = synth_chains(8);
    let again = extract(&bridge, &[1, 10], 0, 1188, &clients(a, b), &repo).unwrap();
    assert_eq!(again.chains[0].inserted, 0);
    assert_eq!(repo.query_events("synth_Sent", &EventFilter::default()).unwrap().len(), 8);
}

#[test]
fn window_limits_source_events() {
    let (a, b) = synth_chains(8);
    let repo = MemoryRepository::new();
    // blocks 0..=10 on chain A hold Sent logs at blocks 3, 6 and 9
    let report = extract(&msg_bridge(), &[1], 0, 120, &clients(a, b), &repo).unwrap();
    assert_eq!(report.chains.len(), 1);
    assert_eq!(report.chains[0].events["Sent"], 3);
    assert_eq!((report.chains[0].start_block, report.chains[0].end_block), (Some(0), Some(10)));
}

#[test]
fn chain_outside_bridge_is_rejected_before_rpc() {
    let (a, b) = synth_chains(2);
    let cl = clients(a, b);
    let repo = MemoryRepository::new();
    let err = extract(&msg_bridge(), &[1, 42], 0, 100, &cl, &repo).unwrap_err();
    assert!(matches!(err, ExtractError::ChainNotInBridge { .. }), "{err}");
    assert_eq!(cl[&1].rpc_calls(), 0);
    assert!(repo.relations().unwrap().is_empty());
}

#[test]
fn exhausted_chunk_is_reported_and_run_continues() {
    let (a, b) = synth_chains(8);
    a.failing.lock().unwrap().insert((10, 19));
    let repo = MemoryRepository::new();
    let report = extract(&msg_bridge(), &[1, 10], 0, 1188, &clients(a, b), &repo).unwrap();
    assert!(report.is_partial());
    assert_eq!(report.failures.len(), 1);
    assert_eq!((report.failures[0].from_block, report.failures[0].to_block), (10, 19));
    // logs at blocks 12, 15 and 18 are in the failed chunk
    assert_eq!(report.chains[0].events["Sent"], 5);
    assert_eq!(repo.query_events("synth_Sent", &EventFilter::default()).unwrap().len(), 5);
}

#[test]
fn resume_after_abort_matches_clean_run() {
    let bridge = msg_bridge();
    let clean = MemoryRepository::new();
    let (a, b) = synth_chains(8);
    extract(&bridge, &[1, 10], 0, 1188, &clients(a, b), &clean).unwrap();

    let resumed = MemoryRepository::new();
    let (mut a, b) = synth_chains(8);
    a.abort_after_logs = Some(1);
    let cl = BTreeMap::from([(1, client(1, a, 10).with_parallelism(1)), (10, client(10, b, 10))]);
    assert!(extract(&bridge, &[1, 10], 0, 1188, &cl, &resumed).is_err());
    assert!(contents(&resumed).len() < contents(&clean).len());
    let (a, b) = synth_chains(8);
    extract(&bridge, &[1, 10], 0, 1188, &clients(a, b), &resumed).unwrap();
    assert_eq!(contents(&resumed), contents(&clean));
}
