//! Reference implementations used as oracles by the property suites.
//! Each check returns `Err` with a description of the first discrepancy.

use std::collections::{BTreeMap, BTreeSet};

use ccx_core::abi::{decode_log, event_topic0, AbiValue, EventAbi, EventParam, SolType};
use ccx_core::analytics::{min_max_normalize, pearson, quartiles};
use ccx_core::config::{AdapterKind, FieldRole, TokenInfo};
use ccx_core::generate::{amortize_tx_fee, match_by_id, split_tx_fee, Leg, MatchContext};
use ccx_core::rpc::{chunk_ranges, BlockInfo, LogEntry};
use ccx_core::{Address, H256};
use num_bigint::{BigInt, BigUint, Sign};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rust_decimal::Decimal;

/// keccak-256("Transfer(address,address,uint256)"), computed with
/// tools/keccak.py.
pub const TRANSFER_TOPIC0: &str = "0xddf252ad1be2c89b69c2b068fc378daa952ba7f163c4a11628f55a4df523b3ef";

pub fn transfer_topic0_matches() -> Result<(), String> {
    let abi = EventAbi::from_json(
        r#"{"type":"event","name":"Transfer","inputs":[
            {"name":"from","type":"address","indexed":true},
            {"name":"to","type":"address","indexed":true},
            {"name":"value","type":"uint256","indexed":false}]}"#,
    )
    .map_err(|e| e.to_string())?;
    let got = event_topic0(&abi).map_err(|e| e.to_string())?.to_string();
    if got == TRANSFER_TOPIC0 {
        Ok(())
    } else {
        Err(format!("topic0 {got} != {TRANSFER_TOPIC0}"))
    }
}

// ------------------------------------------------------------ ABI encoder

fn rand_type(rng: &mut StdRng, depth: u32) -> SolType {
    match rng.gen_range(0..if depth == 0 { 8 } else { 7 }) {
        0 => SolType::Address,
        1 => SolType::Bool,
        2 => SolType::Uint(8 * rng.gen_range(1..=32)),
        3 => SolType::Int(8 * rng.gen_range(1..=32)),
        4 => SolType::FixedBytes(rng.gen_range(1..=32)),
        5 => SolType::Bytes,
        6 => SolType::String,
        _ => SolType::FixedArray(Box::new(rand_type(rng, depth + 1)), rng.gen_range(1..=3)),
    }
}

fn rand_bytes(rng: &mut StdRng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.gen()).collect()
}

fn rand_value(rng: &mut StdRng, ty: &SolType) -> AbiValue {
    match ty {
        SolType::Address => AbiValue::Address(Address(rng.gen())),
        SolType::Bool => AbiValue::Bool(rng.gen()),
        SolType::Uint(bits) => AbiValue::Uint(BigUint::from_bytes_be(&rand_bytes(rng, *bits as usize / 8))),
        SolType::Int(bits) => AbiValue::Int(BigInt::from_signed_bytes_be(&rand_bytes(rng, *bits as usize / 8))),
        SolType::FixedBytes(n) => AbiValue::FixedBytes(rand_bytes(rng, *n as usize)),
        SolType::Bytes => {
            let n = rng.gen_range(0..80);
            AbiValue::Bytes(rand_bytes(rng, n))
        }
        SolType::String => {
            let n = rng.gen_range(0..40);
            let s: String = (0..n)
                .map(|_| *['a', 'Z', '0', ' ', 'é', '€', '_'].get(rng.gen_range(0..7)).unwrap())
                .collect();
            AbiValue::String(s)
        }
        SolType::FixedArray(inner, k) => AbiValue::Array((0..*k).map(|_| rand_value(rng, inner)).collect()),
    }
}

fn dynamic(ty: &SolType) -> bool {
    match ty {
        SolType::Bytes | SolType::String => true,
        SolType::FixedArray(inner, _) => dynamic(inner),
        _ => false,
    }
}

fn word_of(v: &AbiValue) -> [u8; 32] {
    let mut w = [0u8; 32];
    match v {
        AbiValue::Address(a) => w[12..].copy_from_slice(&a.0),
        AbiValue::Bool(b) => w[31] = *b as u8,
        AbiValue::Uint(u) => {
            let b = u.to_bytes_be();
            w[32 - b.len()..].copy_from_slice(&b);
        }
        AbiValue::Int(i) => {
            let b = i.to_signed_bytes_be();
            if i.sign() == Sign::Minus {
                w = [0xff; 32];
            }
            w[32 - b.len()..].copy_from_slice(&b);
        }
        AbiValue::FixedBytes(b) => w[..b.len()].copy_from_slice(b),
        other => panic!("not a word value: {other:?}"),
    }
    w
}

fn pad_tail(b: &[u8]) -> Vec<u8> {
    let mut out = word_of(&AbiValue::Uint(BigUint::from(b.len()))).to_vec();
    out.extend_from_slice(b);
    out.resize(32 + b.len().div_ceil(32) * 32, 0);
    out
}

fn encode_one(ty: &SolType, v: &AbiValue) -> Vec<u8> {
    match (ty, v) {
        (SolType::Bytes, AbiValue::Bytes(b)) => pad_tail(b),
        (SolType::String, AbiValue::String(s)) => pad_tail(s.as_bytes()),
        (SolType::FixedArray(inner, k), AbiValue::Array(items)) => {
            let types = vec![(**inner).clone(); *k];
            encode_tuple(&types, items)
        }
        _ => word_of(v).to_vec(),
    }
}

/// Head/tail tuple encoding.
pub fn encode_tuple(types: &[SolType], values: &[AbiValue]) -> Vec<u8> {
    let parts: Vec<Vec<u8>> = types.iter().zip(values).map(|(t, v)| encode_one(t, v)).collect();
    let head_len: usize = types
        .iter()
        .zip(&parts)
        .map(|(t, p)| if dynamic(t) { 32 } else { p.len() })
        .sum();
    let mut head = Vec::new();
    let mut tail = Vec::new();
    for (t, p) in types.iter().zip(parts) {
        if dynamic(t) {
            head.extend_from_slice(&word_of(&AbiValue::Uint(BigUint::from(head_len + tail.len()))));
            tail.extend(p);
        } else {
            head.extend(p);
        }
    }
    head.extend(tail);
    head
}

/// Encodes `cases` random events and checks that decoding returns exactly
/// the generated values.
pub fn abi_roundtrips(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = StdRng::seed_from_u64(seed);
    for case in 0..cases {
        let n = rng.gen_range(0..7);
        let mut indexed_left = 3;
        let mut inputs = Vec::new();
        let mut values = Vec::new();
        for i in 0..n {
            let ty = rand_type(&mut rng, 0);
            let indexed = indexed_left > 0 && rng.gen_bool(0.3);
            if indexed {
                indexed_left -= 1;
            }
            values.push(rand_value(&mut rng, &ty));
            inputs.push(EventParam {
                name: format!("p{i}"),
                ty,
                indexed,
            });
        }
        let abi = EventAbi::new(format!("Ev{case}"), inputs, false).map_err(|e| e.to_string())?;
        let mut topics = vec![event_topic0(&abi).map_err(|e| e.to_string())?];
        let mut expected = BTreeMap::new();
        let (mut data_types, mut data_values) = (Vec::new(), Vec::new());
        for (p, v) in abi.inputs.iter().zip(&values) {
            if p.indexed {
                if p.ty.is_word() {
                    topics.push(H256(word_of(v)));
                    expected.insert(p.name.clone(), v.clone());
                } else {
                    let h = H256(rng.gen());
                    topics.push(h);
                    expected.insert(p.name.clone(), AbiValue::Hashed(h));
                }
            } else {
                data_types.push(p.ty.clone());
                data_values.push(v.clone());
                expected.insert(p.name.clone(), v.clone());
            }
        }
        let log = LogEntry {
            chain_id: 1,
            address: Address([7; 20]),
            topics,
            data: encode_tuple(&data_types, &data_values),
            block_number: 5,
            tx_hash: H256([9; 32]),
            log_index: case as u64,
            removed: false,
        };
        let block = BlockInfo {
            number: 5,
            timestamp: 1_700_000_000,
            hash: H256([1; 32]),
        };
        let decoded = decode_log("b", &abi, &log, &block).map_err(|e| format!("case {case} ({abi:?}): {e}"))?;
        if decoded.fields != expected {
            return Err(format!("case {case}: decoded {:?}, expected {:?}", decoded.fields, expected));
        }
    }
    Ok(())
}

// ------------------------------------------------------------ matcher

const TOKENS: [(u64, u8, &str); 4] = [(1, 0xa1, "USDC"), (10, 0xb1, "USDC"), (10, 0xb2, "WETH"), (42, 0xc1, "USDC")];

fn token(b: u8) -> Address {
    Address([b; 20])
}

fn leg(rng: &mut StdRng, n: &mut u64, src: bool, intent: bool) -> Leg {
    use FieldRole as F;
    *n += 1;
    let chain = if src { [1u64, 10][rng.gen_range(0..2)] } else { [1u64, 10, 42][rng.gen_range(0..3)] };
    let mut values = BTreeMap::new();
    values.insert(F::Id, AbiValue::Uint(BigUint::from(rng.gen_range(0..25u32))));
    values.insert(F::Recipient, AbiValue::Address(Address([rng.gen_range(0..2u8) + 1; 20])));
    let toks: Vec<_> = TOKENS.iter().filter(|t| t.0 == chain || rng.gen_bool(0.1)).collect();
    let tok = toks[rng.gen_range(0..toks.len())];
    values.insert(F::Token, AbiValue::Address(token(tok.1)));
    values.insert(F::Amount, AbiValue::Uint(BigUint::from(rng.gen_range(90..110u32))));
    if rng.gen_bool(0.5) {
        let role = if src { F::DstChain } else { F::SrcChain };
        values.insert(role, AbiValue::Uint(BigUint::from([1u64, 10, 42][rng.gen_range(0..3)])));
    }
    if src {
        values.insert(F::Sender, AbiValue::Address(Address([0x55; 20])));
        if intent && rng.gen_bool(0.5) {
            values.insert(F::OutputToken, AbiValue::Address(token([0xb1, 0xb2][rng.gen_range(0..2)])));
        }
    } else if intent {
        values.insert(F::Solver, AbiValue::Address(Address([0x66; 20])));
    }
    Leg {
        event: if src { "Deposit".into() } else { "Fill".into() },
        chain_id: chain,
        contract: Address([0x11; 20]),
        tx_hash: H256(rng.gen()),
        block_number: rng.gen_range(0..1000),
        log_index: *n,
        timestamp: rng.gen_range(0..400_000),
        fee_wei: rng.gen_range(0..10u128.pow(15)),
        gas_price_wei: 1,
        values,
    }
}

type Ref = (u64, H256, u64);

fn r(l: &Leg) -> Ref {
    (l.chain_id, l.tx_hash, l.log_index)
}

/// Compares the id matcher against a quadratic, declarative statement of
/// the matching rules on `sets` random event sets of at most 200 events.
pub fn matcher_equivalence(sets: usize, seed: u64) -> Result<(), String> {
    use FieldRole as F;
    let mut rng = StdRng::seed_from_u64(seed);
    for set in 0..sets {
        let intent = rng.gen_bool(0.5);
        let adapter = if intent { AdapterKind::IntentFill } else { AdapterKind::MessageFinality };
        let ctx = MatchContext {
            bridge: "b".into(),
            adapter,
            slack_secs: 86_400,
            tokens: TOKENS
                .iter()
                .map(|(c, b, s)| TokenInfo {
                    chain_id: *c,
                    address: token(*b),
                    symbol: s.to_string(),
                    decimals: 6,
                })
                .collect(),
        };
        let mut n = 0;
        let total = rng.gen_range(2..=200);
        let n_src = rng.gen_range(1..total);
        let src: Vec<Leg> = (0..n_src).map(|_| leg(&mut rng, &mut n, true, intent)).collect();
        let dst: Vec<Leg> = (0..total - n_src).map(|_| leg(&mut rng, &mut n, false, intent)).collect();

        let id = |l: &Leg| l.values[&F::Id].to_string();
        let before = |a: &Leg, b: &Leg| {
            (a.timestamp, a.chain_id, a.block_number, a.log_index) < (b.timestamp, b.chain_id, b.block_number, b.log_index)
        };
        let uint = |l: &Leg, f| l.values.get(&f).and_then(|v| v.as_uint()).map(|u| u.to_string());
        let compatible = |s: &Leg, d: &Leg| {
            s.chain_id != d.chain_id
                && uint(s, F::DstChain).is_none_or(|c| c == d.chain_id.to_string())
                && uint(d, F::SrcChain).is_none_or(|c| c == s.chain_id.to_string())
                && s.timestamp.abs_diff(d.timestamp) <= 86_400
        };
        let symbol = |chain: u64, a: &AbiValue| {
            TOKENS
                .iter()
                .find(|t| t.0 == chain && AbiValue::Address(token(t.1)) == *a)
                .map(|t| t.2)
        };
        let clean = |s: &Leg, d: &Leg| {
            let amount = |l: &Leg| l.values[&F::Amount].as_uint().unwrap().clone();
            (intent || d.timestamp >= s.timestamp)
                && s.values[&F::Recipient] == d.values[&F::Recipient]
                && s.values.get(&F::OutputToken).is_none_or(|t| *t == d.values[&F::Token])
                && !(symbol(s.chain_id, &s.values[&F::Token]).is_some()
                    && symbol(s.chain_id, &s.values[&F::Token]) == symbol(d.chain_id, &d.values[&F::Token])
                    && amount(d) > amount(s))
        };

        let mut expected: BTreeSet<(Ref, Ref)> = BTreeSet::new();
        let mut expected_violations = 0usize;
        for s in &src {
            if src.iter().any(|o| id(o) == id(s) && before(o, s)) {
                expected_violations += 1;
                continue;
            }
            let cands: Vec<&Leg> = dst.iter().filter(|d| id(d) == id(s) && compatible(s, d)).collect();
            let Some(w) = cands.iter().find(|d| cands.iter().all(|o| !before(o, d))) else {
                continue;
            };
            expected_violations += cands.len() - 1;
            if clean(s, w) {
                expected.insert((r(s), r(w)));
            } else {
                expected_violations += 1;
            }
        }
        let exp_src: BTreeSet<Ref> = src.iter().map(r).filter(|x| !expected.iter().any(|p| p.0 == *x)).collect();
        let exp_dst: BTreeSet<Ref> = dst.iter().map(r).filter(|x| !expected.iter().any(|p| p.1 == *x)).collect();

        let out = match_by_id(&ctx, &src, &dst);
        let got: BTreeSet<(Ref, Ref)> = out
            .cctxs
            .iter()
            .map(|c| ((c.src_chain, c.src_tx_hash, c.src_log_index), (c.dst_chain, c.dst_tx_hash, c.dst_log_index)))
            .collect();
        let got_src: BTreeSet<Ref> = out.unmatched_src.iter().map(|e| (e.chain_id, e.tx_hash, e.log_index)).collect();
        let got_dst: BTreeSet<Ref> = out.unmatched_dst.iter().map(|e| (e.chain_id, e.tx_hash, e.log_index)).collect();
        if got != expected || out.cctxs.len() != expected.len() {
            return Err(format!("set {set}: {} cctxs, oracle {}", out.cctxs.len(), expected.len()));
        }
        if got_src != exp_src || got_dst != exp_dst {
            return Err(format!("set {set}: unmatched sets differ"));
        }
        if out.violations.len() != expected_violations {
            return Err(format!("set {set}: {} violations, oracle {expected_violations}", out.violations.len()));
        }
    }
    Ok(())
}

// ------------------------------------------------------------ numerics

pub fn chunk_partition(triples: usize, seed: u64) -> Result<(), String> {
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..triples {
        let from = rng.gen_range(0..1_000_000u64);
        let to = from + rng.gen_range(0..20_000);
        let max = rng.gen_range(1..5_000);
        let ranges = chunk_ranges(from, to, max);
        let mut next = from;
        for c in &ranges {
            if c.from != next || c.to < c.from || c.to - c.from + 1 > max {
                return Err(format!("({from},{to},{max}): bad chunk {c:?}"));
            }
            next = c.to + 1;
        }
        if next != to + 1 || ranges.len() as u64 != (to - from + 1).div_ceil(max) {
            return Err(format!("({from},{to},{max}): chunks do not cover the range exactly"));
        }
    }
    Ok(())
}

fn interpolate(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Largest deviation of `quartiles` from sort-and-interpolate.
pub fn quartile_max_error(arrays: usize, seed: u64) -> Result<f64, String> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = 0f64;
    for _ in 0..arrays {
        let n = rng.gen_range(1..300);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1e4..1e4)).collect();
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        let q = quartiles(&v).map_err(|e| e.to_string())?;
        for (got, p) in [(q.q1, 0.25), (q.q2, 0.5), (q.q3, 0.75)] {
            worst = worst.max((got - interpolate(&s, p)).abs());
        }
        worst = worst.max((q.iqr - (interpolate(&s, 0.75) - interpolate(&s, 0.25))).abs());
    }
    Ok(worst)
}

/// Σ per-cctx amortized fee against the full fee; returns the largest gap in wei.
pub fn amortization_max_gap(pairs: usize, seed: u64) -> Result<u128, String> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = 0u128;
    for _ in 0..pairs {
        let fee: u128 = rng.gen_range(0..10u128.pow(22));
        let n: u32 = rng.gen_range(1..=500);
        let shares = split_tx_fee(fee, n);
        if shares.len() != n as usize || shares.iter().sum::<u128>() != fee {
            return Err(format!("split({fee}, {n}) does not conserve the fee"));
        }
        let per: Decimal = amortize_tx_fee(fee, n);
        let total = per * Decimal::from(n);
        let gap = (total - Decimal::from(fee)).abs();
        let gap = gap.ceil().to_string().parse::<u128>().map_err(|e| e.to_string())?;
        worst = worst.max(gap);
        let per_f: f64 = amortize_tx_fee(fee, n);
        if (per_f * n as f64 - fee as f64).abs() > fee as f64 * 1e-12 + 1.0 {
            return Err(format!("float amortization of ({fee}, {n}) drifts"));
        }
    }
    Ok(worst)
}

/// Largest change in Pearson r under positive affine maps and min-max
/// normalization.
pub fn pearson_affine_max_error(series: usize, seed: u64) -> Result<f64, String> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = 0f64;
    for _ in 0..series {
        let n = rng.gen_range(3..200);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.3 * v + rng.gen_range(-40.0..40.0)).collect();
        let r = pearson(&x, &y).map_err(|e| e.to_string())?;
        let (a, b, c, d) = (
            rng.gen_range(0.1..10.0),
            rng.gen_range(-100.0..100.0),
            rng.gen_range(0.1..10.0),
            rng.gen_range(-100.0..100.0),
        );
        let xa: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let yc: Vec<f64> = y.iter().map(|v| c * v + d).collect();
        let r2 = pearson(&xa, &yc).map_err(|e| e.to_string())?;
        let xn = min_max_normalize(&x).map_err(|e| e.to_string())?;
        let yn = min_max_normalize(&y).map_err(|e| e.to_string())?;
        let r3 = pearson(&xn, &yn).map_err(|e| e.to_string())?;
        let neg: Vec<f64> = x.iter().map(|v| -a * v).collect();
        let r4 = pearson(&neg, &y).map_err(|e| e.to_string())?;
        worst = worst.max((r - r2).abs()).max((r - r3).abs()).max((r + r4).abs());
    }
    Ok(worst)
}
