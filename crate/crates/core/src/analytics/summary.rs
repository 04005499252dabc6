use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::Serialize;

use super::cost::{cost_breakdown, Pricing};
use super::stats::{quartiles, Quartiles};
use crate::generate::CrossChainTx;
use crate::types::Layer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupBy {
    /// `(src_chain, dst_chain)`
    Pair,
    /// `src_layer -> dst_layer`
    Layer,
}

impl GroupBy {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupBy::Pair => "pair",
            GroupBy::Layer => "layer",
        }
    }
}

impl FromStr for GroupBy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pair" => Ok(GroupBy::Pair),
            "layer" => Ok(GroupBy::Layer),
            _ => Err(format!("unknown grouping {s:?}, expected pair or layer")),
        }
    }
}

impl fmt::Display for GroupBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Statistics of one group. Latency covers all `n` cctxs, USD figures
/// only the `n_priced` that could be valued.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricsSummary {
    pub group: String,
    pub n: usize,
    pub n_priced: usize,
    pub total_value_usd: Decimal,
    pub latency: Quartiles<Decimal>,
    pub cost: Option<Quartiles<Decimal>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupReport {
    pub group_by: GroupBy,
    pub summaries: Vec<MetricsSummary>,
    pub priced: usize,
    /// `(cctx_id, reason)` of cctxs left out of USD metrics.
    pub unpriced: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Pair(u64, u64),
    Layer(Layer, Layer),
    UnknownLayer,
}

#[derive(Default)]
struct Acc {
    latencies: Vec<Decimal>,
    costs: Vec<Decimal>,
    value: Decimal,
}

pub fn group_summaries(cctxs: &[CrossChainTx], p: &Pricing, group_by: GroupBy) -> GroupReport {
    let mut groups: BTreeMap<Key, Acc> = BTreeMap::new();
    let mut unpriced = Vec::new();
    let mut priced = 0;
    for c in cctxs {
        let key = match group_by {
            GroupBy::Pair => Key::Pair(c.src_chain, c.dst_chain),
            GroupBy::Layer => match (p.chains.layer(c.src_chain), p.chains.layer(c.dst_chain)) {
                (Some(a), Some(b)) => Key::Layer(a, b),
                _ => Key::UnknownLayer,
            },
        };
        let acc = groups.entry(key).or_default();
        acc.latencies.push(Decimal::from(c.latency_secs()));
        match cost_breakdown(c, p) {
            Ok(b) => {
                priced += 1;
                acc.costs.push(b.user_cost_usd);
                acc.value += b.value_in_usd;
            }
            Err(e) => unpriced.push((c.cctx_id.clone(), e.to_string())),
        }
    }
    let summaries = groups
        .into_iter()
        .map(|(k, acc)| MetricsSummary {
            group: match k {
                Key::Pair(s, d) => format!("{}->{}", p.chains.name_of(s), p.chains.name_of(d)),
                Key::Layer(s, d) => format!("{s}->{d}"),
                Key::UnknownLayer => "unknown".into(),
            },
            n: acc.latencies.len(),
            n_priced: acc.costs.len(),
            total_value_usd: acc.value,
            latency: quartiles(&acc.latencies).expect("groups are non-empty"),
            cost: quartiles(&acc.costs).ok(),
        })
        .collect();
    GroupReport {
        group_by,
        summaries,
        priced,
        unpriced,
    }
}
