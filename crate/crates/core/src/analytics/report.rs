use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use num_traits::{FromPrimitive, ToPrimitive};
use rust_decimal::{Decimal, RoundingStrategy};
use serde_json::{json, Value};

use super::cost::{cost_breakdown, detect_profit_cctxs, Pricing};
use super::stats::{min_max_normalize, pearson, Quartiles};
use super::summary::{group_summaries, GroupBy, GroupReport};
use super::AnalyticsError;
use crate::generate::CrossChainTx;

/// Paths written by [`write_report`] and headline numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub files: Vec<PathBuf>,
    pub groups: GroupReport,
    pub profit_count: usize,
    pub fee_gas_correlation: Option<f64>,
}

fn fixed(d: &Decimal, dp: u32) -> String {
    let r = d.round_dp_with_strategy(dp, RoundingStrategy::MidpointAwayFromZero);
    format!("{r:.prec$}", prec = dp as usize)
}

fn usd(d: &Decimal) -> String {
    fixed(d, 6)
}

fn secs(d: &Decimal) -> String {
    fixed(d, 2)
}

fn quartile_cells(q: Option<&Quartiles<Decimal>>, f: fn(&Decimal) -> String) -> [String; 4] {
    match q {
        Some(q) => [f(&q.q1), f(&q.q2), f(&q.q3), f(&q.iqr)],
        None => Default::default(),
    }
}

fn quartile_json(q: Option<&Quartiles<Decimal>>, f: fn(&Decimal) -> String) -> Value {
    match q {
        Some(q) => json!({"q1": f(&q.q1), "q2": f(&q.q2), "q3": f(&q.q3), "iqr": f(&q.iqr)}),
        None => Value::Null,
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, AnalyticsError> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

/// Writes the summary tables, the fee/gas-price series and the list of
/// profitable cctxs for `cctxs` into `dir`:
///
/// - `summary_<pair|layer>.csv` and `.json`
/// - `fee_gas_series.csv`
/// - `profit_cctxs.csv`
///
/// USD values are rendered with 6 decimals, latencies with 2.
pub fn write_report(
    dir: &Path,
    bridge: &str,
    cctxs: &[CrossChainTx],
    pricing: &Pricing,
    group_by: GroupBy,
) -> Result<ReportFiles, AnalyticsError> {
    std::fs::create_dir_all(dir)?;
    let groups = group_summaries(cctxs, pricing, group_by);
    let mut files = Vec::new();

    let summary_csv = dir.join(format!("summary_{group_by}.csv"));
    let mut w = csv_writer(&summary_csv)?;
    w.write_record([
        "group", "n", "n_priced", "total_value_usd", "latency_q1", "latency_q2", "latency_q3", "latency_iqr",
        "cost_q1", "cost_q2", "cost_q3", "cost_iqr",
    ])?;
    for s in &groups.summaries {
        let mut row = vec![s.group.clone(), s.n.to_string(), s.n_priced.to_string(), usd(&s.total_value_usd)];
        row.extend(quartile_cells(Some(&s.latency), secs));
        row.extend(quartile_cells(s.cost.as_ref(), usd));
        w.write_record(&row)?;
    }
    w.flush()?;
    files.push(summary_csv);

    // fee vs gas price series over priced cctxs
    let mut series: Vec<(&CrossChainTx, Decimal)> = Vec::new();
    for c in cctxs {
        if let Ok(b) = cost_breakdown(c, pricing) {
            series.push((c, b.user_cost_usd));
        }
    }
    let gas: Vec<Decimal> = series.iter().map(|(c, _)| Decimal::from_u128(c.src_gas_price_wei).unwrap_or(Decimal::MAX)).collect();
    let fees: Vec<Decimal> = series.iter().map(|(_, f)| *f).collect();
    let gas_norm = min_max_normalize(&gas).ok();
    let fee_norm = min_max_normalize(&fees).ok();
    let gas_f: Vec<f64> = gas.iter().map(|d| d.to_f64().unwrap_or(f64::NAN)).collect();
    let fee_f: Vec<f64> = fees.iter().map(|d| d.to_f64().unwrap_or(f64::NAN)).collect();
    let correlation = pearson(&gas_f, &fee_f).ok();

    let series_csv = dir.join("fee_gas_series.csv");
    let mut w = csv_writer(&series_csv)?;
    w.write_record(["cctx_id", "src_chain", "gas_price_wei", "user_cost_usd", "gas_price_norm", "user_cost_norm"])?;
    for (i, (c, fee)) in series.iter().enumerate() {
        let norm = |v: &Option<Vec<Decimal>>| v.as_ref().map(|v| usd(&v[i])).unwrap_or_default();
        w.write_record([
            c.cctx_id.clone(),
            c.src_chain.to_string(),
            c.src_gas_price_wei.to_string(),
            usd(fee),
            norm(&gas_norm),
            norm(&fee_norm),
        ])?;
    }
    w.flush()?;
    files.push(series_csv);

    let profits = detect_profit_cctxs(cctxs, pricing);
    let profit_csv = dir.join("profit_cctxs.csv");
    let mut w = csv_writer(&profit_csv)?;
    w.write_record([
        "cctx_id", "bridge", "src_chain", "dst_chain", "value_in_usd", "value_out_usd", "protocol_fee_usd",
        "src_tx_fee_usd", "user_cost_usd", "profit_usd",
    ])?;
    for p in &profits {
        w.write_record([
            p.cctx_id.clone(),
            p.bridge.clone(),
            p.src_chain.to_string(),
            p.dst_chain.to_string(),
            usd(&p.cost.value_in_usd),
            usd(&p.cost.value_out_usd),
            usd(&p.cost.protocol_fee_usd),
            usd(&p.cost.src_tx_fee_usd),
            usd(&p.cost.user_cost_usd),
            usd(&p.profit_usd),
        ])?;
    }
    w.flush()?;
    files.push(profit_csv);

    let doc = json!({
        "bridge": bridge,
        "group_by": group_by.as_str(),
        "cctx_count": cctxs.len(),
        "priced": groups.priced,
        "unpriced": groups.unpriced.iter().map(|(id, why)| json!({"cctx_id": id, "reason": why})).collect::<Vec<_>>(),
        "profit_cctxs": profits.len(),
        "fee_gas_correlation": correlation.map(|r| format!("{r:.6}")),
        "summaries": groups.summaries.iter().map(|s| json!({
            "group": s.group,
            "n": s.n,
            "n_priced": s.n_priced,
            "total_value_usd": usd(&s.total_value_usd),
            "latency": quartile_json(Some(&s.latency), secs),
            "cost": quartile_json(s.cost.as_ref(), usd),
        })).collect::<Vec<_>>(),
    });
    let summary_json = dir.join(format!("summary_{group_by}.json"));
    let mut text = serde_json::to_string_pretty(&doc).expect("json");
    text.push('\n');
    std::fs::write(&summary_json, text)?;
    files.push(summary_json);

    Ok(ReportFiles {
        files,
        profit_count: profits.len(),
        groups,
        fee_gas_correlation: correlation,
    })
}
