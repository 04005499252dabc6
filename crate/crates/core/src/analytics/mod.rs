//! Latency, cost and fee measurements over cctxs.
//!
//! Money is exact [`Decimal`](rust_decimal::Decimal) until rendering.
//! Order statistics are generic over [`Scalar`](crate::Scalar) and
//! correlation over floats.

mod cost;
mod report;
mod stats;
mod summary;

pub use cost::{cost_breakdown, detect_profit_cctxs, latency, CostBreakdown, Pricing, ProfitCctx};
pub use report::{write_report, ReportFiles};
pub use stats::{min_max_normalize, pearson, quantile_sorted, quartiles, Quartiles};
pub use summary::{group_summaries, GroupBy, GroupReport, MetricsSummary};

use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("empty input")]
    EmptyInput,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Price(#[from] ConfigError),
    #[error("cctx {cctx_id}: {reason}")]
    Unpriceable { cctx_id: String, reason: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
}
