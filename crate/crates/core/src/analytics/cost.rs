use std::str::FromStr;

use num_bigint::BigUint;
use rust_decimal::Decimal;
use serde::Serialize;

use super::AnalyticsError;
use crate::config::{ChainRegistry, PriceTable, TokenInfo};
use crate::generate::CrossChainTx;
use crate::types::{Address, ChainId};

const NATIVE_DECIMALS: u32 = 18;

/// Everything needed to value a cctx in USD.
#[derive(Debug, Clone, Copy)]
pub struct Pricing<'a> {
    pub prices: &'a PriceTable,
    pub chains: &'a ChainRegistry,
    /// Token symbols and decimals, from the bridge config.
    pub tokens: &'a [TokenInfo],
}

/// USD valuation of one cctx.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostBreakdown {
    /// Amortized source transaction fee, plus the amortized dispatch fee
    /// for bus batches.
    pub src_tx_fee_usd: Decimal,
    pub protocol_fee_usd: Decimal,
    pub user_cost_usd: Decimal,
    pub value_in_usd: Decimal,
    pub value_out_usd: Decimal,
    /// Amortized destination fee, paid by the operator.
    pub operator_cost_usd: Decimal,
}

/// Seconds from source to destination event; negative if the destination
/// came first.
pub fn latency(c: &CrossChainTx) -> i64 {
    c.latency_secs()
}

fn unpriceable(c: &CrossChainTx, reason: String) -> AnalyticsError {
    AnalyticsError::Unpriceable {
        cctx_id: c.cctx_id.clone(),
        reason,
    }
}

/// `raw / 10^decimals` as an exact decimal.
fn scaled(c: &CrossChainTx, raw: &BigUint, decimals: u32) -> Result<Decimal, AnalyticsError> {
    let mut d = Decimal::from_str(&raw.to_string()).map_err(|_| unpriceable(c, format!("amount {raw} too large")))?;
    d.set_scale(decimals)
        .map_err(|_| unpriceable(c, format!("amount {raw} with {decimals} decimals out of range")))?;
    Ok(d.normalize())
}

impl Pricing<'_> {
    fn token(&self, c: &CrossChainTx, chain: ChainId, address: Address) -> Result<&TokenInfo, AnalyticsError> {
        self.tokens
            .iter()
            .find(|t| t.chain_id == chain && t.address == address)
            .ok_or_else(|| unpriceable(c, format!("token {address} on chain {chain} has no symbol")))
    }

    fn token_value(&self, c: &CrossChainTx, chain: ChainId, token: Address, raw: &BigUint, ts: u64) -> Result<Decimal, AnalyticsError> {
        let t = self.token(c, chain, token)?;
        let price = self.prices.at_timestamp(&t.symbol, ts as i64)?;
        Ok(scaled(c, raw, t.decimals)? * price)
    }

    fn native_value(&self, c: &CrossChainTx, chain: ChainId, wei: u128, ts: u64) -> Result<Decimal, AnalyticsError> {
        let native = &self
            .chains
            .by_id(chain)
            .ok_or_else(|| unpriceable(c, format!("chain {chain} not in registry")))?
            .native_symbol;
        let price = self.prices.at_timestamp(native, ts as i64)?;
        Ok(scaled(c, &BigUint::from(wei), NATIVE_DECIMALS)? * price)
    }
}

pub fn cost_breakdown(c: &CrossChainTx, p: &Pricing) -> Result<CostBreakdown, AnalyticsError> {
    let value_in_usd = p.token_value(c, c.src_chain, c.src_token, &c.amount_in, c.src_timestamp)?;
    let value_out_usd = p.token_value(c, c.dst_chain, c.dst_token, &c.amount_out, c.dst_timestamp)?;
    let mut src_tx_fee_usd =
        p.native_value(c, c.src_chain, c.src_tx_fee_wei, c.src_timestamp)? / Decimal::from(c.n_src.max(1));
    if let Some(fee) = c.dispatch_fee_wei {
        let n = c.n_dispatch.unwrap_or(1).max(1);
        src_tx_fee_usd += p.native_value(c, c.src_chain, fee, c.src_timestamp)? / Decimal::from(n);
    }
    let operator_cost_usd =
        p.native_value(c, c.dst_chain, c.dst_tx_fee_wei, c.dst_timestamp)? / Decimal::from(c.n_dst.max(1));
    let protocol_fee_usd = value_in_usd - value_out_usd;
    Ok(CostBreakdown {
        src_tx_fee_usd: src_tx_fee_usd.normalize(),
        protocol_fee_usd: protocol_fee_usd.normalize(),
        user_cost_usd: (src_tx_fee_usd + protocol_fee_usd).normalize(),
        value_in_usd,
        value_out_usd,
        operator_cost_usd: operator_cost_usd.normalize(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProfitCctx {
    pub cctx_id: String,
    pub bridge: String,
    pub src_chain: ChainId,
    pub dst_chain: ChainId,
    pub cost: CostBreakdown,
    /// `-user_cost_usd`.
    pub profit_usd: Decimal,
}

/// Priced cctxs whose user cost is negative, largest profit first.
/// Unpriceable cctxs are skipped.
pub fn detect_profit_cctxs(cctxs: &[CrossChainTx], p: &Pricing) -> Vec<ProfitCctx> {
    let mut out: Vec<ProfitCctx> = cctxs
        .iter()
        .filter_map(|c| cost_breakdown(c, p).ok().map(|b| (c, b)))
        .filter(|(_, b)| b.user_cost_usd < Decimal::ZERO)
        .map(|(c, b)| ProfitCctx {
            cctx_id: c.cctx_id.clone(),
            bridge: c.bridge.clone(),
            src_chain: c.src_chain,
            dst_chain: c.dst_chain,
            profit_usd: -b.user_cost_usd,
            cost: b,
        })
        .collect();
    out.sort_by(|a, b| b.profit_usd.cmp(&a.profit_usd).then_with(|| a.cctx_id.cmp(&b.cctx_id)));
    out
}
