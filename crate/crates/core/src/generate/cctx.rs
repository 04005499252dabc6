use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::types::{display_str, opt_display_str, Address, ChainId, H256};

/// One logical transfer linked across two chains.
///
/// Fees are full transaction fees in wei; `n_src`/`n_dst` count how many
/// cctxs share the underlying transaction so the fee can be amortized.
/// Bus batches additionally carry the dispatch transaction on the source
/// chain, shared by `n_dispatch` cctxs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossChainTx {
    pub cctx_id: String,
    pub bridge: String,
    pub src_chain: ChainId,
    pub dst_chain: ChainId,
    pub src_tx_hash: H256,
    pub dst_tx_hash: H256,
    pub src_event: String,
    pub dst_event: String,
    pub src_block: u64,
    pub dst_block: u64,
    pub src_log_index: u64,
    pub dst_log_index: u64,
    pub src_timestamp: u64,
    pub dst_timestamp: u64,
    pub sender: Address,
    pub recipient: Address,
    pub src_token: Address,
    pub dst_token: Address,
    #[serde(with = "display_str")]
    pub amount_in: BigUint,
    #[serde(with = "display_str")]
    pub amount_out: BigUint,
    #[serde(with = "display_str")]
    pub src_tx_fee_wei: u128,
    #[serde(with = "display_str")]
    pub src_gas_price_wei: u128,
    #[serde(with = "display_str")]
    pub dst_tx_fee_wei: u128,
    pub n_src: u32,
    pub n_dst: u32,
    #[serde(default, with = "opt_display_str")]
    pub batch_id: Option<String>,
    #[serde(default, with = "opt_display_str")]
    pub dispatch_tx_hash: Option<H256>,
    #[serde(default, with = "opt_display_str")]
    pub dispatch_fee_wei: Option<u128>,
    #[serde(default)]
    pub n_dispatch: Option<u32>,
    #[serde(default, with = "opt_display_str")]
    pub solver: Option<Address>,
    /// Integrity violation this pair was kept despite; `None` for clean cctxs.
    #[serde(default, with = "opt_display_str")]
    pub flagged: Option<String>,
}

impl CrossChainTx {
    /// Destination minus source timestamp. Negative when a fill landed first.
    pub fn latency_secs(&self) -> i64 {
        self.dst_timestamp as i64 - self.src_timestamp as i64
    }

    pub fn is_flagged(&self) -> bool {
        self.flagged.is_some()
    }
}
