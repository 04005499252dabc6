use crate::Scalar;

/// Per-cctx share of a transaction fee paid once for `n` cctxs.
///
/// # Panics
/// If `n == 0` or the fee is not representable in `S`.
pub fn amortize_tx_fee<S: Scalar>(fee_wei: u128, n: u32) -> S {
    assert!(n >= 1, "fanout must be at least 1");
    let fee = S::from_u128(fee_wei).expect("fee representable in scalar type");
    fee / S::from_u32(n).expect("fanout representable")
}

/// Splits a fee into `n` integer shares that sum exactly to the fee. The
/// first `fee % n` shares carry one extra wei.
pub fn split_tx_fee(fee_wei: u128, n: u32) -> Vec<u128> {
    assert!(n >= 1, "fanout must be at least 1");
    let n128 = n as u128;
    let (q, r) = (fee_wei / n128, fee_wei % n128);
    (0..n128).map(|i| q + u128::from(i < r)).collect()
}
