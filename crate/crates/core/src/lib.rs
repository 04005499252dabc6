//! Extraction of bridge-contract events from EVM chains, linking of those
//! events into cross-chain transactions, and latency/cost analytics over the
//! resulting dataset.
//!
//! The pipeline has three stages:
//!
//! 1. [`extract`] pulls logs over JSON-RPC (or a replay fixture), decodes
//!    them against the bridge's event ABIs and persists one relation per
//!    event kind through a [`storage::Repository`].
//! 2. [`generate`] joins the persisted events into [`CrossChainTx`] records
//!    using the matching rules of the bridge's adapter family.
//! 3. [`analytics`] turns cctxs into latency, cost and fee statistics.
//!
//! Statistics are generic over [`Scalar`]; the aliases below fix the
//! concrete types used by the pipeline.

pub mod abi;
pub mod analytics;
pub mod config;
pub mod extract;
pub mod generate;
pub mod rpc;
pub mod scalar;
pub mod storage;
pub mod types;

pub use generate::CrossChainTx;
pub use scalar::Scalar;
pub use types::{Address, ChainId, H256};

/// Exact decimal used for every monetary quantity.
pub type Usd = rust_decimal::Decimal;

/// Native-token amounts in the smallest unit.
pub type Wei = u128;

/// Quartiles over exact decimals (USD costs, latencies in reports).
pub type ExactQuartiles = analytics::Quartiles<rust_decimal::Decimal>;

/// Quartiles over binary floating point.
pub type FloatQuartiles = analytics::Quartiles<f64>;

/// Quartiles over arbitrary-precision rationals.
pub type RationalQuartiles = analytics::Quartiles<num_rational::BigRational>;
