//! Primitive chain types: addresses, 32-byte words, chain descriptors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type ChainId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid hex value {value:?}: {reason}")]
pub struct HexError {
    pub value: String,
    pub reason: String,
}

fn decode_fixed<const N: usize>(s: &str) -> Result<[u8; N], HexError> {
    let err = |reason: &str| HexError {
        value: s.to_string(),
        reason: reason.to_string(),
    };
    let body = s
        .strip_prefix("0x")
        .or_else(|| s.strip_prefix("0X"))
        .ok_or_else(|| err("missing 0x prefix"))?;
    if body.len() != N * 2 {
        return Err(err(&format!("expected {} hex digits", N * 2)));
    }
    let mut out = [0u8; N];
    hex::decode_to_slice(body, &mut out).map_err(|e| err(&e.to_string()))?;
    Ok(out)
}

macro_rules! fixed_bytes {
    ($name:ident, $len:expr, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
        pub struct $name(pub [u8; $len]);

        impl $name {
            pub const LEN: usize = $len;

            pub fn as_bytes(&self) -> &[u8; $len] {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "0x{}", hex::encode(self.0))
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Display::fmt(self, f)
            }
        }

        impl FromStr for $name {
            type Err = HexError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                decode_fixed::<$len>(s).map($name)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

fixed_bytes!(Address, 20, "20-byte account or contract address.");
fixed_bytes!(H256, 32, "32-byte word: hashes, topics, identifiers.");

impl Address {
    /// Left-pads the address to a 32-byte ABI word.
    pub fn to_word(&self) -> H256 {
        let mut w = [0u8; 32];
        w[12..].copy_from_slice(&self.0);
        H256(w)
    }
}

/// Settlement layer of a chain, assigned by the analyst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Layer {
    L1,
    L2,
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layer::L1 => f.write_str("L1"),
            Layer::L2 => f.write_str("L2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainDescriptor {
    pub chain_id: ChainId,
    pub name: String,
    pub layer: Layer,
    pub native_symbol: String,
}

/// Parses a `0x`-prefixed hex quantity as used by Ethereum JSON-RPC.
pub fn parse_quantity(s: &str) -> Result<u128, HexError> {
    let err = |reason: &str| HexError {
        value: s.to_string(),
        reason: reason.to_string(),
    };
    let body = s.strip_prefix("0x").ok_or_else(|| err("missing 0x prefix"))?;
    if body.is_empty() {
        return Err(err("empty quantity"));
    }
    u128::from_str_radix(body, 16).map_err(|e| err(&e.to_string()))
}

pub fn format_quantity(v: u64) -> String {
    format!("{v:#x}")
}

/// Parses arbitrary-length `0x` hex data.
pub fn parse_data(s: &str) -> Result<Vec<u8>, HexError> {
    let body = s.strip_prefix("0x").ok_or_else(|| HexError {
        value: s.to_string(),
        reason: "missing 0x prefix".into(),
    })?;
    hex::decode(body).map_err(|e| HexError {
        value: s.to_string(),
        reason: e.to_string(),
    })
}

/// Serde helper: any `Display + FromStr` value as a string. Keeps `u128`
/// and big integers exact in JSON.
pub(crate) mod display_str {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// [`display_str`] for optional values; `None` is an empty string in CSV
/// and `null` in JSON.
pub(crate) mod opt_display_str {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(v: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.collect_str(v),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<Option<T>, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        match Option::<String>::deserialize(d)? {
            None => Ok(None),
            Some(s) if s.is_empty() => Ok(None),
            Some(s) => s.parse().map(Some).map_err(serde::de::Error::custom),
        }
    }
}
