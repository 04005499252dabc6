use std::fmt;
use std::str::FromStr;

use super::AbiError;

/// Solidity types accepted in event definitions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SolType {
    Address,
    Bool,
    /// `uintN`, N in 8..=256 step 8.
    Uint(u16),
    /// `intN`, N in 8..=256 step 8.
    Int(u16),
    /// `bytesN`, N in 1..=32.
    FixedBytes(u8),
    Bytes,
    String,
    FixedArray(Box<SolType>, usize),
}

impl SolType {
    /// True for types encoded out-of-line (head holds an offset).
    pub fn is_dynamic(&self) -> bool {
        match self {
            SolType::Bytes | SolType::String => true,
            SolType::FixedArray(inner, _) => inner.is_dynamic(),
            _ => false,
        }
    }

    /// True for types that occupy exactly one 32-byte word.
    pub fn is_word(&self) -> bool {
        matches!(
            self,
            SolType::Address | SolType::Bool | SolType::Uint(_) | SolType::Int(_) | SolType::FixedBytes(_)
        )
    }

    /// Bytes taken in the head of an enclosing tuple.
    pub fn head_size(&self) -> usize {
        match self {
            SolType::FixedArray(inner, k) if !self.is_dynamic() => inner.head_size() * k,
            _ => 32,
        }
    }
}

impl fmt::Display for SolType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolType::Address => f.write_str("address"),
            SolType::Bool => f.write_str("bool"),
            SolType::Uint(n) => write!(f, "uint{n}"),
            SolType::Int(n) => write!(f, "int{n}"),
            SolType::FixedBytes(n) => write!(f, "bytes{n}"),
            SolType::Bytes => f.write_str("bytes"),
            SolType::String => f.write_str("string"),
            SolType::FixedArray(inner, k) => write!(f, "{inner}[{k}]"),
        }
    }
}

fn int_width(s: &str, src: &str) -> Result<u16, AbiError> {
    if s.is_empty() {
        return Ok(256);
    }
    let n: u16 = s
        .parse()
        .map_err(|_| AbiError::UnsupportedType(src.to_string()))?;
    if n == 0 || n > 256 || !n.is_multiple_of(8) || s.starts_with('0') {
        return Err(AbiError::UnsupportedType(src.to_string()));
    }
    Ok(n)
}

impl FromStr for SolType {
    type Err = AbiError;

    fn from_str(src: &str) -> Result<Self, Self::Err> {
        let s = src.trim();
        let unsupported = || AbiError::UnsupportedType(src.to_string());
        if let Some(body) = s.strip_suffix(']') {
            let open = body.rfind('[').ok_or_else(unsupported)?;
            let len = &body[open + 1..];
            // Dynamic arrays are outside the supported set.
            if len.is_empty() || len.starts_with('0') {
                return Err(unsupported());
            }
            let k: usize = len.parse().map_err(|_| unsupported())?;
            let inner: SolType = body[..open].parse().map_err(|_| unsupported())?;
            return Ok(SolType::FixedArray(Box::new(inner), k));
        }
        match s {
            "address" => Ok(SolType::Address),
            "bool" => Ok(SolType::Bool),
            "bytes" => Ok(SolType::Bytes),
            "string" => Ok(SolType::String),
            _ => {
                if let Some(w) = s.strip_prefix("uint") {
                    Ok(SolType::Uint(int_width(w, src)?))
                } else if let Some(w) = s.strip_prefix("int") {
                    Ok(SolType::Int(int_width(w, src)?))
                } else if let Some(w) = s.strip_prefix("bytes") {
                    let n: u8 = w.parse().map_err(|_| unsupported())?;
                    if n == 0 || n > 32 || w.starts_with('0') {
                        return Err(unsupported());
                    }
                    Ok(SolType::FixedBytes(n))
                } else {
                    Err(unsupported())
                }
            }
        }
    }
}
