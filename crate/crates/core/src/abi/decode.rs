use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use super::event::event_topic0;
use super::{AbiError, AbiValue, EventAbi, SolType};
use crate::rpc::{BlockInfo, LogEntry};
use crate::types::{Address, ChainId, H256};

/// A log decoded against its event ABI, stamped with block time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodedEvent {
    pub bridge: String,
    pub event_name: String,
    pub chain_id: ChainId,
    pub contract: Address,
    pub fields: BTreeMap<String, AbiValue>,
    pub tx_hash: H256,
    pub log_index: u64,
    pub block_number: u64,
    pub block_timestamp: u64,
}

/// Decodes a single static word under strict padding rules.
pub fn decode_word(ty: &SolType, word: &[u8; 32]) -> Result<AbiValue, AbiError> {
    let dirty = || AbiError::NonCanonicalPadding { ty: ty.to_string() };
    match ty {
        SolType::Address => {
            if word[..12].iter().any(|&b| b != 0) {
                return Err(dirty());
            }
            let mut a = [0u8; 20];
            a.copy_from_slice(&word[12..]);
            Ok(AbiValue::Address(Address(a)))
        }
        SolType::Bool => {
            if word[..31].iter().any(|&b| b != 0) || word[31] > 1 {
                return Err(dirty());
            }
            Ok(AbiValue::Bool(word[31] == 1))
        }
        SolType::Uint(bits) => {
            let pad = 32 - *bits as usize / 8;
            if word[..pad].iter().any(|&b| b != 0) {
                return Err(dirty());
            }
            Ok(AbiValue::Uint(BigUint::from_bytes_be(&word[pad..])))
        }
        SolType::Int(bits) => {
            let pad = 32 - *bits as usize / 8;
            let fill = if word[pad] & 0x80 != 0 { 0xff } else { 0x00 };
            if word[..pad].iter().any(|&b| b != fill) {
                return Err(dirty());
            }
            Ok(AbiValue::Int(BigInt::from_signed_bytes_be(&word[pad..])))
        }
        SolType::FixedBytes(n) => {
            let n = *n as usize;
            if word[n..].iter().any(|&b| b != 0) {
                return Err(dirty());
            }
            Ok(AbiValue::FixedBytes(word[..n].to_vec()))
        }
        other => Err(AbiError::UnsupportedType(format!("{other} is not a single word"))),
    }
}

fn word_at(data: &[u8], pos: usize) -> Result<&[u8; 32], AbiError> {
    data.get(pos..pos.saturating_add(32))
        .filter(|w| w.len() == 32)
        .map(|w| w.try_into().expect("slice of 32"))
        .ok_or(AbiError::TruncatedData {
            offset: pos,
            needed: 32,
            available: data.len().saturating_sub(pos),
        })
}

/// Reads a word used as an offset or length; values that cannot address
/// the buffer are reported as truncation.
fn usize_at(data: &[u8], pos: usize) -> Result<usize, AbiError> {
    let w = word_at(data, pos)?;
    let too_big = AbiError::TruncatedData {
        offset: pos,
        needed: usize::MAX,
        available: data.len(),
    };
    if w[..24].iter().any(|&b| b != 0) {
        return Err(too_big);
    }
    let v = u64::from_be_bytes(w[24..].try_into().expect("8 bytes"));
    usize::try_from(v).map_err(|_| too_big)
}

/// Decodes a head/tail encoded tuple starting at the beginning of `data`.
fn decode_tuple(types: &[&SolType], data: &[u8]) -> Result<Vec<AbiValue>, AbiError> {
    let mut out = Vec::with_capacity(types.len());
    let mut head = 0usize;
    for ty in types {
        if ty.is_dynamic() {
            let offset = usize_at(data, head)?;
            if offset > data.len() {
                return Err(AbiError::TruncatedData {
                    offset,
                    needed: 32,
                    available: 0,
                });
            }
            out.push(decode_dynamic(ty, &data[offset..])?);
            head += 32;
        } else {
            out.push(decode_static(ty, data, head)?);
            head += ty.head_size();
        }
    }
    Ok(out)
}

fn decode_static(ty: &SolType, data: &[u8], pos: usize) -> Result<AbiValue, AbiError> {
    match ty {
        SolType::FixedArray(inner, k) => {
            let step = inner.head_size();
            (0..*k)
                .map(|i| decode_static(inner, data, pos + i * step))
                .collect::<Result<_, _>>()
                .map(AbiValue::Array)
        }
        _ => decode_word(ty, word_at(data, pos)?),
    }
}

fn decode_dynamic(ty: &SolType, region: &[u8]) -> Result<AbiValue, AbiError> {
    match ty {
        SolType::Bytes | SolType::String => {
            let len = usize_at(region, 0)?;
            let padded = len.div_ceil(32) * 32;
            let body = region
                .get(32..32usize.saturating_add(padded))
                .filter(|b| b.len() == padded)
                .ok_or(AbiError::TruncatedData {
                    offset: 32,
                    needed: padded,
                    available: region.len().saturating_sub(32),
                })?;
            if body[len..].iter().any(|&b| b != 0) {
                return Err(AbiError::NonCanonicalPadding { ty: ty.to_string() });
            }
            let bytes = body[..len].to_vec();
            if *ty == SolType::String {
                String::from_utf8(bytes)
                    .map(AbiValue::String)
                    .map_err(|_| AbiError::InvalidUtf8)
            } else {
                Ok(AbiValue::Bytes(bytes))
            }
        }
        SolType::FixedArray(inner, k) => {
            let types: Vec<&SolType> = std::iter::repeat_n(inner.as_ref(), *k).collect();
            decode_tuple(&types, region).map(AbiValue::Array)
        }
        other => Err(AbiError::UnsupportedType(other.to_string())),
    }
}

/// Decodes the non-indexed parameters of an event from log data.
pub fn decode_data(abi: &EventAbi, data: &[u8]) -> Result<Vec<AbiValue>, AbiError> {
    let types: Vec<&SolType> = abi.inputs.iter().filter(|p| !p.indexed).map(|p| &p.ty).collect();
    decode_tuple(&types, data)
}

pub fn decode_log(
    bridge: &str,
    abi: &EventAbi,
    log: &LogEntry,
    block: &BlockInfo,
) -> Result<DecodedEvent, AbiError> {
    if log.block_number != block.number {
        return Err(AbiError::BlockMismatch {
            log_block: log.block_number,
            block: block.number,
        });
    }
    let mut topics = log.topics.iter();
    let expected_topics = abi.indexed_count() + usize::from(!abi.anonymous);
    if log.topics.len() != expected_topics {
        if !abi.anonymous {
            let expected = event_topic0(abi)?;
            if log.topics.first().is_some_and(|t| *t != expected) {
                return Err(AbiError::TopicMismatch {
                    event: abi.name.clone(),
                    expected,
                    actual: log.topics[0],
                });
            }
        }
        return Err(AbiError::ArityMismatch {
            event: abi.name.clone(),
            expected: expected_topics,
            actual: log.topics.len(),
        });
    }
    if !abi.anonymous {
        let expected = event_topic0(abi)?;
        let actual = *topics.next().expect("arity checked");
        if actual != expected {
            return Err(AbiError::TopicMismatch {
                event: abi.name.clone(),
                expected,
                actual,
            });
        }
    }

    let mut data_values = decode_data(abi, &log.data)?.into_iter();
    let mut fields = BTreeMap::new();
    for p in &abi.inputs {
        let v = if p.indexed {
            let topic = topics.next().expect("arity checked");
            if p.ty.is_word() {
                decode_word(&p.ty, &topic.0)?
            } else {
                AbiValue::Hashed(*topic)
            }
        } else {
            data_values.next().expect("one value per non-indexed input")
        };
        fields.insert(p.name.clone(), v);
    }

    Ok(DecodedEvent {
        bridge: bridge.to_string(),
        event_name: abi.name.clone(),
        chain_id: log.chain_id,
        contract: log.address,
        fields,
        tx_hash: log.tx_hash,
        log_index: log.log_index,
        block_number: log.block_number,
        block_timestamp: block.timestamp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abi::EventParam;

    fn word_u(v: u64) -> [u8; 32] {
        let mut w = [0u8; 32];
        w[24..].copy_from_slice(&v.to_be_bytes());
        w
    }

    fn transfer() -> EventAbi {
        let p = |n: &str, t: &str, i| EventParam {
            name: n.into(),
            ty: t.parse().unwrap(),
            indexed: i,
        };
        EventAbi::new(
            "Transfer",
            vec![p("from", "address", true), p("to", "address", true), p("value", "uint256", false)],
            false,
        )
        .unwrap()
    }

    fn log(topics: Vec<H256>, data: Vec<u8>) -> LogEntry {
        LogEntry {
            chain_id: 1,
            address: Address([0xcc; 20]),
            topics,
            data,
            block_number: 5,
            tx_hash: H256([0x11; 32]),
            log_index: 0,
            removed: false,
        }
    }

    const BLOCK: BlockInfo = BlockInfo {
        number: 5,
        timestamp: 1000,
        hash: H256([0; 32]),
    };

    #[test]
    fn words() {
        assert_eq!(decode_word(&SolType::Bool, &word_u(1)).unwrap(), AbiValue::Bool(true));
        assert_eq!(
            decode_word(&SolType::Int(256), &[0xff; 32]).unwrap(),
            AbiValue::Int(BigInt::from(-1))
        );
        let mut dirty = [0u8; 32];
        dirty[0] = 1;
        dirty[31] = 7;
        assert!(matches!(
            decode_word(&SolType::Address, &dirty),
            Err(AbiError::NonCanonicalPadding { .. })
        ));
        assert!(decode_word(&SolType::Bool, &word_u(2)).is_err());
        assert!(decode_word(&SolType::Uint(8), &word_u(256)).is_err());
        assert_eq!(
            decode_word(&SolType::Uint(8), &word_u(255)).unwrap(),
            AbiValue::Uint(255u32.into())
        );
        // int8 -1 must be sign-extended across the whole word
        let mut neg = [0u8; 32];
        neg[31] = 0xff;
        assert!(decode_word(&SolType::Int(8), &neg).is_err());
        let mut fb = [0u8; 32];
        fb[0] = 0xab;
        assert_eq!(decode_word(&SolType::FixedBytes(1), &fb).unwrap(), AbiValue::FixedBytes(vec![0xab]));
        fb[1] = 1;
        assert!(decode_word(&SolType::FixedBytes(1), &fb).is_err());
    }

    #[test]
    fn transfer_log() {
        let abi = transfer();
        let s = Address([0xaa; 20]);
        let r = Address([0xbb; 20]);
        let ev = decode_log(
            "b",
            &abi,
            &log(vec![event_topic0(&abi).unwrap(), s.to_word(), r.to_word()], word_u(1500).to_vec()),
            &BLOCK,
        )
        .unwrap();
        assert_eq!(ev.fields["from"], AbiValue::Address(s));
        assert_eq!(ev.fields["to"], AbiValue::Address(r));
        assert_eq!(ev.fields["value"], AbiValue::Uint(1500u32.into()));
        assert_eq!(ev.block_timestamp, 1000);
        assert_eq!(ev.fields.len(), 3);
    }

    #[test]
    fn error_paths() {
        let abi = transfer();
        let t0 = event_topic0(&abi).unwrap();
        let w = Address([1; 20]).to_word();
        assert!(matches!(
            decode_log("b", &abi, &log(vec![t0, w, w], vec![0; 16]), &BLOCK),
            Err(AbiError::TruncatedData { .. })
        ));
        assert!(matches!(
            decode_log("b", &abi, &log(vec![t0, w], word_u(1).to_vec()), &BLOCK),
            Err(AbiError::ArityMismatch { .. })
        ));
        assert!(matches!(
            decode_log("b", &abi, &log(vec![H256([9; 32]), w, w], word_u(1).to_vec()), &BLOCK),
            Err(AbiError::TopicMismatch { .. })
        ));
        let other = BlockInfo { number: 6, ..BLOCK };
        assert!(matches!(
            decode_log("b", &abi, &log(vec![t0, w, w], word_u(1).to_vec()), &other),
            Err(AbiError::BlockMismatch { .. })
        ));
    }

    #[test]
    fn indexed_dynamic_is_hashed() {
        let abi = EventAbi::new(
            "Note",
            vec![
                EventParam { name: "tag".into(), ty: SolType::String, indexed: true },
                EventParam { name: "body".into(), ty: SolType::Bytes, indexed: false },
            ],
            false,
        )
        .unwrap();
        let mut data = word_u(32).to_vec();
        data.extend(word_u(3));
        let mut body = [0u8; 32];
        body[..3].copy_from_slice(&[1, 2, 3]);
        data.extend(body);
        let tag_hash = crate::abi::keccak256(b"hello");
        let ev = decode_log("b", &abi, &log(vec![event_topic0(&abi).unwrap(), tag_hash], data.clone()), &BLOCK).unwrap();
        assert_eq!(ev.fields["tag"], AbiValue::Hashed(tag_hash));
        assert!(ev.fields["tag"].is_hashed());
        assert_eq!(ev.fields["body"], AbiValue::Bytes(vec![1, 2, 3]));

        // dirty tail padding
        data[32 * 2 + 5] = 1;
        assert!(matches!(
            decode_log("b", &abi, &log(vec![event_topic0(&abi).unwrap(), tag_hash], data), &BLOCK),
            Err(AbiError::NonCanonicalPadding { .. })
        ));
    }

    #[test]
    fn absurd_offset_is_truncation() {
        let abi = EventAbi::new(
            "S",
            vec![EventParam { name: "s".into(), ty: SolType::String, indexed: false }],
            false,
        )
        .unwrap();
        let data = [0xffu8; 32].to_vec();
        assert!(matches!(decode_data(&abi, &data), Err(AbiError::TruncatedData { .. })));
        let data = word_u(4096).to_vec();
        assert!(matches!(decode_data(&abi, &data), Err(AbiError::TruncatedData { .. })));
    }
}
