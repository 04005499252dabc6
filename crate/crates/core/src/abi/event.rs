use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha3::{Digest, Keccak256};

use super::{AbiError, SolType};
use crate::types::H256;

/// Keccak-256 with the original (pre-SHA-3) padding, as used by Ethereum.
pub fn keccak256(data: &[u8]) -> H256 {
    H256(Keccak256::digest(data).into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventParam {
    pub name: String,
    pub ty: SolType,
    pub indexed: bool,
}

/// A Solidity event definition, (de)serialized as a JSON-ABI fragment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "JsonEvent", into = "JsonEvent")]
pub struct EventAbi {
    pub name: String,
    pub inputs: Vec<EventParam>,
    pub anonymous: bool,
}

#[derive(Serialize, Deserialize)]
struct JsonEvent {
    #[serde(rename = "type")]
    kind: String,
    name: String,
    #[serde(default)]
    inputs: Vec<JsonParam>,
    #[serde(default)]
    anonymous: bool,
}

#[derive(Serialize, Deserialize)]
struct JsonParam {
    #[serde(default)]
    name: String,
    #[serde(rename = "type")]
    ty: String,
    #[serde(default)]
    indexed: bool,
}

impl TryFrom<JsonEvent> for EventAbi {
    type Error = AbiError;

    fn try_from(j: JsonEvent) -> Result<Self, Self::Error> {
        if j.kind != "event" {
            return Err(AbiError::InvalidAbi(format!(
                "fragment {:?} has type {:?}, expected \"event\"",
                j.name, j.kind
            )));
        }
        let inputs = j
            .inputs
            .into_iter()
            .map(|p| {
                Ok(EventParam {
                    ty: p.ty.parse()?,
                    name: p.name,
                    indexed: p.indexed,
                })
            })
            .collect::<Result<Vec<_>, AbiError>>()?;
        EventAbi::new(j.name, inputs, j.anonymous)
    }
}

impl From<EventAbi> for JsonEvent {
    fn from(e: EventAbi) -> Self {
        JsonEvent {
            kind: "event".into(),
            name: e.name,
            inputs: e
                .inputs
                .into_iter()
                .map(|p| JsonParam {
                    name: p.name,
                    ty: p.ty.to_string(),
                    indexed: p.indexed,
                })
                .collect(),
            anonymous: e.anonymous,
        }
    }
}

impl EventAbi {
    pub fn new(name: impl Into<String>, inputs: Vec<EventParam>, anonymous: bool) -> Result<Self, AbiError> {
        let name = name.into();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(AbiError::InvalidAbi(format!("invalid event name {name:?}")));
        }
        let mut seen = HashSet::new();
        for p in &inputs {
            if p.name.is_empty() {
                return Err(AbiError::InvalidAbi(format!("{name}: unnamed parameter")));
            }
            if !seen.insert(p.name.as_str()) {
                return Err(AbiError::InvalidAbi(format!("{name}: duplicate parameter {:?}", p.name)));
            }
        }
        let indexed = inputs.iter().filter(|p| p.indexed).count();
        let max = if anonymous { 4 } else { 3 };
        if indexed > max {
            return Err(AbiError::InvalidAbi(format!(
                "{name}: {indexed} indexed parameters, at most {max} allowed"
            )));
        }
        Ok(Self {
            name,
            inputs,
            anonymous,
        })
    }

    pub fn from_json(s: &str) -> Result<Self, AbiError> {
        serde_json::from_str::<JsonEvent>(s)
            .map_err(|e| AbiError::InvalidAbi(e.to_string()))?
            .try_into()
    }

    pub fn indexed_count(&self) -> usize {
        self.inputs.iter().filter(|p| p.indexed).count()
    }

    pub fn param(&self, name: &str) -> Option<&EventParam> {
        self.inputs.iter().find(|p| p.name == name)
    }
}

/// `Name(type1,type2,...)` with fully elaborated types and no spaces.
pub fn canonical_signature(abi: &EventAbi) -> String {
    let types: Vec<String> = abi.inputs.iter().map(|p| p.ty.to_string()).collect();
    format!("{}({})", abi.name, types.join(","))
}

pub fn event_topic0(abi: &EventAbi) -> Result<H256, AbiError> {
    if abi.anonymous {
        return Err(AbiError::Anonymous(abi.name.clone()));
    }
    Ok(keccak256(canonical_signature(abi).as_bytes()))
}
