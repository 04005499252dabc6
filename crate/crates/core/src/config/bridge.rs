use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ChainRegistry, ConfigError};
use crate::abi::{canonical_signature, event_topic0, EventAbi, SolType};
use crate::types::{Address, ChainId, H256};

pub const DEFAULT_MATCH_SLACK_SECS: u64 = 24 * 3600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AdapterKind {
    MessageFinality,
    CommitteeFlatFee,
    PoolTaxi,
    PoolBus,
    IntentFill,
}

/// Which leg of a transfer an event belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Src,
    Dst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventRole {
    Deposit,
    Withdrawal,
    Dispatch,
    Transfer,
    Fill,
}

macro_rules! field_roles {
    ($($v:ident => $s:literal),* $(,)?) => {
        /// Semantic meaning of an event parameter, as used by the matchers.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum FieldRole { $($v),* }

        impl FieldRole {
            pub const ALL: &'static [FieldRole] = &[$(FieldRole::$v),*];

            pub fn as_str(self) -> &'static str {
                match self { $(FieldRole::$v => $s),* }
            }
        }

        impl FromStr for FieldRole {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($s => Ok(FieldRole::$v),)*
                    _ => Err(format!("unknown field role {s:?}")),
                }
            }
        }
    };
}

field_roles! {
    Id => "id",
    Sender => "sender",
    Recipient => "recipient",
    Token => "token",
    Amount => "amount",
    SrcChain => "src_chain",
    DstChain => "dst_chain",
    Ticket => "ticket",
    BatchId => "batch_id",
    StartTicket => "start_ticket",
    Seats => "seats",
    Solver => "solver",
    OutputToken => "output_token",
    OutputAmount => "output_amount",
}

impl fmt::Display for FieldRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What an adapter expects from events carrying a given role.
#[derive(Debug, Clone, Copy)]
pub struct RoleSpec {
    pub role: EventRole,
    pub side: Side,
    pub required: &'static [FieldRole],
    pub optional: &'static [FieldRole],
}

use FieldRole as F;

const MESSAGE_ROLES: &[RoleSpec] = &[
    RoleSpec {
        role: EventRole::Deposit,
        side: Side::Src,
        required: &[F::Id, F::Sender, F::Recipient, F::Token, F::Amount],
        optional: &[F::DstChain],
    },
    RoleSpec {
        role: EventRole::Withdrawal,
        side: Side::Dst,
        required: &[F::Id, F::Recipient, F::Token, F::Amount],
        optional: &[F::SrcChain],
    },
];

const BUS_ROLES: &[RoleSpec] = &[
    RoleSpec {
        role: EventRole::Deposit,
        side: Side::Src,
        required: &[F::Ticket, F::Sender, F::Recipient, F::Token, F::Amount],
        optional: &[F::DstChain],
    },
    RoleSpec {
        role: EventRole::Dispatch,
        side: Side::Src,
        required: &[F::BatchId, F::StartTicket, F::Seats],
        optional: &[F::DstChain],
    },
    RoleSpec {
        role: EventRole::Transfer,
        side: Side::Dst,
        required: &[F::BatchId, F::Recipient, F::Token, F::Amount],
        optional: &[F::SrcChain],
    },
];

const INTENT_ROLES: &[RoleSpec] = &[
    RoleSpec {
        role: EventRole::Deposit,
        side: Side::Src,
        required: &[F::Id, F::Sender, F::Recipient, F::Token, F::Amount, F::DstChain],
        optional: &[F::OutputToken, F::OutputAmount],
    },
    RoleSpec {
        role: EventRole::Fill,
        side: Side::Dst,
        required: &[F::Id, F::SrcChain, F::Recipient, F::Token, F::Amount, F::Solver],
        optional: &[],
    },
];

impl AdapterKind {
    pub const ALL: &'static [AdapterKind] = &[
        AdapterKind::MessageFinality,
        AdapterKind::CommitteeFlatFee,
        AdapterKind::PoolTaxi,
        AdapterKind::PoolBus,
        AdapterKind::IntentFill,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AdapterKind::MessageFinality => "message_finality",
            AdapterKind::CommitteeFlatFee => "committee_flat_fee",
            AdapterKind::PoolTaxi => "pool_taxi",
            AdapterKind::PoolBus => "pool_bus",
            AdapterKind::IntentFill => "intent_fill",
        }
    }

    pub fn roles(self) -> &'static [RoleSpec] {
        match self {
            AdapterKind::MessageFinality | AdapterKind::CommitteeFlatFee | AdapterKind::PoolTaxi => MESSAGE_ROLES,
            AdapterKind::PoolBus => BUS_ROLES,
            AdapterKind::IntentFill => INTENT_ROLES,
        }
    }

    pub fn role_spec(self, role: EventRole) -> Option<&'static RoleSpec> {
        self.roles().iter().find(|r| r.role == role)
    }

    /// Only intent fills may land before the deposit that requested them.
    pub fn allows_negative_latency(self) -> bool {
        self == AdapterKind::IntentFill
    }
}

impl FromStr for AdapterKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        AdapterKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown adapter {s:?}"))
    }
}

impl fmt::Display for AdapterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for EventRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EventRole::Deposit => "deposit",
            EventRole::Withdrawal => "withdrawal",
            EventRole::Dispatch => "dispatch",
            EventRole::Transfer => "transfer",
            EventRole::Fill => "fill",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenInfo {
    pub chain_id: ChainId,
    pub address: Address,
    pub symbol: String,
    pub decimals: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventConfig {
    pub role: EventRole,
    #[serde(with = "abi_fragment")]
    pub abi: EventAbi,
    /// field role name -> ABI parameter name
    pub fields: BTreeMap<String, String>,
    #[serde(skip)]
    pub topic0: H256,
}

impl EventConfig {
    pub fn param_for(&self, role: FieldRole) -> Option<&str> {
        self.fields.get(role.as_str()).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractConfig {
    pub chain_id: ChainId,
    pub address: Address,
    pub events: Vec<EventConfig>,
}

/// Contract and event catalogue of one bridge plus its matching adapter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeConfig {
    pub name: String,
    pub adapter: String,
    #[serde(default = "default_slack")]
    pub match_slack_secs: u64,
    #[serde(default)]
    pub tokens: Vec<TokenInfo>,
    pub contracts: Vec<ContractConfig>,
}

fn default_slack() -> u64 {
    DEFAULT_MATCH_SLACK_SECS
}

mod abi_fragment {
    use super::EventAbi;
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Json(String),
        Inline(EventAbi),
    }

    pub fn serialize<S: Serializer>(abi: &EventAbi, s: S) -> Result<S::Ok, S::Error> {
        let json = serde_json::to_string(abi).map_err(serde::ser::Error::custom)?;
        s.serialize_str(&json)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<EventAbi, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Json(s) => EventAbi::from_json(&s).map_err(serde::de::Error::custom),
            Repr::Inline(abi) => Ok(abi),
        }
    }
}

pub fn load_bridge_config(path: &Path, registry: &ChainRegistry) -> Result<BridgeConfig, ConfigError> {
    BridgeConfig::from_toml_str(&super::read(path)?, &path.display().to_string(), registry)
}

impl BridgeConfig {
    pub fn from_toml_str(s: &str, origin: &str, registry: &ChainRegistry) -> Result<Self, ConfigError> {
        let mut cfg: BridgeConfig = toml::from_str(s).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            reason: e.message().to_string(),
        })?;
        cfg.validate(origin, registry)?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("bridge config is always representable as TOML")
    }

    pub fn adapter_kind(&self) -> Result<AdapterKind, String> {
        self.adapter.parse()
    }

    /// Storage relation holding decoded `event_name` events of this bridge.
    pub fn relation_name(&self, event_name: &str) -> String {
        format!("{}_{}", self.name, event_name)
    }

    pub fn chain_ids(&self) -> BTreeSet<ChainId> {
        self.contracts.iter().map(|c| c.chain_id).collect()
    }

    pub fn events(&self) -> impl Iterator<Item = (&ContractConfig, &EventConfig)> {
        self.contracts.iter().flat_map(|c| c.events.iter().map(move |e| (c, e)))
    }

    pub fn events_with_role(&self, role: EventRole) -> impl Iterator<Item = (&ContractConfig, &EventConfig)> {
        self.events().filter(move |(_, e)| e.role == role)
    }

    /// Distinct event names carrying `role`, sorted.
    pub fn event_names(&self, role: EventRole) -> Vec<String> {
        let set: BTreeSet<String> = self.events_with_role(role).map(|(_, e)| e.abi.name.clone()).collect();
        set.into_iter().collect()
    }

    pub fn all_event_names(&self) -> Vec<String> {
        let set: BTreeSet<String> = self.events().map(|(_, e)| e.abi.name.clone()).collect();
        set.into_iter().collect()
    }

    pub fn token(&self, chain_id: ChainId, address: &Address) -> Option<&TokenInfo> {
        self.tokens
            .iter()
            .find(|t| t.chain_id == chain_id && t.address == *address)
    }

    /// Checks every invariant and fills in the topic0 of each event.
    pub fn validate(&mut self, origin: &str, registry: &ChainRegistry) -> Result<(), ConfigError> {
        let invalid = |field: String, reason: String| ConfigError::Validation {
            path: origin.to_string(),
            field,
            reason,
        };
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(invalid("name".into(), format!("{:?} must be a non-empty [A-Za-z0-9_] identifier", self.name)));
        }
        let kind = self.adapter_kind().map_err(|e| invalid("adapter".into(), e))?;
        if self.contracts.is_empty() {
            return Err(invalid("contracts".into(), "at least one contract is required".into()));
        }

        let mut token_keys = HashSet::new();
        for (i, t) in self.tokens.iter().enumerate() {
            if registry.by_id(t.chain_id).is_none() {
                return Err(invalid(format!("tokens[{i}].chain_id"), format!("chain {} is not in the registry", t.chain_id)));
            }
            if !token_keys.insert((t.chain_id, t.address)) {
                return Err(invalid(format!("tokens[{i}].address"), format!("duplicate token {} on chain {}", t.address, t.chain_id)));
            }
            if t.symbol.is_empty() {
                return Err(invalid(format!("tokens[{i}].symbol"), "must not be empty".into()));
            }
            if t.decimals > 28 {
                return Err(invalid(format!("tokens[{i}].decimals"), "at most 28 decimals are supported".into()));
            }
        }

        let mut contract_keys = HashSet::new();
        let mut event_keys = HashSet::new();
        // event name -> (signature, role), so each name maps to one relation shape and one role
        let mut names: HashMap<String, (String, EventRole)> = HashMap::new();
        let mut seen_roles = HashSet::new();

        for (ci, c) in self.contracts.iter_mut().enumerate() {
            if registry.by_id(c.chain_id).is_none() {
                return Err(invalid(format!("contracts[{ci}].chain_id"), format!("chain {} is not in the registry", c.chain_id)));
            }
            if !contract_keys.insert((c.chain_id, c.address)) {
                return Err(invalid(format!("contracts[{ci}].address"), format!("contract {} listed twice on chain {}", c.address, c.chain_id)));
            }
            if c.events.is_empty() {
                return Err(invalid(format!("contracts[{ci}].events"), "at least one event is required".into()));
            }
            for (ei, e) in c.events.iter_mut().enumerate() {
                let at = |f: &str| format!("contracts[{ci}].events[{ei}]{f}");
                let topic0 = event_topic0(&e.abi).map_err(|err| invalid(at(".abi"), err.to_string()))?;
                if !event_keys.insert((c.chain_id, c.address, topic0)) {
                    return Err(invalid(at(".abi"), format!("event {} declared twice for contract {}", e.abi.name, c.address)));
                }
                e.topic0 = topic0;
                let spec = kind.role_spec(e.role).ok_or_else(|| {
                    invalid(at(".role"), format!("role {} is not used by adapter {kind}", e.role))
                })?;
                let sig = canonical_signature(&e.abi);
                match names.get(&e.abi.name) {
                    Some((s, r)) if *s != sig || *r != e.role => {
                        return Err(invalid(
                            at(".abi"),
                            format!("event name {} is already bound to {s} with role {r}", e.abi.name),
                        ));
                    }
                    Some(_) => {}
                    None => {
                        names.insert(e.abi.name.clone(), (sig, e.role));
                    }
                }
                seen_roles.insert(e.role);
                validate_fields(e, spec).map_err(|(f, reason)| invalid(at(&format!(".fields.{f}")), reason))?;
            }
        }

        for spec in kind.roles() {
            if !seen_roles.contains(&spec.role) {
                return Err(invalid("contracts".into(), format!("adapter {kind} needs at least one {} event", spec.role)));
            }
        }
        Ok(())
    }
}

fn validate_fields(e: &EventConfig, spec: &RoleSpec) -> Result<(), (String, String)> {
    for key in e.fields.keys() {
        let role: FieldRole = key.parse().map_err(|m| (key.clone(), m))?;
        if !spec.required.contains(&role) && !spec.optional.contains(&role) {
            return Err((key.clone(), format!("not used by role {}", spec.role)));
        }
    }
    for r in spec.required {
        if !e.fields.contains_key(r.as_str()) {
            return Err((r.as_str().into(), format!("required for role {}", spec.role)));
        }
    }
    for (key, param_name) in &e.fields {
        let role: FieldRole = key.parse().expect("checked above");
        let p = e
            .abi
            .param(param_name)
            .ok_or_else(|| (key.clone(), format!("event {} has no parameter {param_name:?}", e.abi.name)))?;
        let ok = match role {
            F::Sender | F::Recipient | F::Token | F::Solver | F::OutputToken => p.ty == SolType::Address,
            F::Amount | F::OutputAmount | F::SrcChain | F::DstChain | F::Ticket | F::StartTicket | F::Seats => {
                matches!(p.ty, SolType::Uint(_))
            }
            // join keys may be anything comparable, including indexed hashes
            F::Id | F::BatchId => {
                matches!(p.ty, SolType::Uint(_) | SolType::FixedBytes(_) | SolType::Address) || (p.indexed && p.ty.is_dynamic())
            }
        };
        if !ok {
            return Err((key.clone(), format!("parameter {param_name} has unsuitable type {}", p.ty)));
        }
    }
    Ok(())
}
