use std::collections::BTreeMap;
use std::sync::RwLock;

use super::{
    check_cctx_batch, check_relation_name, sort_events, CctxFilter, EventFilter, EventKey, EventRecord, Repository,
    StorageError,
};
use crate::generate::CrossChainTx;

#[derive(Default)]
struct State {
    relations: BTreeMap<String, BTreeMap<EventKey, EventRecord>>,
    cctxs: BTreeMap<(String, String), CrossChainTx>,
}

/// Process-local repository. Used by tests and one-shot CLI runs.
#[derive(Default)]
pub struct MemoryRepository {
    state: RwLock<State>,
}

impl MemoryRepository {
    pub fn new() -> Self {
        Self::default()
    }

    fn read(&self) -> Result<std::sync::RwLockReadGuard<'_, State>, StorageError> {
        self.state
            .read()
            .map_err(|_| StorageError::BackendUnavailable("memory store poisoned".into()))
    }

    fn write(&self) -> Result<std::sync::RwLockWriteGuard<'_, State>, StorageError> {
        self.state
            .write()
            .map_err(|_| StorageError::BackendUnavailable("memory store poisoned".into()))
    }
}

impl Repository for MemoryRepository {
    fn ensure_relation(&self, relation: &str) -> Result<(), StorageError> {
        check_relation_name(relation)?;
        self.write()?.relations.entry(relation.to_string()).or_default();
        Ok(())
    }

    fn relations(&self) -> Result<Vec<String>, StorageError> {
        Ok(self.read()?.relations.keys().cloned().collect())
    }

    fn put_events(&self, relation: &str, records: &[EventRecord]) -> Result<usize, StorageError> {
        check_relation_name(relation)?;
        let mut st = self.write()?;
        let rel = st.relations.entry(relation.to_string()).or_default();
        let mut n = 0;
        for r in records {
            if let std::collections::btree_map::Entry::Vacant(v) = rel.entry(r.key()) {
                v.insert(r.clone());
                n += 1;
            }
        }
        Ok(n)
    }

    fn query_events(&self, relation: &str, filter: &EventFilter) -> Result<Vec<EventRecord>, StorageError> {
        let st = self.read()?;
        let rel = st
            .relations
            .get(relation)
            .ok_or_else(|| StorageError::UnknownRelation(relation.to_string()))?;
        let mut rows: Vec<EventRecord> = rel.values().filter(|r| filter.matches(r)).cloned().collect();
        sort_events(&mut rows);
        Ok(rows)
    }

    fn put_cctxs(&self, records: &[CrossChainTx]) -> Result<usize, StorageError> {
        let mut st = self.write()?;
        check_cctx_batch(records, |b, id| st.cctxs.contains_key(&(b.to_string(), id.to_string())))?;
        for c in records {
            st.cctxs.insert((c.bridge.clone(), c.cctx_id.clone()), c.clone());
        }
        Ok(records.len())
    }

    fn query_cctxs(&self, filter: &CctxFilter) -> Result<Vec<CrossChainTx>, StorageError> {
        Ok(self.read()?.cctxs.values().filter(|c| filter.matches(c)).cloned().collect())
    }

    fn delete_cctxs(&self, bridge: &str) -> Result<usize, StorageError> {
        let mut st = self.write()?;
        let before = st.cctxs.len();
        st.cctxs.retain(|(b, _), _| b != bridge);
        Ok(before - st.cctxs.len())
    }
}
