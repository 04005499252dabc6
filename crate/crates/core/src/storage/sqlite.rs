use std::path::Path;
use std::sync::{Mutex, MutexGuard};

use rusqlite::{params, Connection, OptionalExtension};

use super::{
    check_cctx_batch, check_relation_name, CctxFilter, EventFilter, EventRecord, Repository, StorageError,
};
use crate::abi::DecodedEvent;
use crate::generate::CrossChainTx;
use crate::rpc::ReceiptStatus;

/// Single-file embedded store. Each event relation is its own table
/// (`ev_<relation>`); cctxs share one table keyed by `(bridge, cctx_id)`.
pub struct SqliteRepository {
    conn: Mutex<Connection>,
}

fn unavailable(e: rusqlite::Error) -> StorageError {
    StorageError::BackendUnavailable(e.to_string())
}

fn int(v: u64) -> Result<i64, StorageError> {
    i64::try_from(v).map_err(|_| StorageError::BackendUnavailable(format!("{v} exceeds the integer column range")))
}

fn status_str(s: ReceiptStatus) -> &'static str {
    match s {
        ReceiptStatus::Success => "success",
        ReceiptStatus::Failure => "failure",
    }
}

fn corrupt(what: &str, e: impl std::fmt::Display) -> StorageError {
    StorageError::Corrupt(format!("{what}: {e}"))
}

impl SqliteRepository {
    pub fn open(path: &Path) -> Result<Self, StorageError> {
        Self::init(Connection::open(path).map_err(unavailable)?)
    }

    pub fn open_in_memory() -> Result<Self, StorageError> {
        Self::init(Connection::open_in_memory().map_err(unavailable)?)
    }

    fn init(conn: Connection) -> Result<Self, StorageError> {
        conn.execute_batch(
            "PRAGMA journal_mode=WAL;
             CREATE TABLE IF NOT EXISTS relations (name TEXT PRIMARY KEY);
             CREATE TABLE IF NOT EXISTS cctxs (
                 bridge TEXT NOT NULL,
                 cctx_id TEXT NOT NULL,
                 src_chain INTEGER NOT NULL,
                 dst_chain INTEGER NOT NULL,
                 record TEXT NOT NULL,
                 PRIMARY KEY (bridge, cctx_id)
             );",
        )
        .map_err(unavailable)?;
        Ok(Self { conn: Mutex::new(conn) })
    }

    fn lock(&self) -> Result<MutexGuard<'_, Connection>, StorageError> {
        self.conn
            .lock()
            .map_err(|_| StorageError::BackendUnavailable("sqlite connection poisoned".into()))
    }

    fn create(conn: &Connection, relation: &str) -> Result<(), StorageError> {
        check_relation_name(relation)?;
        conn.execute_batch(&format!(
            "CREATE TABLE IF NOT EXISTS ev_{relation} (
                 chain_id INTEGER NOT NULL,
                 tx_hash TEXT NOT NULL,
                 log_index INTEGER NOT NULL,
                 block_number INTEGER NOT NULL,
                 block_timestamp INTEGER NOT NULL,
                 contract TEXT NOT NULL,
                 bridge TEXT NOT NULL,
                 event_name TEXT NOT NULL,
                 fields TEXT NOT NULL,
                 run_id TEXT NOT NULL,
                 gas_used INTEGER NOT NULL,
                 effective_gas_price TEXT NOT NULL,
                 status TEXT NOT NULL,
                 PRIMARY KEY (chain_id, tx_hash, log_index)
             );
             INSERT OR IGNORE INTO relations (name) VALUES ('{relation}');"
        ))
        .map_err(unavailable)
    }

    fn exists(conn: &Connection, relation: &str) -> Result<bool, StorageError> {
        conn.query_row("SELECT 1 FROM relations WHERE name = ?1", [relation], |_| Ok(()))
            .optional()
            .map(|r| r.is_some())
            .map_err(unavailable)
    }
}

type Row = (i64, String, i64, i64, i64, String, String, String, String, String, i64, String, String);

fn row_to_record(r: Row) -> Result<EventRecord, StorageError> {
    let (chain_id, tx, log_index, block, ts, contract, bridge, event_name, fields, run_id, gas_used, price, status) = r;
    Ok(EventRecord {
        event: DecodedEvent {
            bridge,
            event_name,
            chain_id: chain_id as u64,
            contract: contract.parse().map_err(|e| corrupt("contract", e))?,
            fields: serde_json::from_str(&fields).map_err(|e| corrupt("fields", e))?,
            tx_hash: tx.parse().map_err(|e| corrupt("tx_hash", e))?,
            log_index: log_index as u64,
            block_number: block as u64,
            block_timestamp: ts as u64,
        },
        run_id,
        gas_used: gas_used as u64,
        effective_gas_price: price.parse().map_err(|e| corrupt("effective_gas_price", e))?,
        status: match status.as_str() {
            "success" => ReceiptStatus::Success,
            "failure" => ReceiptStatus::Failure,
            other => return Err(corrupt("status", other)),
        },
    })
}

impl Repository for SqliteRepository {
    fn ensure_relation(&self, relation: &str) -> Result<(), StorageError> {
        let conn = self.lock()?;
        Self::create(&conn, relation)
    }

    fn relations(&self) -> Result<Vec<String>, StorageError> {
        let conn = self.lock()?;
        let mut stmt = conn.prepare("SELECT name FROM relations ORDER BY name").map_err(unavailable)?;
        let names = stmt
            .query_map([], |r| r.get::<_, String>(0))
            .map_err(unavailable)?
            .collect::<Result<Vec<_>, _>>()
            .map_err(unavailable)?;
        Ok(names)
    }

    fn put_events(&self, relation: &str, records: &[EventRecord]) -> Result<usize, StorageError> {
        let mut conn = self.lock()?;
        Self::create(&conn, relation)?;
        let tx = conn.transaction().map_err(unavailable)?;
        let mut n = 0;
        {
            let mut stmt = tx
                .prepare(&format!(
                    "INSERT OR IGNORE INTO ev_{relation} VALUES (?1,?2,?3,?4,?5,?6,?7,?8,?9,?10,?11,?12,?13)"
                ))
                .map_err(unavailable)?;
            for r in records {
                let e = &r.event;
                let fields = serde_json::to_string(&e.fields).map_err(|e| corrupt("fields", e))?;
                n += stmt
                    .execute(params![
                        int(e.chain_id)?,
                        e.tx_hash.to_string(),
                        int(e.log_index)?,
                        int(e.block_number)?,
                        int(e.block_timestamp)?,
                        e.contract.to_string(),
                        e.bridge,
                        e.event_name,
                        fields,
                        r.run_id,
                        int(r.gas_used)?,
                        r.effective_gas_price.to_string(),
                        status_str(r.status),
                    ])
                    .map_err(unavailable)?;
            }
        }
        tx.commit().map_err(unavailable)?;
        Ok(n)
    }

    fn query_events(&self, relation: &str, filter: &EventFilter) -> Result<Vec<EventRecord>, StorageError> {
        check_relation_name(relation)?;
        let conn = self.lock()?;
        if !Self::exists(&conn, relation)? {
            return Err(StorageError::UnknownRelation(relation.to_string()));
        }
        let mut sql = format!("SELECT * FROM ev_{relation} WHERE 1=1");
        let mut args: Vec<rusqlite::types::Value> = Vec::new();
        if let Some(c) = filter.chain_id {
            args.push(int(c)?.into());
            sql += &format!(" AND chain_id = ?{}", args.len());
        }
        if let Some(b) = filter.from_block {
            args.push(int(b)?.into());
            sql += &format!(" AND block_number >= ?{}", args.len());
        }
        if let Some(b) = filter.to_block {
            args.push(int(b.min(i64::MAX as u64))?.into());
            sql += &format!(" AND block_number <= ?{}", args.len());
        }
        if let Some(a) = filter.contract {
            args.push(a.to_string().into());
            sql += &format!(" AND contract = ?{}", args.len());
        }
        sql += " ORDER BY chain_id, block_number, log_index, tx_hash";
        let mut stmt = conn.prepare(&sql).map_err(unavailable)?;
        let rows = stmt
            .query_map(rusqlite::params_from_iter(args), |r| {
                Ok((
                    r.get(0)?,
                    r.get(1)?,
                    r.get(2)?,
                    r.get(3)?,
                    r.get(4)?,
                    r.get(5)?,
                    r.get(6)?,
                    r.get(7)?,
                    r.get(8)?,
                    r.get(9)?,
                    r.get(10)?,
                    r.get(11)?,
                    r.get(12)?,
                ))
            })
            .map_err(unavailable)?;
        let mut out = Vec::new();
        for row in rows {
            let rec = row_to_record(row.map_err(unavailable)?)?;
            if filter.matches(&rec) {
                out.push(rec);
            }
        }
        Ok(out)
    }

    fn put_cctxs(&self, records: &[CrossChainTx]) -> Result<usize, StorageError> {
        let mut conn = self.lock()?;
        let tx = conn.transaction().map_err(unavailable)?;
        {
            let mut probe = tx
                .prepare("SELECT 1 FROM cctxs WHERE bridge = ?1 AND cctx_id = ?2")
                .map_err(unavailable)?;
            let mut err = None;
            check_cctx_batch(records, |b, id| match probe.exists([b, id]) {
                Ok(x) => x,
                Err(e) => {
                    err = Some(e);
                    false
                }
            })?;
            if let Some(e) = err {
                return Err(unavailable(e));
            }
            let mut stmt = tx
                .prepare("INSERT INTO cctxs (bridge, cctx_id, src_chain, dst_chain, record) VALUES (?1,?2,?3,?4,?5)")
                .map_err(unavailable)?;
            for c in records {
                let json = serde_json::to_string(c).map_err(|e| corrupt("cctx", e))?;
                stmt.execute(params![c.bridge, c.cctx_id, int(c.src_chain)?, int(c.dst_chain)?, json])
                    .map_err(unavailable)?;
            }
        }
        tx.commit().map_err(unavailable)?;
        Ok(records.len())
    }

    fn query_cctxs(&self, filter: &CctxFilter) -> Result<Vec<CrossChainTx>, StorageError> {
        let conn = self.lock()?;
        let mut stmt = conn
            .prepare(
                "SELECT record FROM cctxs
                 WHERE (?1 IS NULL OR bridge = ?1) AND (?2 IS NULL OR src_chain = ?2) AND (?3 IS NULL OR dst_chain = ?3)
                 ORDER BY bridge, cctx_id",
            )
            .map_err(unavailable)?;
        let src = filter.src_chain.map(int).transpose()?;
        let dst = filter.dst_chain.map(int).transpose()?;
        let rows = stmt
            .query_map(params![filter.bridge, src, dst], |r| r.get::<_, String>(0))
            .map_err(unavailable)?;
        let mut out = Vec::new();
        for row in rows {
            let json = row.map_err(unavailable)?;
            out.push(serde_json::from_str(&json).map_err(|e| corrupt("cctx", e))?);
        }
        Ok(out)
    }

    fn delete_cctxs(&self, bridge: &str) -> Result<usize, StorageError> {
        self.lock()?
            .execute("DELETE FROM cctxs WHERE bridge = ?1", [bridge])
            .map_err(unavailable)
    }
}
