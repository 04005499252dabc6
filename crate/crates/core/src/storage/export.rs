use std::collections::BTreeSet;
use std::io::Write;

use super::EventRecord;
use crate::generate::CrossChainTx;

const EVENT_COLUMNS: &[&str] = &[
    "chain_id",
    "block_number",
    "log_index",
    "tx_hash",
    "block_timestamp",
    "contract",
    "bridge",
    "event_name",
    "gas_used",
    "effective_gas_price",
    "status",
    "run_id",
];

/// Writes event rows as CSV: fixed metadata columns, then one column per
/// decoded parameter in name order.
pub fn write_events_csv<W: Write>(records: &[EventRecord], out: W) -> Result<(), csv::Error> {
    let params: BTreeSet<&str> = records
        .iter()
        .flat_map(|r| r.event.fields.keys().map(String::as_str))
        .collect();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVENT_COLUMNS.iter().copied().chain(params.iter().copied()))?;
    for r in records {
        let e = &r.event;
        let mut row = vec![
            e.chain_id.to_string(),
            e.block_number.to_string(),
            e.log_index.to_string(),
            e.tx_hash.to_string(),
            e.block_timestamp.to_string(),
            e.contract.to_string(),
            e.bridge.clone(),
            e.event_name.clone(),
            r.gas_used.to_string(),
            r.effective_gas_price.to_string(),
            match r.status {
                crate::rpc::ReceiptStatus::Success => "success".into(),
                crate::rpc::ReceiptStatus::Failure => "failure".into(),
            },
            r.run_id.clone(),
        ];
        row.extend(params.iter().map(|p| e.fields.get(*p).map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes cctxs as CSV with one column per field, in declaration order.
pub fn write_cctxs_csv<W: Write>(records: &[CrossChainTx], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for c in records {
        w.serialize(c)?;
    }
    w.flush()?;
    Ok(())
}
