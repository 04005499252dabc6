use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate};
use rust_decimal::Decimal;
use serde::Deserialize;

use super::ConfigError;

const HEADER: [&str; 3] = ["token", "date", "usd_price"];

/// Average daily USD prices keyed by (token symbol, UTC date).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PriceTable {
    entries: BTreeMap<(String, NaiveDate), Decimal>,
}

#[derive(Deserialize)]
struct Row {
    token: String,
    date: String,
    usd_price: String,
}

pub fn load_price_table(path: &Path) -> Result<PriceTable, ConfigError> {
    let text = super::read(path)?;
    PriceTable::from_csv_str(&text, &path.display().to_string())
}

impl PriceTable {
    pub fn from_csv_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let parse_err = |line: u64, reason: String| ConfigError::Parse {
            path: format!("{origin}:{line}"),
            reason,
        };
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?;
        if header.iter().collect::<Vec<_>>() != HEADER {
            return Err(parse_err(1, format!("expected header {}", HEADER.join(","))));
        }
        let mut table = PriceTable::default();
        for rec in rdr.deserialize::<Row>() {
            let row = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(line, e.to_string())
            })?;
            let date = NaiveDate::parse_from_str(&row.date, "%Y-%m-%d")
                .map_err(|e| parse_err(0, format!("date {:?}: {e}", row.date)))?;
            let price = Decimal::from_str(&row.usd_price)
                .map_err(|e| parse_err(0, format!("price {:?}: {e}", row.usd_price)))?;
            table.insert(&row.token, date, price)?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, token: &str, date: NaiveDate, price: Decimal) -> Result<(), ConfigError> {
        if price <= Decimal::ZERO {
            return Err(ConfigError::NonPositivePrice {
                token: token.to_string(),
                date: date.to_string(),
                price: price.to_string(),
            });
        }
        let key = (token.to_string(), date);
        if self.entries.contains_key(&key) {
            return Err(ConfigError::DuplicateKey {
                token: token.to_string(),
                date: date.to_string(),
            });
        }
        self.entries.insert(key, price);
        Ok(())
    }

    pub fn lookup(&self, token: &str, date: NaiveDate) -> Result<Decimal, ConfigError> {
        self.entries
            .get(&(token.to_string(), date))
            .copied()
            .ok_or_else(|| ConfigError::PriceMissing {
                token: token.to_string(),
                date: date.to_string(),
            })
    }

    /// Price on the UTC day containing `ts`.
    pub fn at_timestamp(&self, token: &str, ts: i64) -> Result<Decimal, ConfigError> {
        self.lookup(token, utc_date(ts))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub(crate) fn utc_date(ts: i64) -> NaiveDate {
    DateTime::from_timestamp(ts, 0)
        .map(|d| d.date_naive())
        .unwrap_or(NaiveDate::MIN)
}
