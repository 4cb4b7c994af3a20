//! Quote CSV ingestion.
//!
//! Expected layout: header `Date,Open,High,Low,Close,Adj Close,Volume`,
//! ISO dates, plain decimal numbers. Rows carrying a `null` field are
//! dropped and counted; out-of-order files are re-sorted with a warning
//! flag rather than rejected.

use crate::error::{Error, Result};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

const EXPECTED_HEADER: &str = "Date,Open,High,Low,Close,Adj Close,Volume";

/// Calendar date, ordered chronologically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Date {
    pub year: u16,
    pub month: u8,
    pub day: u8,
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

impl FromStr for Date {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('-').collect();
        let bad = || Error::QuoteData(format!("bad date '{s}', expected YYYY-MM-DD"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let year: u16 = parts[0].parse().map_err(|_| bad())?;
        let month: u8 = parts[1].parse().map_err(|_| bad())?;
        let day: u8 = parts[2].parse().map_err(|_| bad())?;
        if !(1..=12).contains(&month) || !(1..=31).contains(&day) {
            return Err(bad());
        }
        Ok(Date { year, month, day })
    }
}

impl Serialize for Date {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Date {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// One daily quote row.
#[derive(Debug, Clone, PartialEq)]
pub struct QuoteRecord {
    pub date: Date,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub adj_close: f64,
    pub volume: u64,
}

/// Which price column feeds the forecasting series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriceColumn {
    #[default]
    Close,
    AdjClose,
}

impl PriceColumn {
    pub fn name(&self) -> &'static str {
        match self {
            PriceColumn::Close => "close",
            PriceColumn::AdjClose => "adj_close",
        }
    }

    pub fn extract(&self, record: &QuoteRecord) -> f64 {
        match self {
            PriceColumn::Close => record.close,
            PriceColumn::AdjClose => record.adj_close,
        }
    }
}

impl FromStr for PriceColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "close" => Ok(PriceColumn::Close),
            "adj_close" => Ok(PriceColumn::AdjClose),
            other => Err(Error::InvalidInput(format!(
                "unknown price column '{other}' (expected close or adj_close)"
            ))),
        }
    }
}

/// Parsed records plus ingestion diagnostics.
#[derive(Debug, Clone)]
pub struct IngestOutcome {
    pub records: Vec<QuoteRecord>,
    pub dropped_rows: usize,
    pub resorted: bool,
}

/// Parse a quote CSV from any reader.
pub fn ingest_quotes<R: BufRead>(reader: R) -> Result<IngestOutcome> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(Error::QuoteData("empty file".into())),
    };
    if header.trim_end_matches('\r').trim() != EXPECTED_HEADER {
        return Err(Error::QuoteData(format!(
            "malformed header '{}', expected '{EXPECTED_HEADER}'",
            header.trim()
        )));
    }

    let mut records = Vec::new();
    let mut dropped = 0usize;
    for (offset, line) in lines.enumerate() {
        let line_no = offset + 2; // 1-based, after the header
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 7 {
            return Err(Error::QuoteData(format!(
                "line {line_no}: expected 7 fields, found {}",
                fields.len()
            )));
        }
        if fields.iter().any(|f| f.eq_ignore_ascii_case("null") || f.is_empty()) {
            dropped += 1;
            continue;
        }
        let date: Date = fields[0]
            .parse()
            .map_err(|e| Error::QuoteData(format!("line {line_no}: {e}")))?;
        let number = |idx: usize, name: &str| -> Result<f64> {
            fields[idx].parse::<f64>().map_err(|_| {
                Error::QuoteData(format!(
                    "line {line_no}: unparseable {name} '{}'",
                    fields[idx]
                ))
            })
        };
        let close = number(4, "close")?;
        if !(close.is_finite() && close > 0.0) {
            return Err(Error::QuoteData(format!(
                "line {line_no}: close must be finite and positive, got {close}"
            )));
        }
        let volume: u64 = fields[6].parse().map_err(|_| {
            Error::QuoteData(format!("line {line_no}: unparseable volume '{}'", fields[6]))
        })?;
        records.push(QuoteRecord {
            date,
            open: number(1, "open")?,
            high: number(2, "high")?,
            low: number(3, "low")?,
            close,
            adj_close: number(5, "adj close")?,
            volume,
        });
    }
    if records.is_empty() {
        return Err(Error::QuoteData("no usable rows in file".into()));
    }

    let sorted = records.windows(2).all(|w| w[0].date < w[1].date);
    if !sorted {
        records.sort_by_key(|r| r.date);
        if let Some(w) = records.windows(2).find(|w| w[0].date == w[1].date) {
            return Err(Error::QuoteData(format!("duplicate date {}", w[0].date)));
        }
    }
    Ok(IngestOutcome {
        records,
        dropped_rows: dropped,
        resorted: !sorted,
    })
}

/// Parse a quote CSV from disk.
pub fn ingest_csv(path: &Path) -> Result<IngestOutcome> {
    let file = std::fs::File::open(path).map_err(|e| {
        Error::QuoteData(format!("cannot open {}: {e}", path.display()))
    })?;
    ingest_quotes(std::io::BufReader::new(file))
}
