//! CSV readers/writers for every file the tool consumes or emits, plus atomic
//! file replacement and content hashing.
//!
//! | file        | header                                      |
//! |-------------|---------------------------------------------|
//! | quotes      | `timestamp,bid,ask`                         |
//! | OHLC bars   | `timestamp,open,high,low,close`             |
//! | `path.csv`  | `t,s_bid,s_ask,s_trade,side,I`              |
//! | `qi.csv`    | `bin_left,bin_right,mass`                   |
//! | `pdf.csv`   | `delta,empirical_density,model_density`     |
//! | `law.csv`   | `delta,pdf,cdf`                             |

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calibration::{OhlcRow, QuoteRow};
use crate::error::{Error, Result};
use crate::market::PathPoint;
use crate::statistics::{Histogram, LawRow};

pub const PATH_HEADER: [&str; 6] = ["t", "s_bid", "s_ask", "s_trade", "side", "I"];
pub const QUOTE_HEADER: [&str; 3] = ["timestamp", "bid", "ask"];
pub const OHLC_HEADER: [&str; 5] = ["timestamp", "open", "high", "low", "close"];
pub const HISTOGRAM_HEADER: [&str; 3] = ["bin_left", "bin_right", "mass"];
pub const PDF_HEADER: [&str; 3] = ["delta", "empirical_density", "model_density"];
pub const LAW_HEADER: [&str; 3] = ["delta", "pdf", "cdf"];

/// Row of `pdf.csv`: sample histogram against the fitted density at bin centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdfRow {
    pub delta: f64,
    pub empirical_density: f64,
    pub model_density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct HistogramRow {
    bin_left: f64,
    bin_right: f64,
    mass: f64,
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::validation(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn to_csv<T: Serialize>(header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(csv_write_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_write_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::validation(format!("CSV buffer error: {e}")))
}

fn csv_write_err(e: csv::Error) -> Error {
    Error::validation(format!("CSV serialization failed: {e}"))
}

/// Parses CSV text whose header must match `header` exactly.
fn from_csv<T: DeserializeOwned, R: Read>(source: &str, reader: R, header: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let found = r.headers().map_err(|e| parse_err(source, &e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            path: source.to_string(),
            line: 1,
            message: format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    r.deserialize()
        .map(|row| row.map_err(|e| parse_err(source, &e)))
        .collect()
}

fn parse_err(source: &str, e: &csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    let message = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => e.to_string(),
    };
    Error::Parse {
        path: source.to_string(),
        line,
        message,
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn read_csv_file<T: DeserializeOwned>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    let bytes = read_file(path)?;
    from_csv(&path.display().to_string(), bytes.as_slice(), header)
}

pub fn path_csv(points: &[PathPoint]) -> Result<Vec<u8>> {
    to_csv(&PATH_HEADER, points)
}

pub fn parse_path_csv(source: &str, bytes: &[u8]) -> Result<Vec<PathPoint>> {
    from_csv(source, bytes, &PATH_HEADER)
}

pub fn read_path_csv(path: &Path) -> Result<Vec<PathPoint>> {
    read_csv_file(path, &PATH_HEADER)
}

pub fn histogram_csv(h: &Histogram) -> Result<Vec<u8>> {
    to_csv(
        &HISTOGRAM_HEADER,
        h.masses.iter().enumerate().map(|(k, &mass)| HistogramRow {
            bin_left: h.edges[k],
            bin_right: h.edges[k + 1],
            mass,
        }),
    )
}

/// Reads a histogram back. `count` is not stored in the CSV and is returned as 0.
pub fn parse_histogram_csv(source: &str, bytes: &[u8]) -> Result<Histogram> {
    let rows: Vec<HistogramRow> = from_csv(source, bytes, &HISTOGRAM_HEADER)?;
    if rows.is_empty() {
        return Err(Error::validation(format!("{source}: histogram has no bins")));
    }
    let mut edges: Vec<f64> = rows.iter().map(|r| r.bin_left).collect();
    edges.push(rows.last().expect("non-empty").bin_right);
    let h = Histogram {
        edges,
        masses: rows.iter().map(|r| r.mass).collect(),
        count: 0,
    };
    h.validate()?;
    Ok(h)
}

pub fn read_histogram_csv(path: &Path) -> Result<Histogram> {
    parse_histogram_csv(&path.display().to_string(), &read_file(path)?)
}

pub fn pdf_csv(rows: &[PdfRow]) -> Result<Vec<u8>> {
    to_csv(&PDF_HEADER, rows)
}

pub fn parse_pdf_csv(source: &str, bytes: &[u8]) -> Result<Vec<PdfRow>> {
    from_csv(source, bytes, &PDF_HEADER)
}

pub fn law_csv(rows: &[LawRow]) -> Result<Vec<u8>> {
    to_csv(&LAW_HEADER, rows)
}

pub fn parse_law_csv(source: &str, bytes: &[u8]) -> Result<Vec<LawRow>> {
    from_csv(source, bytes, &LAW_HEADER)
}

pub fn quotes_csv(rows: &[QuoteRow]) -> Result<Vec<u8>> {
    to_csv(&QUOTE_HEADER, rows)
}

pub fn parse_quotes_csv(source: &str, bytes: &[u8]) -> Result<Vec<QuoteRow>> {
    from_csv(source, bytes, &QUOTE_HEADER)
}

pub fn read_quotes(path: &Path) -> Result<Vec<QuoteRow>> {
    read_csv_file(path, &QUOTE_HEADER)
}

pub fn ohlc_csv(rows: &[OhlcRow]) -> Result<Vec<u8>> {
    to_csv(&OHLC_HEADER, rows)
}

pub fn parse_ohlc_csv(source: &str, bytes: &[u8]) -> Result<Vec<OhlcRow>> {
    from_csv(source, bytes, &OHLC_HEADER)
}

pub fn read_ohlc(path: &Path) -> Result<Vec<OhlcRow>> {
    read_csv_file(path, &OHLC_HEADER)
}
