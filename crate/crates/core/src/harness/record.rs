use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::TickRecord;

/// One CSV row, columns in output order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub tick: usize,
    pub q_h: f64,
    pub q_l: f64,
    pub pollution: f64,
    pub verify_rate: f64,
    pub precision: f64,
    pub trust: f64,
    pub welfare: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub ipi: f64,
    pub tau: f64,
    pub gamma_h: f64,
    pub gamma_l: f64,
    pub m: f64,
    pub event: String,
}

impl From<&TickRecord> for RunRow {
    fn from(r: &TickRecord) -> Self {
        let [i1, i2, i3, i4] = r.dims;
        Self {
            tick: r.tick,
            q_h: r.q_h,
            q_l: r.q_l,
            pollution: r.pollution,
            verify_rate: r.verify_rate,
            precision: r.precision,
            trust: r.trust,
            welfare: r.welfare,
            i1,
            i2,
            i3,
            i4,
            ipi: r.ipi,
            tau: r.tau,
            gamma_h: r.gamma_h,
            gamma_l: r.gamma_l,
            m: r.m,
            event: r.event.clone(),
        }
    }
}

pub const COLUMNS: [&str; 18] = [
    "tick",
    "q_h",
    "q_l",
    "pollution",
    "verify_rate",
    "precision",
    "trust",
    "welfare",
    "i1",
    "i2",
    "i3",
    "i4",
    "ipi",
    "tau",
    "gamma_h",
    "gamma_l",
    "m",
    "event",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
    /// Ticks whose deadweight reading was clamped into the anchor range.
    pub i2_clamped_ticks: usize,
    /// Ticks where endogenous weights fell back to the fixed vector.
    pub weight_fallback_ticks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub rows: Vec<RunRow>,
    pub meta: RunMeta,
}

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

impl RunRecord {
    pub fn from_ticks(ticks: &[TickRecord], config_hash: &str, seed: u64) -> Self {
        Self {
            rows: ticks.iter().map(RunRow::from).collect(),
            meta: RunMeta {
                config_hash: config_hash.to_string(),
                seed,
                code_version: CODE_VERSION.to_string(),
                i2_clamped_ticks: ticks.iter().filter(|t| t.i2_clamped).count(),
                weight_fallback_ticks: ticks.iter().filter(|t| t.weights_fallback).count(),
            },
        }
    }

    pub fn column(&self, f: impl Fn(&RunRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_rows<W: Write>(rows: &[RunRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<RunRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header != COLUMNS {
        return Err(Error::Config(format!("unexpected CSV header: {}", header.join(","))));
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn write_csv(rows: &[RunRow], path: &Path) -> Result<()> {
    write_rows(rows, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn read_csv(path: &Path) -> Result<Vec<RunRow>> {
    read_rows(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// A generic table written with a header row.
pub fn write_table<S: Serialize>(rows: &[S], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Two-column whitespace-separated data for plotting.
pub fn write_dat(path: &Path, header: (&str, &str), points: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
    let mut s = format!("# {} {}\n", header.0, header.1);
    for (x, y) in points {
        s.push_str(&format!("{x} {y}\n"));
    }
    std::fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(tick: usize, ipi: f64) -> RunRow {
        RunRow {
            tick,
            q_h: 1.0 / 3.0,
            q_l: 2.5,
            pollution: 0.1,
            verify_rate: 0.2,
            precision: 0.9,
            trust: 0.5,
            welfare: -1.25e-7,
            i1: 0.1,
            i2: 0.2,
            i3: 0.5,
            i4: 0.5,
            ipi,
            tau: 0.0,
            gamma_h: 1.0,
            gamma_l: 1.0,
            m: 0.3,
            event: if tick == 2 { "cost_drop+trust_shock".into() } else { String::new() },
        }
    }

    #[test]
    fn zero_rows_give_header_only() {
        let mut buf = Vec::new();
        write_rows(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", COLUMNS.join(",")));
    }

    #[test]
    fn rows_round_trip_exactly() {
        let rows: Vec<_> = (1..=3).map(|t| row(t, 0.1 * t as f64 + 1e-17)).collect();
        let mut buf = Vec::new();
        write_rows(&rows, &mut buf).unwrap();
        let back = read_rows(buf.as_slice()).unwrap();
        assert_eq!(rows, back);
    }

    #[test]
    fn foreign_header_is_rejected() {
        assert!(read_rows("a,b\n1,2\n".as_bytes()).is_err());
    }
}
