use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::experiment::TrialRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "trial,seed,scheme,M,L,K,B,snr_db,eta,eta_opt,nodes,ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!(
                "unknown format `{other}` (expected csv or json)"
            ))),
        }
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    trial: usize,
    seed: u64,
    scheme: &'a str,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "L")]
    l: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "B")]
    b: u32,
    snr_db: f64,
    eta: f64,
    eta_opt: f64,
    nodes: usize,
    ms: f64,
}

/// Write records to any sink. Failed records carry `NaN` in CSV and `null`
/// plus an `error` field in JSON.
pub fn write_report<W: Write>(records: &[TrialRecord], format: ReportFormat, out: W) -> std::io::Result<()> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(CsvRow {
                    trial: r.trial,
                    seed: r.seed,
                    scheme: r.scheme.as_str(),
                    m: r.antennas,
                    l: r.beams,
                    k: r.rf_chains,
                    b: r.bits,
                    snr_db: r.snr_db,
                    eta: r.eta.unwrap_or(f64::NAN),
                    eta_opt: r.eta_opt.unwrap_or(f64::NAN),
                    nodes: r.nodes,
                    ms: r.ms,
                })?;
            }
            w.flush()
        }
        ReportFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, records)?;
            out.write_all(b"\n")
        }
    }
}

pub fn emit_report(records: &[TrialRecord], path: &Path, format: ReportFormat) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Input("no records to write".into()));
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut buf = std::io::BufWriter::new(file);
    write_report(records, format, &mut buf).map_err(|e| Error::io(path, e))?;
    buf.flush().map_err(|e| Error::io(path, e))
}
