use std::io::Write;

use anyhow::Result;
use serde::{Deserialize, Serialize};

use crate::config::OutputFormat;

/// One row of output. CSV columns follow the field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial_id: u64,
    pub seed: u64,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub algorithm: String,
    pub max_dislocation: u64,
    pub total_dislocation: u64,
    pub comparisons: u64,
    pub wall_time_ms: u64,
    /// `key=value` pairs joined by `;`, empty when nothing was flagged.
    pub flags: String,
}

pub const CSV_HEADER: &str = "trial_id,seed,n,p,q,algorithm,max_dislocation,total_dislocation,comparisons,wall_time_ms,flags";

pub fn write_reports<W: Write>(out: W, reports: &[TrialReport], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in reports {
                w.serialize(r)?;
            }
            if reports.is_empty() {
                w.write_record(CSV_HEADER.split(','))?;
            }
            w.flush()?;
        }
        OutputFormat::Jsonl => {
            let mut out = out;
            for r in reports {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}
