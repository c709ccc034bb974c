//! Number formatting, CSV writers and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::bandit::{SweepCell, TrajectoryRecord};

/// Column header of trajectory CSVs, before any snapshot columns.
pub const TRAJECTORY_HEADER: [&str; 8] = [
    "step",
    "chosen",
    "advantage",
    "p_chosen",
    "collision",
    "shannon",
    "renyi2",
    "update_norm",
];

pub const SWEEP_HEADER: [&str; 3] = ["p_chosen", "collision", "sensitivity"];
pub const INFEASIBLE: &str = "infeasible";

/// `x` rounded to `digits` significant digits, trailing zeros trimmed.
/// Plain notation for exponents in `[-5, digits)`, scientific otherwise.
pub fn format_sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("LowerExp always has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Twelve significant digits, the precision of printed tables.
pub fn fmt12(x: f64) -> String {
    format_sig(x, 12)
}

/// Shortest text that parses back to exactly `x`.
pub fn fmt_exact(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let a = x.abs();
    if (1e-5..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes rows to `path` as CSV.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Renders rows as CSV text.
pub fn csv_string(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

pub fn trajectory_table(records: &[TrajectoryRecord]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header: Vec<String> = TRAJECTORY_HEADER.iter().map(|s| s.to_string()).collect();
    let snapshot_len = records
        .first()
        .and_then(|r| r.logits_snapshot.as_ref())
        .map_or(0, Vec::len);
    header.extend((0..snapshot_len).map(|j| format!("z{j}")));
    let rows = records
        .iter()
        .map(|r| {
            let mut row = vec![
                r.step.to_string(),
                r.chosen.to_string(),
                fmt_exact(r.advantage),
                fmt_exact(r.p_chosen),
                fmt_exact(r.collision),
                fmt_exact(r.shannon),
                fmt_exact(r.renyi2),
                fmt_exact(r.update_norm),
            ];
            if let Some(z) = &r.logits_snapshot {
                row.extend(z.iter().map(|&v| fmt_exact(v)));
            }
            row
        })
        .collect();
    (header, rows)
}

pub fn sweep_table(cells: &[SweepCell]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = SWEEP_HEADER.iter().map(|s| s.to_string()).collect();
    let rows = cells
        .iter()
        .map(|c| {
            vec![
                fmt_exact(c.p_chosen),
                fmt_exact(c.collision),
                c.sensitivity
                    .map_or_else(|| INFEASIBLE.to_string(), fmt_exact),
            ]
        })
        .collect();
    (header, rows)
}

/// Everything needed to reproduce one command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub rng: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub config: toml::Table,
}

impl RunManifest {
    pub fn new(
        command: &str,
        seed: Option<u64>,
        config: &impl Serialize,
        outputs: &[PathBuf],
    ) -> Result<Self, CliError> {
        Ok(Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            rng: crate::oracle::RNG_ALGORITHM.to_string(),
            seed,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            config: toml::Table::try_from(config)
                .map_err(|e| CliError::Io(format!("cannot serialize manifest config: {e}")))?,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = toml::to_string(self)
            .map_err(|e| CliError::Io(format!("cannot serialize manifest: {e}")))?;
        let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
        f.write_all(text.as_bytes()).map_err(|e| io_err(path, e))
    }
}

/// `run.csv` -> `run.manifest.toml`.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    output.with_extension("manifest.toml")
}
