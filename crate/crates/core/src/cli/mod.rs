//! The `logitdyn` command line.
//!
//! Exit codes: 0 success, 1 failed verification check, 2 invalid config or
//! arguments, 3 I/O failure.

pub mod config;
pub mod output;
pub mod tables;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::bandit::{default_sweep_axis, run, sweep_sensitivity};
use crate::oracle::suite::{CheckOutcome, Suite};
use crate::oracle::RNG_ALGORITHM;
use output::{manifest_path_for, sweep_table, trajectory_table, write_csv, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("{0} verification check(s) failed")]
    CheckFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed(_) => EXIT_CHECK_FAILED,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "logitdyn",
    version,
    about = "Logit-update dynamics of softmax policy gradients"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a bandit simulation and write its trajectory CSV and manifest.
    Simulate {
        /// Config file, or a manifest from an earlier run.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run fixed-seed numerical verification suites.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
    },
    /// Write the update-scaler and entropy tables as CSV.
    Tables {
        /// Output directory; tables are printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the sensitivity factor over a (p_chosen, collision) grid.
    Sweep {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        pc: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        collision: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Gradients,
    Magnitude,
    Entropy,
    Mc,
    All,
}

impl SuiteArg {
    fn suites(self) -> Vec<Suite> {
        match self {
            SuiteArg::Gradients => vec![Suite::Gradients],
            SuiteArg::Magnitude => vec![Suite::Magnitude],
            SuiteArg::Entropy => vec![Suite::Entropy],
            SuiteArg::Mc => vec![Suite::Mc],
            SuiteArg::All => Suite::ALL.to_vec(),
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_CONFIG;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Simulate { config, out: path } => cmd_simulate(&config, &path, out),
        Command::Verify { suite } => cmd_verify(suite, out, err),
        Command::Tables { out: dir } => cmd_tables(dir.as_deref(), out),
        Command::Sweep {
            pc,
            collision,
            out: path,
        } => cmd_sweep(pc, collision, &path, out),
    }
}

fn say(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<(), CliError> {
    out.write_fmt(text)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|e| CliError::Io(format!("stdout: {e}")))
}

pub fn cmd_simulate(
    config_path: &Path,
    csv_path: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let resolved = config::load_config(config_path)?;
    let (env, cfg) = resolved.build()?;
    let result = run(&env, &cfg).map_err(|e| CliError::Config(e.to_string()))?;

    let (header, rows) = trajectory_table(&result.records);
    write_csv(csv_path, &header, &rows)?;
    let manifest_path = manifest_path_for(csv_path);
    RunManifest::new(
        "simulate",
        Some(resolved.seed),
        &resolved,
        &[csv_path.to_path_buf()],
    )?
    .write(&manifest_path)?;

    let probs: Vec<String> = result
        .final_probs
        .probs()
        .iter()
        .map(|&p| output::fmt12(p))
        .collect();
    say(
        out,
        format_args!("wrote {} ({} steps)", csv_path.display(), rows.len()),
    )?;
    say(out, format_args!("wrote {}", manifest_path.display()))?;
    say(
        out,
        format_args!("final probabilities: [{}]", probs.join(", ")),
    )?;
    say(
        out,
        format_args!("final collision: {}", output::fmt12(result.final_collision)),
    )
}

fn run_suites(suites: &[Suite]) -> Result<Vec<CheckOutcome>, CliError> {
    // Suites are independent; run them side by side.
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = suites
            .iter()
            .map(|&suite| s.spawn(move || suite.run()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("verification thread panicked"))
            .collect()
    });
    let mut outcomes = Vec::new();
    for r in results {
        outcomes.extend(r.map_err(|e| CliError::Config(format!("verification setup: {e}")))?);
    }
    Ok(outcomes)
}

pub fn cmd_verify(
    suite: SuiteArg,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    say(out, format_args!("rng: {RNG_ALGORITHM}"))?;
    let outcomes = run_suites(&suite.suites())?;
    let mut failed = 0;
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        say(
            out,
            format_args!(
                "[{tag}] {}/{}  instances={}  max_err={:e}  threshold={:e}",
                o.suite, o.name, o.instances, o.max_error, o.threshold
            ),
        )?;
        if !o.passed {
            failed += 1;
            let replay = serde_json::to_string(&o)
                .unwrap_or_else(|e| format!("{{\"error\":\"unserializable instance: {e}\"}}"));
            let _ = writeln!(err, "failing instance: {replay}");
        }
    }
    say(
        out,
        format_args!("{} checks, {} failed", outcomes.len(), failed),
    )?;
    if failed > 0 {
        return Err(CliError::CheckFailed(failed));
    }
    Ok(())
}

#[derive(Serialize)]
struct TablesConfig {
    chosen_probs: Vec<f64>,
    other_probs: Vec<f64>,
    uniform_sizes: Vec<usize>,
    two_point_probs: Vec<f64>,
    near_deterministic_mass: f64,
}

pub fn cmd_tables(dir: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let tables = tables::all_tables().map_err(|e| CliError::Config(e.to_string()))?;
    let Some(dir) = dir else {
        for t in &tables {
            say(out, format_args!("# {}", t.name))?;
            out.write_all(output::csv_string(&t.header, &t.rows).as_bytes())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
        }
        return Ok(());
    };
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for t in &tables {
        let path = dir.join(format!("{}.csv", t.name));
        write_csv(&path, &t.header, &t.rows)?;
        say(out, format_args!("wrote {}", path.display()))?;
        paths.push(path);
    }
    let config = TablesConfig {
        chosen_probs: tables::CHOSEN_PROBS.to_vec(),
        other_probs: tables::OTHER_PROBS.to_vec(),
        uniform_sizes: tables::UNIFORM_SIZES.to_vec(),
        two_point_probs: tables::TWO_POINT_PROBS.to_vec(),
        near_deterministic_mass: tables::NEAR_DETERMINISTIC_MASS,
    };
    RunManifest::new("tables", None, &config, &paths)?.write(&dir.join("manifest.toml"))
}

#[derive(Serialize)]
struct SweepConfig {
    pc: Vec<f64>,
    collision: Vec<f64>,
}

fn check_axis(name: &str, values: &[f64]) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(CliError::Config(format!("{name}: grid axis is empty")));
    }
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(CliError::Config(format!("{name}: {v} is outside [0, 1]")));
    }
    Ok(())
}

pub fn cmd_sweep(
    pc: Option<Vec<f64>>,
    collision: Option<Vec<f64>>,
    csv_path: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let pc = pc.unwrap_or_else(default_sweep_axis);
    let collision = collision.unwrap_or_else(default_sweep_axis);
    check_axis("pc", &pc)?;
    check_axis("collision", &collision)?;
    let cells = sweep_sensitivity(&pc, &collision);
    let (header, rows) = sweep_table(&cells);
    write_csv(csv_path, &header, &rows)?;
    let manifest_path = manifest_path_for(csv_path);
    RunManifest::new(
        "sweep",
        None,
        &SweepConfig { pc, collision },
        &[csv_path.to_path_buf()],
    )?
    .write(&manifest_path)?;
    let feasible = cells.iter().filter(|c| c.sensitivity.is_some()).count();
    say(
        out,
        format_args!(
            "wrote {} ({} cells, {} feasible)",
            csv_path.display(),
            cells.len(),
            feasible
        ),
    )
}
