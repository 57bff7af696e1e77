//! Command-line front end: `estimate`, `simulate` and `diagnose`.
//!
//! Exit codes are 0 on success, 2 for usage errors and 1 for data or
//! runtime errors. Every random step is keyed by `--seed`, which is echoed
//! to stderr.

pub mod diagnose;
pub mod error;
pub mod estimate;
pub mod ingest;
pub mod simulate;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use funcavg_core::ModelSpec;

pub use error::{CliError, CliResult};
pub use estimate::{EstimateConfig, Method, ReportLine};
pub use ingest::{ingest_csv, Ingested};
pub use simulate::SimulateConfig;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(name = "funcavg", version, about = "Functional-average treatment effects with Hoeffding bootstrap inference")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate treatment effects from a CSV file.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo coverage/power study.
    Simulate(SimulateArgs),
    /// Sum-symmetry and residual support diagnostics.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Input CSV with a header row.
    pub input: PathBuf,
    #[arg(long)]
    pub outcome: String,
    /// Binary 0/1 treatment column.
    #[arg(long)]
    pub treatment: String,
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    /// Columns to mean-center after complete-case filtering.
    #[arg(long, value_delimiter = ',')]
    pub center: Vec<String>,
    /// Regression formula for mr, mr-u and s, e.g. `y ~ t + age + I(age^2)`.
    #[arg(long)]
    pub model: Option<String>,
    /// Methods to run; defaults to all that apply.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub method: Vec<Method>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Bootstrap replicates.
    #[arg(long = "b", default_value_t = 1000)]
    pub b: usize,
    #[arg(long, env = "FUNCAVG_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Also write the report as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=6))]
    pub table: u8,
    /// Iterations per cell (M).
    #[arg(long = "m-iterations", visible_alias = "m")]
    pub m_iterations: Option<usize>,
    #[arg(long = "b")]
    pub b: Option<usize>,
    /// Sample sizes, overriding the profile grid.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// M = 1000 over n in {500, 2500, 5000, 10000}.
    #[arg(long)]
    pub full: bool,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, env = "FUNCAVG_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Directory for `<table>.csv` and `<table>.txt`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub outcome: String,
    /// Report each level of this column separately.
    #[arg(long)]
    pub group: Option<String>,
    /// Fit this formula and report residual support symmetry.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub center: Vec<String>,
    /// Directory for the summary CSV and ECDF/residual point files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_model(text: Option<&str>) -> CliResult<Option<ModelSpec>> {
    text.map(|t| t.parse::<ModelSpec>().map_err(|e| CliError::Usage(e.to_string()))).transpose()
}

fn load(input: &Path, columns: &[&str], center: &[String], err: &mut dyn Write) -> CliResult<funcavg_core::Dataset> {
    let mut cols = columns.to_vec();
    cols.extend(center.iter().map(String::as_str));
    let Ingested { mut dataset, dropped } = ingest_csv(input, &cols)?;
    if dropped > 0 {
        let _ = writeln!(err, "dropped {dropped} incomplete row(s)");
    }
    let center: Vec<&str> = center.iter().map(String::as_str).collect();
    dataset.center(&center)?;
    Ok(dataset)
}

fn write_out(path: &Path) -> CliResult<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(std::fs::File::create(path).map_err(CliError::io(path))?))
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io { path: "<stdout>".into(), source: e };
    match cli.command {
        Command::Estimate(a) => {
            let _ = writeln!(err, "seed: {}", a.seed);
            let model = parse_model(a.model.as_deref())?;
            let mut methods = a.method.clone();
            if methods.is_empty() {
                methods = vec![Method::Lr, Method::Mr, Method::MrU, Method::S, Method::Ps, Method::Av, Method::Mid];
                if a.covariates.is_empty() {
                    methods.retain(|&m| m != Method::Ps);
                }
            }
            let config = EstimateConfig {
                outcome: a.outcome,
                treatment: a.treatment,
                covariates: a.covariates,
                model,
                methods,
                alpha: a.alpha,
                replicates: a.b,
                seed: a.seed,
            };
            config.validate()?;
            let data = load(&a.input, &config.columns(), &a.center, err)?;
            let lines = estimate::estimate(&data, &config)?;
            estimate::write_text(&lines, &mut *out).map_err(io)?;
            if let Some(path) = &a.out {
                estimate::write_csv(&lines, write_out(path)?)?;
            }
        }
        Command::Simulate(a) => {
            let _ = writeln!(err, "seed: {}", a.seed);
            let config = SimulateConfig {
                table: a.table,
                iterations: a.m_iterations,
                replicates: a.b,
                n_grid: a.n,
                full: a.full,
                alpha: a.alpha,
                seed: a.seed,
            };
            let start = Instant::now();
            let report = simulate::simulate(&config)?;
            let _ = writeln!(err, "wall time: {:.2}s", start.elapsed().as_secs_f64());
            out.write_all(report.to_text().as_bytes()).map_err(io)?;
            if let Some(dir) = &a.out {
                for p in simulate::write_reports(&report, dir)? {
                    let _ = writeln!(err, "wrote {}", p.display());
                }
            }
        }
        Command::Diagnose(a) => {
            let model = parse_model(a.model.as_deref())?;
            let mut cols = vec![a.outcome.as_str()];
            cols.extend(a.group.as_deref());
            if let Some(m) = &model {
                cols.extend(m.columns());
            }
            let data = load(&a.input, &cols, &a.center, err)?;
            let d = diagnose::diagnose(&data, &a.outcome, a.group.as_deref(), model.as_ref())?;
            for w in &d.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            diagnose::write_text(&d, &mut *out).map_err(io)?;
            if let Some(dir) = &a.out {
                diagnose::write_files(&d, dir)?;
            }
        }
    }
    Ok(())
}

/// Parse `args` and run, returning the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 2;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match run(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
