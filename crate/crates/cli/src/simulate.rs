//! `funcavg simulate`: run one Monte Carlo table and emit its reports.

use std::path::{Path, PathBuf};

use funcavg_core::simharness::{run, ExperimentId, ExperimentReport, ExperimentSpec};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub table: u8,
    pub iterations: Option<usize>,
    pub replicates: Option<usize>,
    pub n_grid: Vec<usize>,
    pub full: bool,
    pub alpha: f64,
    pub seed: u64,
}

impl SimulateConfig {
    pub fn spec(&self) -> CliResult<ExperimentSpec> {
        let id = ExperimentId::from_number(self.table).map_err(|e| CliError::Usage(e.to_string()))?;
        let mut spec =
            if self.full { ExperimentSpec::full(id, self.seed) } else { ExperimentSpec::desk(id, self.seed) };
        if let Some(m) = self.iterations {
            spec = spec.with_iterations(m);
        }
        if let Some(b) = self.replicates {
            spec = spec.with_replicates(b);
        }
        if !self.n_grid.is_empty() {
            spec = spec.with_n_grid(self.n_grid.clone());
        }
        spec = spec.with_alpha(self.alpha);
        spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(spec)
    }
}

pub fn simulate(config: &SimulateConfig) -> CliResult<ExperimentReport> {
    Ok(run(&config.spec()?)?)
}

/// Writes `<table>.csv` and `<table>.txt` under `dir`; returns both paths.
pub fn write_reports(report: &ExperimentReport, dir: &Path) -> CliResult<[PathBuf; 2]> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let csv_path = dir.join(format!("{}.csv", report.spec.id));
    let txt_path = dir.join(format!("{}.txt", report.spec.id));
    let file = std::fs::File::create(&csv_path).map_err(CliError::io(&csv_path))?;
    report.write_csv(std::io::BufWriter::new(file))?;
    std::fs::write(&txt_path, report.to_text()).map_err(CliError::io(&txt_path))?;
    Ok([csv_path, txt_path])
}
