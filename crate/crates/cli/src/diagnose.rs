//! `funcavg diagnose`: sum-symmetry and support-symmetry checks.

use std::io::Write;
use std::path::Path;

use funcavg_core::diagnostics::{
    ecdf, mean_midrange_distance, normalized_mean_midrange_distance, residual_support_symmetry, sum_symmetry,
    SupportSymmetry,
};
use funcavg_core::regression::ols_fit;
use funcavg_core::{Dataset, ModelSpec, Sample};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDiagnostic {
    pub group: String,
    pub n: usize,
    pub gap: f64,
    pub normalized_gap: f64,
    pub mean_midrange: f64,
    pub normalized_mean_midrange: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnosis {
    pub groups: Vec<GroupDiagnostic>,
    /// `(group, ECDF points)` for every reported group.
    pub curves: Vec<(String, Vec<(f64, f64)>)>,
    pub residuals: Option<ResidualDiagnostic>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualDiagnostic {
    pub support: SupportSymmetry,
    /// `(fitted, residual)` pairs.
    pub points: Vec<(f64, f64)>,
}

/// Group labels in ascending numeric order with their row indices.
fn split_groups(data: &Dataset, group: Option<&str>) -> CliResult<Vec<(String, Vec<usize>)>> {
    let Some(name) = group else {
        return Ok(vec![("all".to_string(), (0..data.n_rows()).collect())]);
    };
    let codes = data.column(name)?;
    let mut keys: Vec<f64> = codes.to_vec();
    keys.sort_by(f64::total_cmp);
    keys.dedup();
    Ok(keys
        .into_iter()
        .map(|k| (k.to_string(), codes.iter().enumerate().filter(|(_, &c)| c == k).map(|(i, _)| i).collect()))
        .collect())
}

pub fn diagnose(data: &Dataset, outcome: &str, group: Option<&str>, model: Option<&ModelSpec>) -> CliResult<Diagnosis> {
    let y = data.column(outcome)?;
    let mut groups = Vec::new();
    let mut curves = Vec::new();
    let mut warnings = Vec::new();
    for (label, rows) in split_groups(data, group)? {
        if rows.len() < 2 {
            warnings.push(format!("group {label} skipped: {} row(s), need at least 2", rows.len()));
            continue;
        }
        let sample = Sample::new(rows.iter().map(|&i| y[i]).collect())?;
        let sym = match sum_symmetry(&sample) {
            Ok(s) => s,
            Err(e) => {
                warnings.push(format!("group {label} skipped: {e}"));
                continue;
            }
        };
        groups.push(GroupDiagnostic {
            group: label.clone(),
            n: rows.len(),
            gap: sym.gap,
            normalized_gap: sym.normalized_gap,
            mean_midrange: mean_midrange_distance(&sample),
            normalized_mean_midrange: normalized_mean_midrange_distance(&sample),
        });
        curves.push((label, ecdf(&sample).points().collect()));
    }
    let residuals = match model {
        Some(m) => {
            if m.outcome != outcome {
                return Err(CliError::Usage(format!(
                    "model outcome `{}` differs from --outcome `{outcome}`",
                    m.outcome
                )));
            }
            let fit = ols_fit(&m.design(data)?, m.response(data)?)?;
            let support = residual_support_symmetry(&Sample::new(fit.residuals.clone())?)?;
            Some(ResidualDiagnostic {
                support,
                points: fit.fitted.iter().copied().zip(fit.residuals.iter().copied()).collect(),
            })
        }
        None => None,
    };
    Ok(Diagnosis { groups, curves, residuals, warnings })
}

pub fn write_text<W: Write>(d: &Diagnosis, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<8} {:>7} {:>12} {:>12} {:>12} {:>12}",
        "group", "n", "gap", "gap/range", "|mean-mr|", "|mean-mr|/R"
    )?;
    for g in &d.groups {
        writeln!(
            out,
            "{:<8} {:>7} {:>12.5} {:>12.5} {:>12.5} {:>12.5}",
            g.group, g.n, g.gap, g.normalized_gap, g.mean_midrange, g.normalized_mean_midrange
        )?;
    }
    if let Some(r) = &d.residuals {
        writeln!(out)?;
        writeln!(
            out,
            "residual support: min {:.5}, max {:.5}, asymmetry |max+min|/(max-min) {:.5}",
            r.support.min, r.support.max, r.support.asymmetry
        )?;
    }
    Ok(())
}

fn write_pairs(path: &Path, header: [&str; 2], pairs: &[(f64, f64)]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let fail = |e: csv::Error| CliError::Data(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(fail)?;
    for (a, b) in pairs {
        w.write_record([a.to_string(), b.to_string()]).map_err(fail)?;
    }
    w.flush().map_err(CliError::io(path))
}

/// `diagnostics.csv`, one `ecdf_<group>.csv` per group and, with a model,
/// `residuals.csv`.
pub fn write_files(d: &Diagnosis, dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let summary = dir.join("diagnostics.csv");
    let mut w = csv::Writer::from_path(&summary).map_err(|e| CliError::Data(format!("{}: {e}", summary.display())))?;
    for g in &d.groups {
        w.serialize(g).map_err(|e| CliError::Data(format!("{}: {e}", summary.display())))?;
    }
    w.flush().map_err(CliError::io(&summary))?;
    for (label, points) in &d.curves {
        write_pairs(&dir.join(format!("ecdf_{label}.csv")), ["value", "ecdf"], points)?;
    }
    if let Some(r) = &d.residuals {
        write_pairs(&dir.join("residuals.csv"), ["fitted", "residual"], &r.points)?;
    }
    Ok(())
}
