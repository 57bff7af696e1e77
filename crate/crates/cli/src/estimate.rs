//! `funcavg estimate`: treatment-effect report for a CSV dataset.

use std::io::Write;

use clap::ValueEnum;
use funcavg_core::bootstrap::{hoeffding_ci, hoeffding_u_ci, resample_two_arm};
use funcavg_core::regression::{
    ols_fit, ps_stratified_contrast, standardization_bootstrap, t_ci, u_concentration_ci, StandardizationSpec,
};
use funcavg_core::{
    BootstrapConfig, Dataset, EstimatorKind, IntervalEstimate, ModelSpec, RngStream, TwoArmSample, UFactor,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Simple regression on treatment, t interval.
    Lr,
    /// Multiple regression, t interval.
    Mr,
    /// Multiple regression, U-concentration interval.
    MrU,
    /// Standardized regression contrast, percentile bootstrap.
    S,
    /// Propensity-quintile adjusted regression with standardization.
    Ps,
    /// Discrete plug-in contrast, U-extension Hoeffding bootstrap.
    Av,
    /// Mid-range contrast, Hoeffding bootstrap.
    Mid,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Lr => "LR",
            Method::Mr => "MR",
            Method::MrU => "MR-U",
            Method::S => "S",
            Method::Ps => "PS",
            Method::Av => "Av",
            Method::Mid => "Mid",
        }
    }

    /// Bootstrap stream used by the method, so adding methods to a run never
    /// changes the others' intervals.
    fn stream(&self) -> u64 {
        *self as u64
    }
}

#[derive(Debug, Clone)]
pub struct EstimateConfig {
    pub outcome: String,
    pub treatment: String,
    pub covariates: Vec<String>,
    pub model: Option<ModelSpec>,
    pub methods: Vec<Method>,
    pub alpha: f64,
    pub replicates: usize,
    pub seed: u64,
}

impl EstimateConfig {
    /// Every column any requested method reads.
    pub fn columns(&self) -> Vec<&str> {
        let mut cols = vec![self.outcome.as_str(), self.treatment.as_str()];
        cols.extend(self.covariates.iter().map(String::as_str));
        if let Some(m) = &self.model {
            cols.extend(m.columns());
        }
        cols
    }

    fn regression_model(&self) -> ModelSpec {
        self.model.clone().unwrap_or_else(|| {
            let covs: Vec<&str> = self.covariates.iter().map(String::as_str).collect();
            ModelSpec::additive(&self.outcome, &self.treatment, &covs)
        })
    }

    pub fn validate(&self) -> CliResult<()> {
        if let Some(m) = &self.model {
            if m.outcome != self.outcome {
                return Err(CliError::Usage(format!(
                    "model outcome `{}` differs from --outcome `{}`",
                    m.outcome, self.outcome
                )));
            }
            if !m.mentions(&self.treatment) {
                return Err(CliError::Usage(format!("model `{m}` does not use treatment `{}`", self.treatment)));
            }
        }
        if self.methods.contains(&Method::Ps) && self.covariates.is_empty() {
            return Err(CliError::Usage("method ps needs --covariates".into()));
        }
        if self.replicates == 0 {
            return Err(CliError::Usage("--b must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportLine {
    pub parameter: String,
    pub method: String,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub interval: String,
    pub alpha: f64,
}

impl ReportLine {
    fn new(parameter: &str, method: Method, ci: &IntervalEstimate) -> Self {
        Self {
            parameter: parameter.to_string(),
            method: method.label().to_string(),
            estimate: ci.point,
            lower: ci.lower,
            upper: ci.upper,
            interval: ci.method.as_str().to_string(),
            alpha: ci.alpha,
        }
    }
}

pub fn estimate(data: &Dataset, config: &EstimateConfig) -> CliResult<Vec<ReportLine>> {
    config.validate()?;
    let alpha = config.alpha;
    let rng = |m: Method| RngStream::new(config.seed, m.stream());
    let arms = || -> CliResult<TwoArmSample> {
        Ok(TwoArmSample::from_indicator(data.column(&config.outcome)?, data.column(&config.treatment)?)?)
    };
    let mut lines = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let line = match method {
            Method::Lr | Method::Mr | Method::MrU => {
                let model = if method == Method::Lr {
                    ModelSpec::additive(&config.outcome, &config.treatment, &[])
                } else {
                    config.regression_model()
                };
                let fit = ols_fit(&model.design(data)?, model.response(data)?)?;
                let s = fit.index_of(&config.treatment)?;
                let ci =
                    if method == Method::MrU { u_concentration_ci(&fit, s, alpha)? } else { t_ci(&fit, s, alpha)? };
                ReportLine::new("beta_t", method, &ci)
            }
            Method::S => {
                let spec = StandardizationSpec::binary(config.regression_model(), config.treatment.clone());
                let ci = standardization_bootstrap(data, &spec, config.replicates, rng(method), alpha)?;
                ReportLine::new("delta_L", method, &ci)
            }
            Method::Ps => {
                let covs: Vec<&str> = config.covariates.iter().map(String::as_str).collect();
                let ci = ps_stratified_contrast(
                    data,
                    &config.outcome,
                    &config.treatment,
                    &covs,
                    config.replicates,
                    rng(method),
                    alpha,
                )?;
                ReportLine::new("delta_S", method, &ci)
            }
            Method::Av | Method::Mid => {
                let kind = if method == Method::Av { EstimatorKind::Plugin } else { EstimatorKind::Midrange };
                let arms = arms()?;
                let cfg = BootstrapConfig::new(config.replicates, rng(method));
                let dist = resample_two_arm(&arms, &cfg, |a, b| Ok(kind.apply(a)? - kind.apply(b)?))?;
                let ci = if method == Method::Av {
                    hoeffding_u_ci(&dist, alpha, UFactor::Improved)?
                } else {
                    hoeffding_ci(&dist, alpha)?
                };
                ReportLine::new("delta", method, &ci)
            }
        };
        lines.push(line);
    }
    Ok(lines)
}

pub fn write_text<W: Write>(lines: &[ReportLine], mut out: W) -> std::io::Result<()> {
    let level = lines.first().map_or(95.0, |l| 100.0 * (1.0 - l.alpha));
    writeln!(out, "{:<10} {:<6} {:>12}  {:<28} interval", "parameter", "method", "estimate", format!("{level}% CI"))?;
    for l in lines {
        let ci = format!("[{:.4}, {:.4}]", l.lower, l.upper);
        writeln!(out, "{:<10} {:<6} {:>12.4}  {:<28} {}", l.parameter, l.method, l.estimate, ci, l.interval)?;
    }
    Ok(())
}

pub fn write_csv<W: Write>(lines: &[ReportLine], out: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for l in lines {
        w.serialize(l).map_err(|e| CliError::Data(format!("writing report: {e}")))?;
    }
    w.flush().map_err(|e| CliError::Data(format!("writing report: {e}")))
}

pub fn read_csv<R: std::io::Read>(input: R) -> CliResult<Vec<ReportLine>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Data(format!("reading report: {e}")))
}
