//! Monte Carlo coverage and power studies for the functional-average
//! estimators.
//!
//! Each study is a grid of cells `(variant, n)`. Every cell runs `M`
//! independent iterations, each drawing a fresh dataset and forming point
//! estimates and confidence sets. Cells report the mean estimate, the mean
//! interval endpoints, empirical coverage (EC) of the true parameter and
//! empirical power (EP) against a null of zero.
//!
//! Iteration `i` of cell `(v, k)` draws from the stream
//! `(base_seed, stream_id(table, v, k, i))`; bootstrap replicates use children
//! of that stream. Iterations run in parallel and are aggregated in index
//! order, so a report depends only on its [`ExperimentSpec`].

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{
    hoeffding_ci, hoeffding_u_ci, percentile_ci, popoviciu_check, resample_indices, resample_two_arm, BootstrapConfig,
    BootstrapDistribution, IntervalEstimate, ResampleSize, UFactor,
};
use crate::distributions::{
    bernoulli_draw, round_to_integers, sample_binomial, sample_truncated_normal, BinomialSpec, TruncatedNormalSpec,
};
use crate::error::{Error, Result};
use crate::estimators::{midrange_value, plugin_value};
use crate::regression::{ols_fit, t_ci, u_concentration_ci, DesignMatrix, RegressionFit, INTERCEPT};
use crate::rng::RngStream;
use crate::sample::TwoArmSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Table2,
    Table3,
    Table4,
    Table5,
    Table6,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 5] =
        [ExperimentId::Table2, ExperimentId::Table3, ExperimentId::Table4, ExperimentId::Table5, ExperimentId::Table6];

    pub fn number(&self) -> u8 {
        match self {
            ExperimentId::Table2 => 2,
            ExperimentId::Table3 => 3,
            ExperimentId::Table4 => 4,
            ExperimentId::Table5 => 5,
            ExperimentId::Table6 => 6,
        }
    }

    pub fn from_number(k: u8) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.number() == k)
            .ok_or_else(|| Error::param(format!("unknown table {k}; expected 2 to 6")))
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::Table2 => "table2",
            ExperimentId::Table3 => "table3",
            ExperimentId::Table4 => "table4",
            ExperimentId::Table5 => "table5",
            ExperimentId::Table6 => "table6",
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            ExperimentId::Table2 => "Functional average estimation, continuous",
            ExperimentId::Table3 => "Functional average estimation, discrete",
            ExperimentId::Table4 => "Continuous effect estimators (Delta = 10)",
            ExperimentId::Table5 => "Discrete effect estimators (Delta = 5)",
            ExperimentId::Table6 => "Linear regression for functional averages (Delta = 20)",
        }
    }

    pub fn default_variants(&self) -> Vec<Variant> {
        let tn = |l, u, m, s| Variant::Law(TruncatedNormalSpec { lower: l, upper: u, mu: m, sigma: s });
        match self {
            ExperimentId::Table2 => vec![tn(0.0, 20.0, 10.0, 5.0), tn(0.0, 15.0, 10.0, 3.0), tn(0.0, 15.0, 5.0, 3.0)],
            ExperimentId::Table3 => vec![tn(0.0, 40.0, 20.0, 5.0), tn(0.0, 40.0, 25.0, 8.0), tn(0.0, 40.0, 15.0, 8.0)],
            ExperimentId::Table4 => vec![Variant::NoiseScale(5.0), Variant::NoiseScale(25.0)],
            ExperimentId::Table5 => vec![Variant::Trials(30), Variant::Trials(50)],
            ExperimentId::Table6 => vec![Variant::Baseline],
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s.trim().trim_start_matches("table");
        let k: u8 = digits.parse().map_err(|_| Error::param(format!("unknown table '{s}'")))?;
        Self::from_number(k)
    }
}

/// The per-table generating parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Truncated normal outcome law (tables 2 and 3).
    Law(TruncatedNormalSpec),
    /// Noise scale `τ` of the truncated normal error (table 4).
    NoiseScale(f64),
    /// Binomial error trials `τ` (table 5).
    Trials(u32),
    /// Table 6 has a single design.
    Baseline,
}

impl Variant {
    pub fn label(&self) -> String {
        match self {
            Variant::Law(s) => format!("TN({},{},{},{})", s.lower, s.upper, s.mu, s.sigma),
            Variant::NoiseScale(t) => format!("tau={t}"),
            Variant::Trials(t) => format!("tau={t}"),
            Variant::Baseline => "base".to_string(),
        }
    }

    fn fits(&self, id: ExperimentId) -> bool {
        matches!(
            (id, self),
            (ExperimentId::Table2 | ExperimentId::Table3, Variant::Law(_))
                | (ExperimentId::Table4, Variant::NoiseScale(_))
                | (ExperimentId::Table5, Variant::Trials(_))
                | (ExperimentId::Table6, Variant::Baseline)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub n_grid: Vec<usize>,
    /// `M`
    pub iterations: usize,
    /// `B`
    pub replicates: usize,
    pub alpha: f64,
    pub variants: Vec<Variant>,
    pub base_seed: u64,
}

pub const DESK_N_GRID: [usize; 2] = [500, 2500];
pub const FULL_N_GRID: [usize; 4] = [500, 2500, 5000, 10000];

const ITERATION_BITS: u32 = 40;

impl ExperimentSpec {
    /// Desk profile: `M = 200`, `B = 500`, `n ∈ {500, 2500}`, `α = 0.05`.
    pub fn desk(id: ExperimentId, base_seed: u64) -> Self {
        Self {
            id,
            n_grid: DESK_N_GRID.to_vec(),
            iterations: 200,
            replicates: 500,
            alpha: 0.05,
            variants: id.default_variants(),
            base_seed,
        }
    }

    /// `M = 1000` over `n ∈ {500, 2500, 5000, 10000}`.
    pub fn full(id: ExperimentId, base_seed: u64) -> Self {
        Self { n_grid: FULL_N_GRID.to_vec(), iterations: 1000, ..Self::desk(id, base_seed) }
    }

    pub fn with_n_grid(mut self, n_grid: Vec<usize>) -> Self {
        self.n_grid = n_grid;
        self
    }

    pub fn with_iterations(mut self, m: usize) -> Self {
        self.iterations = m;
        self
    }

    pub fn with_replicates(mut self, b: usize) -> Self {
        self.replicates = b;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_variants(mut self, variants: Vec<Variant>) -> Self {
        self.variants = variants;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 || self.replicates < 1 {
            return Err(Error::param("iterations and replicates must both be at least 1"));
        }
        if self.n_grid.is_empty() || self.variants.is_empty() {
            return Err(Error::param("the n grid and the variant list must be non-empty"));
        }
        if self.n_grid.len() > 256 || self.variants.len() > 256 || self.iterations as u64 >= 1 << ITERATION_BITS {
            return Err(Error::param("experiment grid too large for the stream layout"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        let min_n = if self.id == ExperimentId::Table2 { 4 } else { 8 };
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < min_n) {
            return Err(Error::param(format!("{} needs n >= {min_n}, got {n}", self.id)));
        }
        if let Some(v) = self.variants.iter().find(|v| !v.fits(self.id)) {
            return Err(Error::param(format!("variant {} does not apply to {}", v.label(), self.id)));
        }
        for v in &self.variants {
            match *v {
                Variant::Law(s) => s.validate()?,
                Variant::NoiseScale(t) if !(t > 0.0 && t.is_finite()) => {
                    return Err(Error::param(format!("noise scale must be positive, got {t}")))
                }
                // the union of the two C-shifted binomial supports must be gap-free
                Variant::Trials(t) if t < 9 => {
                    return Err(Error::param(format!("table5 needs at least 9 trials, got {t}")))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Stream id of iteration `iteration` in cell `(variant, n_index)`:
    /// `table << 56 | variant << 48 | n_index << 40 | iteration`.
    pub fn stream_id(&self, variant: usize, n_index: usize, iteration: usize) -> u64 {
        (u64::from(self.id.number()) << 56)
            | ((variant as u64) << 48)
            | ((n_index as u64) << ITERATION_BITS)
            | iteration as u64
    }

    /// Every iteration stream the spec will use, in execution order.
    pub fn stream_ids(&self) -> Vec<u64> {
        let mut ids = Vec::with_capacity(self.variants.len() * self.n_grid.len() * self.iterations);
        for v in 0..self.variants.len() {
            for k in 0..self.n_grid.len() {
                ids.extend((0..self.iterations).map(|i| self.stream_id(v, k, i)));
            }
        }
        ids
    }
}

/// Confirms that no two iterations of any of `specs` share a random stream.
pub fn audit_streams(specs: &[ExperimentSpec]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for spec in specs {
        spec.validate()?;
        for id in spec.stream_ids() {
            if !seen.insert((spec.base_seed, id)) {
                return Err(Error::param(format!("stream {id:#x} of {} is reused", spec.id)));
            }
        }
    }
    Ok(())
}

/// Fraction of intervals containing `theta`, endpoints included.
pub fn empirical_coverage(cis: &[IntervalEstimate], theta: f64) -> Result<f64> {
    if cis.is_empty() {
        return Err(Error::input("coverage needs at least one interval"));
    }
    Ok(cis.iter().filter(|c| c.contains(theta)).count() as f64 / cis.len() as f64)
}

/// Fraction of intervals excluding `null_value`.
pub fn empirical_power(cis: &[IntervalEstimate], null_value: f64) -> Result<f64> {
    if cis.is_empty() {
        return Err(Error::input("power needs at least one interval"));
    }
    Ok(cis.iter().filter(|c| !c.contains(null_value)).count() as f64 / cis.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub table: String,
    pub variant: String,
    pub n: usize,
    pub estimator: String,
    pub method: String,
    pub theta: f64,
    pub iterations: usize,
    pub mean_estimate: f64,
    pub mean_lower: f64,
    pub mean_upper: f64,
    pub ec: f64,
    pub ep: f64,
    /// Bootstrap distributions failing the Popoviciu self-test.
    pub popoviciu_violations: usize,
    /// Cell wall time; left out of serialized reports.
    #[serde(skip)]
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn find(&self, variant: usize, n: usize, estimator: &str, method: &str) -> Option<&ReportRow> {
        let label = self.spec.variants.get(variant)?.label();
        self.rows.iter().find(|r| r.variant == label && r.n == n && r.estimator == estimator && r.method == method)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::input(format!("writing report: {e}")))?;
        }
        w.flush().map_err(|e| Error::input(format!("writing report: {e}")))
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ReportRow>> {
        csv::Reader::from_reader(input)
            .deserialize()
            .collect::<std::result::Result<Vec<ReportRow>, _>>()
            .map_err(|e| Error::input(format!("reading report: {e}")))
    }

    /// Aligned plain-text rendering, one line per row.
    pub fn to_text(&self) -> String {
        let header = ["variant", "n", "estimator", "method", "estimate", "CI", "EC", "EP"];
        let body: Vec<[String; 8]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.variant.clone(),
                    r.n.to_string(),
                    r.estimator.clone(),
                    r.method.clone(),
                    format!("{:.3}", r.mean_estimate),
                    format!("({:.2}, {:.2})", r.mean_lower, r.mean_upper),
                    format!("{:.3}", r.ec),
                    format!("{:.3}", r.ep),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for line in &body {
            for (w, cell) in widths.iter_mut().zip(line) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let render = |cells: &[&str]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(j, (c, w))| if j < 4 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut text = format!(
            "{}: {} (M={}, B={}, alpha={}, seed={})\n",
            self.spec.id,
            self.spec.id.title(),
            self.spec.iterations,
            self.spec.replicates,
            self.spec.alpha,
            self.spec.base_seed
        );
        text.push_str(&render(&header));
        text.push('\n');
        let rule: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
        text.push_str(&"-".repeat(rule));
        text.push('\n');
        for line in &body {
            let cells: Vec<&str> = line.iter().map(String::as_str).collect();
            text.push_str(&render(&cells));
            text.push('\n');
        }
        text
    }
}

/// One confidence set produced inside an iteration.
struct Outcome {
    estimator: &'static str,
    method: &'static str,
    ci: IntervalEstimate,
    /// `Some` when the interval came from a bootstrap distribution.
    popoviciu_ok: Option<bool>,
}

impl Outcome {
    fn plain(estimator: &'static str, method: &'static str, ci: IntervalEstimate) -> Self {
        Self { estimator, method, ci, popoviciu_ok: None }
    }

    fn boot(
        estimator: &'static str,
        method: &'static str,
        ci: IntervalEstimate,
        dist: &BootstrapDistribution,
        alpha: f64,
    ) -> Result<Self> {
        Ok(Self { estimator, method, ci, popoviciu_ok: Some(popoviciu_check(dist, alpha)?) })
    }
}

struct Cell<'a> {
    spec: &'a ExperimentSpec,
    variant: Variant,
    n: usize,
}

fn execute(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let mut rows = Vec::new();
    for (v, &variant) in spec.variants.iter().enumerate() {
        for (k, &n) in spec.n_grid.iter().enumerate() {
            let start = Instant::now();
            let cell = Cell { spec, variant, n };
            let per_iteration: Vec<Vec<Outcome>> = (0..spec.iterations)
                .into_par_iter()
                .map(|i| {
                    let stream = RngStream::new(spec.base_seed, spec.stream_id(v, k, i));
                    run_iteration(&cell, stream)
                })
                .collect::<Result<_>>()?;
            let theta = true_parameter(spec.id, variant);
            let wall = start.elapsed().as_secs_f64();
            rows.extend(aggregate(spec, variant, n, theta, &per_iteration, wall)?);
        }
    }
    Ok(ExperimentReport { spec: spec.clone(), rows })
}

fn check_id(spec: &ExperimentSpec, id: ExperimentId) -> Result<()> {
    if spec.id != id {
        return Err(Error::param(format!("expected a {id} spec, got {}", spec.id)));
    }
    Ok(())
}

/// Mid-range of three truncated normal laws with the full-n Hoeffding set and
/// the m-out-of-n (`m = round(sqrt(n))`) Hoeffding and percentile sets.
pub fn run_table2(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    check_id(spec, ExperimentId::Table2)?;
    execute(spec)
}

/// Discrete plug-in and mid-range of rounded truncated normals with both
/// U-extension Hoeffding sets.
pub fn run_table3(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    check_id(spec, ExperimentId::Table3)?;
    execute(spec)
}

/// Confounded binary treatment: OLS difference against the mid-range contrast.
pub fn run_table4(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    check_id(spec, ExperimentId::Table4)?;
    execute(spec)
}

/// Discrete analogue of table 4 with binomial errors.
pub fn run_table5(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    check_id(spec, ExperimentId::Table5)?;
    execute(spec)
}

/// OLS under U-class errors: t, U-concentration and pairs-bootstrap
/// Hoeffding sets.
pub fn run_table6(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    check_id(spec, ExperimentId::Table6)?;
    execute(spec)
}

pub fn true_parameter(id: ExperimentId, variant: Variant) -> f64 {
    match (id, variant) {
        (_, Variant::Law(s)) => 0.5 * (s.lower + s.upper),
        (ExperimentId::Table4, _) => 10.0,
        (ExperimentId::Table5, _) => 5.0,
        _ => 20.0,
    }
}

fn run_iteration(cell: &Cell<'_>, stream: RngStream) -> Result<Vec<Outcome>> {
    match (cell.spec.id, cell.variant) {
        (ExperimentId::Table2, Variant::Law(law)) => iterate_table2(cell, &law, stream),
        (ExperimentId::Table3, Variant::Law(law)) => iterate_table3(cell, &law, stream),
        (ExperimentId::Table4, Variant::NoiseScale(tau)) => iterate_table4(cell, tau, stream),
        (ExperimentId::Table5, Variant::Trials(tau)) => iterate_table5(cell, tau, stream),
        (ExperimentId::Table6, Variant::Baseline) => iterate_table6(cell, stream),
        _ => unreachable!("variants are checked in validate"),
    }
}

fn midrange_of(values: &[f64], idx: &[usize]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &i in idx {
        lo = lo.min(values[i]);
        hi = hi.max(values[i]);
    }
    0.5 * (lo + hi)
}

fn plugin_of(values: &[f64], idx: &[usize]) -> f64 {
    let picked: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    plugin_value(&picked, 0.0)
}

fn iterate_table2(cell: &Cell<'_>, law: &TruncatedNormalSpec, stream: RngStream) -> Result<Vec<Outcome>> {
    let (b, alpha) = (cell.spec.replicates, cell.spec.alpha);
    let y = sample_truncated_normal(law, cell.n, &mut stream.rng())?;
    let y = y.values();
    let t0 = midrange_value(y);
    let stat = |idx: &[usize]| Ok(midrange_of(y, idx));
    let sub =
        resample_indices(y.len(), t0, &BootstrapConfig::new(b, stream.derive(1)).with_size(ResampleSize::Sqrt), stat)?;
    let full = resample_indices(y.len(), t0, &BootstrapConfig::new(b, stream.derive(2)), stat)?;
    Ok(vec![
        Outcome::boot("midrange", "hoeffding-m", hoeffding_ci(&sub, alpha)?, &sub, alpha)?,
        Outcome::boot("midrange", "percentile-m", percentile_ci(&sub, alpha)?, &sub, alpha)?,
        Outcome::boot("midrange", "hoeffding", hoeffding_ci(&full, alpha)?, &full, alpha)?,
    ])
}

fn u_outcomes(estimator: &'static str, dist: &BootstrapDistribution, alpha: f64, out: &mut Vec<Outcome>) -> Result<()> {
    for factor in [UFactor::Improved, UFactor::General] {
        let ci = hoeffding_u_ci(dist, alpha, factor)?;
        out.push(Outcome::boot(estimator, factor.method().as_str(), ci, dist, alpha)?);
    }
    Ok(())
}

fn iterate_table3(cell: &Cell<'_>, law: &TruncatedNormalSpec, stream: RngStream) -> Result<Vec<Outcome>> {
    let (b, alpha) = (cell.spec.replicates, cell.spec.alpha);
    let y = round_to_integers(&sample_truncated_normal(law, cell.n, &mut stream.rng())?);
    let y = y.values();
    let plug = resample_indices(y.len(), plugin_value(y, 0.0), &BootstrapConfig::new(b, stream.derive(1)), |idx| {
        Ok(plugin_of(y, idx))
    })?;
    let mid = resample_indices(y.len(), midrange_value(y), &BootstrapConfig::new(b, stream.derive(2)), |idx| {
        Ok(midrange_of(y, idx))
    })?;
    let mut out = Vec::with_capacity(4);
    u_outcomes("plugin", &plug, alpha, &mut out)?;
    u_outcomes("midrange", &mid, alpha, &mut out)?;
    Ok(out)
}

/// Draws `T_i ~ Bern(p_i)` until each arm holds at least two units.
fn draw_treatment<R: Rng>(probs: &[f64], rng: &mut R) -> Vec<f64> {
    loop {
        let t: Vec<f64> = probs.iter().map(|&p| bernoulli_draw(p, rng)).collect();
        let treated = t.iter().filter(|&&v| v == 1.0).count();
        if treated >= 2 && t.len() - treated >= 2 {
            return t;
        }
    }
}

/// Regress `y` on an intercept and `t`; the slope is coefficient 1.
fn ols_on_treatment(y: &[f64], t: &[f64], alpha: f64) -> Result<(IntervalEstimate, RegressionFit)> {
    let x =
        DesignMatrix::from_columns(vec![INTERCEPT.to_string(), "t".to_string()], vec![vec![1.0; t.len()], t.to_vec()])?;
    let fit = ols_fit(&x, y)?;
    Ok((t_ci(&fit, 1, alpha)?, fit))
}

/// Confounder `C ~ Bern(1/2)` and treatment `T ~ Bern(0.3 + 0.5 C)`.
fn confounded_design<R: Rng>(n: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let c: Vec<f64> = (0..n).map(|_| bernoulli_draw(0.5, rng)).collect();
    let probs: Vec<f64> = c.iter().map(|&c| 0.3 + 0.5 * c).collect();
    let t = draw_treatment(&probs, rng);
    (c, t)
}

fn iterate_table4(cell: &Cell<'_>, tau: f64, stream: RngStream) -> Result<Vec<Outcome>> {
    let (n, b, alpha) = (cell.n, cell.spec.replicates, cell.spec.alpha);
    let mut rng = stream.rng();
    let noise = TruncatedNormalSpec::new(-50.0, 50.0, 0.0, tau)?;
    let e = sample_truncated_normal(&noise, n, &mut rng)?;
    let (c, t) = confounded_design(n, &mut rng);
    let y: Vec<f64> = (0..n).map(|i| 100.0 + 10.0 * t[i] + 50.0 * c[i] + e.values()[i]).collect();
    let (ols_ci, _) = ols_on_treatment(&y, &t, alpha)?;
    let arms = TwoArmSample::from_indicator(&y, &t)?;
    let dist = resample_two_arm(&arms, &BootstrapConfig::new(b, stream.derive(1)), |a, b| {
        Ok(midrange_value(a) - midrange_value(b))
    })?;
    Ok(vec![
        Outcome::plain("ols", "t", ols_ci),
        Outcome::boot("midrange", "hoeffding", hoeffding_ci(&dist, alpha)?, &dist, alpha)?,
    ])
}

fn iterate_table5(cell: &Cell<'_>, tau: u32, stream: RngStream) -> Result<Vec<Outcome>> {
    let (n, b, alpha) = (cell.n, cell.spec.replicates, cell.spec.alpha);
    let mut rng = stream.rng();
    let e = sample_binomial(&BinomialSpec::new(tau, 0.5)?, n, &mut rng)?;
    let (c, t) = confounded_design(n, &mut rng);
    let y: Vec<f64> = (0..n).map(|i| 10.0 * c[i] + e.values()[i] + 5.0 * t[i]).collect();
    let (ols_ci, _) = ols_on_treatment(&y, &t, alpha)?;
    let arms = TwoArmSample::from_indicator(&y, &t)?;
    let plug = resample_two_arm(&arms, &BootstrapConfig::new(b, stream.derive(1)), |a, b| {
        Ok(plugin_value(a, 0.0) - plugin_value(b, 0.0))
    })?;
    let mid = resample_two_arm(&arms, &BootstrapConfig::new(b, stream.derive(2)), |a, b| {
        Ok(midrange_value(a) - midrange_value(b))
    })?;
    let mut out = vec![Outcome::plain("ols", "t", ols_ci)];
    u_outcomes("plugin", &plug, alpha, &mut out)?;
    u_outcomes("midrange", &mid, alpha, &mut out)?;
    Ok(out)
}

/// Least-squares slope of `y` on `x` with an intercept, over rows `idx`.
fn slope_of(x: &[f64], y: &[f64], idx: &[usize]) -> Result<f64> {
    let m = idx.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &i in idx {
        sx += x[i];
        sy += y[i];
    }
    let (mx, my) = (sx / m, sy / m);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &i in idx {
        let dx = x[i] - mx;
        sxx += dx * dx;
        sxy += dx * (y[i] - my);
    }
    if sxx == 0.0 {
        return Err(Error::Singular { column: "t".to_string() });
    }
    Ok(sxy / sxx)
}

fn iterate_table6(cell: &Cell<'_>, stream: RngStream) -> Result<Vec<Outcome>> {
    let (n, b, alpha) = (cell.n, cell.spec.replicates, cell.spec.alpha);
    let mut rng = stream.rng();
    let u1 = sample_truncated_normal(&TruncatedNormalSpec::new(-10.0, 10.0, 0.0, 2.0)?, n, &mut rng)?;
    let t = draw_treatment(&vec![0.3; n], &mut rng);
    let y: Vec<f64> = (0..n).map(|i| 100.0 + 20.0 * t[i] + u1.values()[i]).collect();
    let (tci, fit) = ols_on_treatment(&y, &t, alpha)?;
    let uci = u_concentration_ci(&fit, 1, alpha)?;
    let dist = resample_indices(n, fit.coefficients[1], &BootstrapConfig::new(b, stream.derive(1)), |idx| {
        slope_of(&t, &y, idx)
    })?;
    Ok(vec![
        Outcome::plain("ols", "t", tci),
        Outcome::plain("ols", "u-concentration", uci),
        Outcome::boot("ols", "hoeffding", hoeffding_ci(&dist, alpha)?, &dist, alpha)?,
    ])
}

fn aggregate(
    spec: &ExperimentSpec,
    variant: Variant,
    n: usize,
    theta: f64,
    per_iteration: &[Vec<Outcome>],
    wall_seconds: f64,
) -> Result<Vec<ReportRow>> {
    let first = &per_iteration[0];
    let m = per_iteration.len() as f64;
    let mut rows = Vec::with_capacity(first.len());
    for (j, proto) in first.iter().enumerate() {
        let cis: Vec<IntervalEstimate> = per_iteration.iter().map(|it| it[j].ci).collect();
        let violations = per_iteration.iter().filter(|it| it[j].popoviciu_ok == Some(false)).count();
        rows.push(ReportRow {
            table: spec.id.as_str().to_string(),
            variant: variant.label(),
            n,
            estimator: proto.estimator.to_string(),
            method: proto.method.to_string(),
            theta,
            iterations: per_iteration.len(),
            mean_estimate: cis.iter().map(|c| c.point).sum::<f64>() / m,
            mean_lower: cis.iter().map(|c| c.lower).sum::<f64>() / m,
            mean_upper: cis.iter().map(|c| c.upper).sum::<f64>() / m,
            ec: empirical_coverage(&cis, theta)?,
            ep: empirical_power(&cis, 0.0)?,
            popoviciu_violations: violations,
            wall_seconds,
        });
    }
    Ok(rows)
}

/// Runs `spec` via the runner matching its id.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    match spec.id {
        ExperimentId::Table2 => run_table2(spec),
        ExperimentId::Table3 => run_table3(spec),
        ExperimentId::Table4 => run_table4(spec),
        ExperimentId::Table5 => run_table5(spec),
        ExperimentId::Table6 => run_table6(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bootstrap::IntervalMethod;

    fn ci(lower: f64, upper: f64) -> IntervalEstimate {
        IntervalEstimate { point: 0.5 * (lower + upper), lower, upper, alpha: 0.05, method: IntervalMethod::Hoeffding }
    }

    fn tiny(id: ExperimentId) -> ExperimentSpec {
        ExperimentSpec::desk(id, 11).with_n_grid(vec![40]).with_iterations(6).with_replicates(20)
    }

    #[test]
    fn coverage_and_power_examples() {
        let unit = vec![ci(0.0, 1.0); 4];
        assert_eq!(empirical_coverage(&unit, 0.5).unwrap(), 1.0);
        assert_eq!(empirical_coverage(&unit, 1.0).unwrap(), 1.0);
        assert_eq!(empirical_coverage(&[ci(0.0, 1.0), ci(2.0, 3.0)], 0.5).unwrap(), 0.5);
        assert_eq!(empirical_power(&[ci(1.0, 2.0); 3], 0.0).unwrap(), 1.0);
        assert_eq!(empirical_power(&[ci(-1.0, 1.0); 3], 0.0).unwrap(), 0.0);
        assert!(empirical_coverage(&[], 0.0).is_err());
        assert!(empirical_power(&[], 0.0).is_err());
    }

    #[test]
    fn power_complements_coverage() {
        let cis: Vec<IntervalEstimate> = (0..37).map(|k| ci(k as f64 * 0.1, k as f64 * 0.1 + 1.3)).collect();
        for theta in [-1.0, 0.0, 0.7, 1.3, 2.05, 5.0] {
            let ec = empirical_coverage(&cis, theta).unwrap();
            let ep = empirical_power(&cis, theta).unwrap();
            assert_eq!((ec * 37.0).round() + (ep * 37.0).round(), 37.0);
            assert!((ec + ep - 1.0).abs() <= f64::EPSILON);
        }
    }

    #[test]
    fn ids_parse_and_number() {
        assert_eq!("table4".parse::<ExperimentId>().unwrap(), ExperimentId::Table4);
        assert_eq!("6".parse::<ExperimentId>().unwrap(), ExperimentId::Table6);
        assert!("7".parse::<ExperimentId>().is_err());
        assert!("tableX".parse::<ExperimentId>().is_err());
        for id in ExperimentId::ALL {
            assert_eq!(ExperimentId::from_number(id.number()).unwrap(), id);
        }
    }

    #[test]
    fn profiles() {
        let full = ExperimentSpec::full(ExperimentId::Table2, 1);
        assert_eq!(full.n_grid, vec![500, 2500, 5000, 10000]);
        assert_eq!((full.iterations, full.replicates), (1000, 500));
        let desk = ExperimentSpec::desk(ExperimentId::Table5, 1);
        assert_eq!(desk.n_grid, vec![500, 2500]);
        assert_eq!((desk.iterations, desk.replicates, desk.alpha), (200, 500, 0.05));
        assert_eq!(desk.variants, vec![Variant::Trials(30), Variant::Trials(50)]);
    }

    #[test]
    fn validation() {
        let base = ExperimentSpec::desk(ExperimentId::Table4, 1);
        assert!(base.validate().is_ok());
        assert!(base.clone().with_iterations(0).validate().is_err());
        assert!(base.clone().with_replicates(0).validate().is_err());
        assert!(base.clone().with_n_grid(vec![]).validate().is_err());
        assert!(base.clone().with_alpha(1.0).validate().is_err());
        assert!(base.clone().with_variants(vec![Variant::Trials(30)]).validate().is_err());
        assert!(base.clone().with_variants(vec![Variant::NoiseScale(-1.0)]).validate().is_err());
        assert!(ExperimentSpec::desk(ExperimentId::Table5, 1)
            .with_variants(vec![Variant::Trials(4)])
            .validate()
            .is_err());
        assert!(run_table3(&base).is_err());
    }

    #[test]
    fn stream_ids_are_unique_across_tables() {
        let specs: Vec<ExperimentSpec> = ExperimentId::ALL.iter().map(|&id| ExperimentSpec::full(id, 5)).collect();
        audit_streams(&specs).unwrap();
        let total: usize = specs.iter().map(|s| s.stream_ids().len()).sum();
        assert_eq!(total, (3 + 3 + 2 + 2 + 1) * 4 * 1000);
        let dup = vec![specs[0].clone(), specs[0].clone()];
        assert!(audit_streams(&dup).is_err());
    }

    #[test]
    fn every_table_runs_and_is_deterministic() {
        for id in ExperimentId::ALL {
            let spec = tiny(id);
            let a = run(&spec).unwrap();
            let b = run(&spec).unwrap();
            let strip = |r: &ExperimentReport| {
                let mut buf = Vec::new();
                r.write_csv(&mut buf).unwrap();
                buf
            };
            assert_eq!(strip(&a), strip(&b), "{id}");
            assert_eq!(a.to_text(), b.to_text());
            for row in &a.rows {
                assert!((0.0..=1.0).contains(&row.ec) && (0.0..=1.0).contains(&row.ep));
                assert!(row.mean_estimate.is_finite() && row.mean_lower <= row.mean_upper);
                assert_eq!(row.popoviciu_violations, 0);
                assert_eq!(row.iterations, 6);
            }
        }
    }

    #[test]
    fn row_layout() {
        let methods = |id| {
            let r = run(&tiny(id).with_variants(id.default_variants()[..1].to_vec())).unwrap();
            r.rows.iter().map(|r| format!("{}/{}", r.estimator, r.method)).collect::<Vec<_>>()
        };
        assert_eq!(
            methods(ExperimentId::Table2),
            ["midrange/hoeffding-m", "midrange/percentile-m", "midrange/hoeffding"]
        );
        assert_eq!(
            methods(ExperimentId::Table3),
            ["plugin/hoeffding-u", "plugin/hoeffding-u2", "midrange/hoeffding-u", "midrange/hoeffding-u2"]
        );
        assert_eq!(methods(ExperimentId::Table4), ["ols/t", "midrange/hoeffding"]);
        assert_eq!(methods(ExperimentId::Table6), ["ols/t", "ols/u-concentration", "ols/hoeffding"]);
    }

    #[test]
    fn seed_changes_results() {
        let a = run(&tiny(ExperimentId::Table2)).unwrap();
        let mut other = tiny(ExperimentId::Table2);
        other.base_seed = 12;
        let b = run(&other).unwrap();
        assert_ne!(a.rows[0].mean_estimate, b.rows[0].mean_estimate);
    }

    #[test]
    fn csv_round_trips() {
        let r = run(&tiny(ExperimentId::Table5)).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let back = ExperimentReport::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), r.rows.len());
        for (x, y) in back.iter().zip(&r.rows) {
            assert_eq!(ReportRow { wall_seconds: 0.0, ..y.clone() }, *x);
        }
    }

    #[test]
    fn text_is_aligned() {
        let text = run(&tiny(ExperimentId::Table4)).unwrap().to_text();
        let lines: Vec<&str> = text.lines().skip(1).collect();
        let rule = lines[1].len();
        assert!(lines[1].chars().all(|c| c == '-'));
        assert!(lines.iter().filter(|l| !l.starts_with('-')).all(|l| l.len() <= rule));
        assert_eq!(lines.len(), 2 + 4);
    }

    #[test]
    fn true_parameters() {
        let t2 = ExperimentId::Table2.default_variants();
        assert_eq!(true_parameter(ExperimentId::Table2, t2[0]), 10.0);
        assert_eq!(true_parameter(ExperimentId::Table2, t2[1]), 7.5);
        for v in ExperimentId::Table3.default_variants() {
            assert_eq!(true_parameter(ExperimentId::Table3, v), 20.0);
        }
        assert_eq!(true_parameter(ExperimentId::Table4, Variant::NoiseScale(5.0)), 10.0);
        assert_eq!(true_parameter(ExperimentId::Table5, Variant::Trials(30)), 5.0);
        assert_eq!(true_parameter(ExperimentId::Table6, Variant::Baseline), 20.0);
    }

    #[test]
    fn slope_matches_ols() {
        let t = [0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let y = [1.0, 4.0, 2.0, 5.5, 3.5, 0.5];
        let (_, fit) = ols_on_treatment(&y, &t, 0.05).unwrap();
        let idx: Vec<usize> = (0..6).collect();
        assert!((slope_of(&t, &y, &idx).unwrap() - fit.coefficients[1]).abs() < 1e-12);
        assert!(slope_of(&t, &y, &[1, 3, 4]).is_err());
    }

    #[test]
    fn arms_hold_two_units() {
        let mut rng = RngStream::new(3, 0).rng();
        for _ in 0..200 {
            let t = draw_treatment(&[0.3; 5], &mut rng);
            let treated = t.iter().filter(|&&v| v == 1.0).count();
            assert!((2..=3).contains(&treated));
        }
    }
}
