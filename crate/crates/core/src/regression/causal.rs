//! Marginal contrasts from fitted outcome models: standardization, its
//! pairs-bootstrap interval, and propensity-score stratified adjustment.

use rayon::prelude::*;

use super::design::{ModelSpec, Term};
use super::logistic::{logistic_fit, propensity_strata};
use super::ols::{ols_fit, RegressionFit};
use crate::bootstrap::{check_alpha, draw_indices, percentile_ci, BootstrapDistribution, IntervalEstimate};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, PointEstimate};
use crate::rng::RngStream;

/// Share of failed bootstrap refits tolerated before giving up.
const MAX_FAILURE_SHARE: f64 = 0.05;
const PS_STRATA: usize = 5;

/// Outcome model plus the treatment levels being contrasted.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationSpec {
    pub model: ModelSpec,
    pub treatment: String,
    pub high: f64,
    pub low: f64,
}

impl StandardizationSpec {
    /// Contrast of treatment level 1 against 0.
    pub fn binary(model: ModelSpec, treatment: impl Into<String>) -> Self {
        Self { model, treatment: treatment.into(), high: 1.0, low: 0.0 }
    }
}

/// Mean over rows of the prediction at `high` minus the prediction at `low`.
pub fn standardization_contrast(
    fit: &RegressionFit,
    data: &Dataset,
    spec: &StandardizationSpec,
) -> Result<PointEstimate> {
    data.column(&spec.treatment)?;
    if !spec.model.mentions(&spec.treatment) {
        return Err(Error::input(format!("model `{}` does not use treatment `{}`", spec.model, spec.treatment)));
    }
    let high = spec.model.design(&data.with_constant(&spec.treatment, spec.high)?)?;
    let low = spec.model.design(&data.with_constant(&spec.treatment, spec.low)?)?;
    if high.n_cols() != fit.p() {
        return Err(Error::input("fit does not match the model design"));
    }
    let ph = high.apply(&fit.coefficients);
    let pl = low.apply(&fit.coefficients);
    let value = ph.iter().zip(&pl).map(|(a, b)| a - b).sum::<f64>() / ph.len() as f64;
    Ok(PointEstimate { value, estimator: EstimatorKind::Mean })
}

fn fit_and_standardize(data: &Dataset, spec: &StandardizationSpec) -> Result<f64> {
    let fit = ols_fit(&spec.model.design(data)?, spec.model.response(data)?)?;
    Ok(standardization_contrast(&fit, data, spec)?.value)
}

/// Pairs bootstrap: resample rows, rerun `pipeline`, collect the contrasts.
/// Failed refits are skipped unless they exceed 5% of the replicates.
fn row_bootstrap<F>(
    data: &Dataset,
    replicates: usize,
    rng: RngStream,
    original: f64,
    pipeline: F,
) -> Result<BootstrapDistribution>
where
    F: Fn(&Dataset) -> Result<f64> + Sync,
{
    if replicates == 0 {
        return Err(Error::param("bootstrap needs at least one replicate"));
    }
    let n = data.n_rows();
    let results: Vec<Option<f64>> = (0..replicates)
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(n), Vec::new()),
            |(idx, pool), k| {
                let mut r = rng.derive(k as u64).rng();
                draw_indices(n, n, true, &mut r, idx, pool);
                pipeline(&data.select_rows(idx)).ok().filter(|v| v.is_finite())
            },
        )
        .collect();
    let failed = results.iter().filter(|r| r.is_none()).count();
    if failed as f64 > MAX_FAILURE_SHARE * replicates as f64 || failed == replicates {
        return Err(Error::TooManyFailures { failed, total: replicates });
    }
    BootstrapDistribution::new(original, results.into_iter().flatten().collect())
}

/// Standardization contrast with a percentile interval over `replicates`
/// pairs-bootstrap refits.
pub fn standardization_bootstrap(
    data: &Dataset,
    spec: &StandardizationSpec,
    replicates: usize,
    rng: RngStream,
    alpha: f64,
) -> Result<IntervalEstimate> {
    check_alpha(alpha)?;
    let original = fit_and_standardize(data, spec)?;
    let dist = row_bootstrap(data, replicates, rng, original, |d| fit_and_standardize(d, spec))?;
    percentile_ci(&dist, alpha)
}

/// Fit the propensity model, cut its scores into quintile strata, regress the
/// outcome on treatment plus stratum indicators, and standardize.
pub fn ps_stratified_point(data: &Dataset, outcome: &str, treatment: &str, covariates: &[&str]) -> Result<f64> {
    let ps_model = ModelSpec::new(treatment, covariates.iter().map(|c| Term::Column(c.to_string())).collect());
    let ps = logistic_fit(&ps_model.design(data)?, data.column(treatment)?)?;
    let strata = propensity_strata(&ps.probabilities, PS_STRATA)?;
    let mut augmented = data.clone();
    let mut terms = vec![Term::Column(treatment.to_string())];
    for s in 2..=PS_STRATA {
        let name = format!("__ps_stratum{s}");
        let dummy = strata.strata.iter().map(|&k| if k == s { 1.0 } else { 0.0 }).collect();
        augmented = augmented.with_column(&name, dummy)?;
        terms.push(Term::Column(name));
    }
    let spec = StandardizationSpec::binary(ModelSpec::new(outcome, terms), treatment);
    fit_and_standardize(&augmented, &spec)
}

pub fn ps_stratified_contrast(
    data: &Dataset,
    outcome: &str,
    treatment: &str,
    covariates: &[&str],
    replicates: usize,
    rng: RngStream,
    alpha: f64,
) -> Result<IntervalEstimate> {
    check_alpha(alpha)?;
    let original = ps_stratified_point(data, outcome, treatment, covariates)?;
    let dist =
        row_bootstrap(data, replicates, rng, original, |d| ps_stratified_point(d, outcome, treatment, covariates))?;
    percentile_ci(&dist, alpha)
}
