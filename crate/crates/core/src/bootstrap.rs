//! Resampling engines and the confidence sets built on them.
//!
//! The Hoeffding bootstrap reports `T0 ± range · sqrt(ln(2/α) / 2)`, where the
//! range is taken over the replicate statistics together with `T0` itself.
//! The U-class extension doubles the replicate range and optionally tightens
//! the constant to `sqrt(ln(2/α) / 6)`. The m-out-of-n percentile interval is
//! provided as the conventional baseline.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sample::{Sample, TwoArmSample};
use crate::stats::{min_max, quantile_sorted, round_half_away, sort_floats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResampleSize {
    Full,
    /// `round(sqrt(n))`, ties away from zero.
    Sqrt,
    Fixed(usize),
}

impl ResampleSize {
    pub fn resolve(&self, n: usize) -> Result<usize> {
        let m = match *self {
            ResampleSize::Full => n,
            ResampleSize::Sqrt => round_half_away((n as f64).sqrt()) as usize,
            ResampleSize::Fixed(m) => m,
        };
        if m == 0 || m > n {
            return Err(Error::param(format!("resample size {m} must lie in 1..={n}")));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub size: ResampleSize,
    pub with_replacement: bool,
    pub rng: RngStream,
}

impl BootstrapConfig {
    /// Full-size resampling with replacement.
    pub fn new(replicates: usize, rng: RngStream) -> Self {
        Self { replicates, size: ResampleSize::Full, with_replacement: true, rng }
    }

    pub fn with_size(mut self, size: ResampleSize) -> Self {
        self.size = size;
        self
    }

    pub fn without_replacement(mut self) -> Self {
        self.with_replacement = false;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::param("bootstrap needs at least one replicate"));
        }
        Ok(())
    }
}

/// The original statistic `T0` and its `B` replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDistribution {
    pub original: f64,
    pub replicates: Vec<f64>,
}

impl BootstrapDistribution {
    pub fn new(original: f64, replicates: Vec<f64>) -> Result<Self> {
        if replicates.is_empty() {
            return Err(Error::input("bootstrap distribution has no replicates"));
        }
        if !original.is_finite() || replicates.iter().any(|r| !r.is_finite()) {
            return Err(Error::input("bootstrap statistics must be finite"));
        }
        Ok(Self { original, replicates })
    }

    /// `max - min` over the replicates and `T0` together.
    pub fn range_with_original(&self) -> f64 {
        let (lo, hi) = min_max(&self.replicates);
        hi.max(self.original) - lo.min(self.original)
    }

    /// `max - min` over the replicates only.
    pub fn replicate_range(&self) -> f64 {
        let (lo, hi) = min_max(&self.replicates);
        hi - lo
    }

    /// Replicate range over growing prefixes of the replicate list, for
    /// judging whether `B` is large enough for the extremes to settle.
    pub fn range_profile(&self, prefixes: &[usize]) -> Vec<(usize, f64)> {
        prefixes
            .iter()
            .filter(|&&k| k >= 1 && k <= self.replicates.len())
            .map(|&k| {
                let (lo, hi) = min_max(&self.replicates[..k]);
                (k, hi - lo)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalMethod {
    Hoeffding,
    /// Doubled replicate range with the `sqrt(1/6)` constant.
    HoeffdingU,
    /// Doubled replicate range with the `sqrt(1/2)` constant.
    HoeffdingU2,
    Percentile,
    TDist,
    UConcentration,
}

impl IntervalMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            IntervalMethod::Hoeffding => "hoeffding",
            IntervalMethod::HoeffdingU => "hoeffding-u",
            IntervalMethod::HoeffdingU2 => "hoeffding-u2",
            IntervalMethod::Percentile => "percentile",
            IntervalMethod::TDist => "t-dist",
            IntervalMethod::UConcentration => "u-concentration",
        }
    }
}

impl std::fmt::Display for IntervalMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub method: IntervalMethod,
}

impl IntervalEstimate {
    /// Closed-interval membership.
    pub fn contains(&self, theta: f64) -> bool {
        self.lower <= theta && theta <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub(crate) fn symmetric(point: f64, half_width: f64, alpha: f64, method: IntervalMethod) -> Self {
        Self { point, lower: point - half_width, upper: point + half_width, alpha, method }
    }
}

/// Constant of the U-class extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UFactor {
    /// `sqrt(ln(2/α) / 2)`
    General,
    /// `sqrt(ln(2/α) / 6)`
    Improved,
}

impl UFactor {
    fn divisor(&self) -> f64 {
        match self {
            UFactor::General => 2.0,
            UFactor::Improved => 6.0,
        }
    }

    pub fn method(&self) -> IntervalMethod {
        match self {
            UFactor::General => IntervalMethod::HoeffdingU2,
            UFactor::Improved => IntervalMethod::HoeffdingU,
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// `sqrt(ln(2/α) / divisor)`
pub fn concentration_multiplier(alpha: f64, divisor: f64) -> f64 {
    ((2.0 / alpha).ln() / divisor).sqrt()
}

/// `sqrt(ln(2/α) / 2)`, ≈ 1.3581 at α = 0.05.
pub fn hoeffding_multiplier(alpha: f64) -> f64 {
    concentration_multiplier(alpha, 2.0)
}

/// Core engine: draws `B` index sets of the configured size from `0..n` and
/// evaluates `statistic` on each. Replicate `k` uses the stream
/// `config.rng.derive(k)`, so the output is independent of evaluation order.
pub fn resample_indices<F>(
    n: usize,
    original: f64,
    config: &BootstrapConfig,
    statistic: F,
) -> Result<BootstrapDistribution>
where
    F: Fn(&[usize]) -> Result<f64> + Sync,
{
    config.validate()?;
    if n == 0 {
        return Err(Error::input("cannot resample an empty sample"));
    }
    let m = config.size.resolve(n)?;
    let results: Vec<Result<f64>> = (0..config.replicates)
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(m), Vec::new()),
            |(idx, pool), k| {
                let mut rng = config.rng.derive(k as u64).rng();
                draw_indices(n, m, config.with_replacement, &mut rng, idx, pool);
                statistic(idx).map_err(|e| Error::Replicate { index: k, source: Box::new(e) })
            },
        )
        .collect();
    let replicates = results.into_iter().collect::<Result<Vec<f64>>>()?;
    BootstrapDistribution::new(original, replicates)
}

pub(crate) fn draw_indices<R: Rng>(
    n: usize,
    m: usize,
    with_replacement: bool,
    rng: &mut R,
    out: &mut Vec<usize>,
    pool: &mut Vec<usize>,
) {
    out.clear();
    if with_replacement {
        out.extend((0..m).map(|_| rng.random_range(0..n)));
    } else {
        pool.clear();
        pool.extend(0..n);
        for i in 0..m {
            let j = rng.random_range(i..n);
            pool.swap(i, j);
        }
        out.extend_from_slice(&pool[..m]);
    }
}

/// Bootstrap a statistic of a single sample.
pub fn resample<F>(s: &Sample, config: &BootstrapConfig, statistic: F) -> Result<BootstrapDistribution>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let values = s.values();
    let original = statistic(values)?;
    resample_indices(values.len(), original, config, |idx| {
        let buf: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        statistic(&buf)
    })
}

/// Bootstrap a two-arm statistic, resampling within each arm so arm sizes
/// stay fixed. The size rule is applied to each arm separately.
pub fn resample_two_arm<F>(two: &TwoArmSample, config: &BootstrapConfig, statistic: F) -> Result<BootstrapDistribution>
where
    F: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
{
    config.validate()?;
    let (treated, control) = (two.treated.values(), two.control.values());
    let original = statistic(treated, control)?;
    let m1 = config.size.resolve(treated.len())?;
    let m0 = config.size.resolve(control.len())?;
    let results: Vec<Result<f64>> = (0..config.replicates)
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new(), Vec::new(), Vec::new()),
            |(idx, pool, b1, b0), k| {
                let mut rng = config.rng.derive(k as u64).rng();
                draw_indices(treated.len(), m1, config.with_replacement, &mut rng, idx, pool);
                b1.clear();
                b1.extend(idx.iter().map(|&i| treated[i]));
                draw_indices(control.len(), m0, config.with_replacement, &mut rng, idx, pool);
                b0.clear();
                b0.extend(idx.iter().map(|&i| control[i]));
                statistic(b1, b0).map_err(|e| Error::Replicate { index: k, source: Box::new(e) })
            },
        )
        .collect();
    let replicates = results.into_iter().collect::<Result<Vec<f64>>>()?;
    BootstrapDistribution::new(original, replicates)
}

/// `T0 ± (max − min) · sqrt(ln(2/α)/2)`, max/min over `{T0, T1, …, TB}`.
pub fn hoeffding_ci(dist: &BootstrapDistribution, alpha: f64) -> Result<IntervalEstimate> {
    check_alpha(alpha)?;
    let half = dist.range_with_original() * hoeffding_multiplier(alpha);
    Ok(IntervalEstimate::symmetric(dist.original, half, alpha, IntervalMethod::Hoeffding))
}

/// `T0 ± 2 · (T(B) − T(1)) · sqrt(ln(2/α)/c)` with `c = 2` or `c = 6`.
pub fn hoeffding_u_ci(dist: &BootstrapDistribution, alpha: f64, factor: UFactor) -> Result<IntervalEstimate> {
    check_alpha(alpha)?;
    let half = 2.0 * dist.replicate_range() * concentration_multiplier(alpha, factor.divisor());
    Ok(IntervalEstimate::symmetric(dist.original, half, alpha, factor.method()))
}

/// Empirical `(α/2, 1 − α/2)` quantiles of the replicates (type 7).
pub fn percentile_ci(dist: &BootstrapDistribution, alpha: f64) -> Result<IntervalEstimate> {
    check_alpha(alpha)?;
    let mut sorted = dist.replicates.clone();
    sort_floats(&mut sorted);
    Ok(IntervalEstimate {
        point: dist.original,
        lower: quantile_sorted(&sorted, alpha / 2.0),
        upper: quantile_sorted(&sorted, 1.0 - alpha / 2.0),
        alpha,
        method: IntervalMethod::Percentile,
    })
}

/// Percentile interval from `B` resamples of size `round(sqrt(n))`, drawn
/// with replacement.
pub fn m_out_of_n_percentile_ci<F>(
    s: &Sample,
    statistic: F,
    alpha: f64,
    replicates: usize,
    rng: RngStream,
) -> Result<IntervalEstimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if s.len() < 4 {
        return Err(Error::input("m-out-of-n bootstrap needs n >= 4"));
    }
    let config = BootstrapConfig::new(replicates, rng).with_size(ResampleSize::Sqrt);
    percentile_ci(&resample(s, &config, statistic)?, alpha)
}

/// Checks `z(1−α/2) · sd ≤ (max − min) · sqrt(ln(2/α)/2)` on the replicates,
/// with the population standard deviation. Popoviciu's inequality makes this
/// hold for every distribution; a `false` signals corrupted replicates.
pub fn popoviciu_check(dist: &BootstrapDistribution, alpha: f64) -> Result<bool> {
    check_alpha(alpha)?;
    let reps = &dist.replicates;
    if reps.len() < 2 {
        return Err(Error::input("Popoviciu check needs at least two replicates"));
    }
    let n = reps.len() as f64;
    let mean = reps.iter().sum::<f64>() / n;
    let sd = (reps.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let bound = dist.replicate_range() * hoeffding_multiplier(alpha);
    // slack for the rounding in sd when all replicates are equal
    Ok(z * sd <= bound + 8.0 * f64::EPSILON * bound.abs().max(sd))
}
