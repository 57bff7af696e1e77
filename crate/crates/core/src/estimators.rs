//! Point estimators of the functional average and of arm contrasts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{Sample, TwoArmSample};
use crate::stats::{mean, min_max, sort_floats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Mean of the distinct observed values.
    Plugin,
    Midrange,
    Mean,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Plugin => "plugin",
            EstimatorKind::Midrange => "midrange",
            EstimatorKind::Mean => "mean",
        }
    }

    /// Evaluate this estimator on raw values with exact distinctness.
    pub fn apply(&self, values: &[f64]) -> Result<f64> {
        if values.is_empty() {
            return Err(Error::input("estimator applied to an empty sample"));
        }
        Ok(match self {
            EstimatorKind::Plugin => plugin_value(values, 0.0),
            EstimatorKind::Midrange => midrange_value(values),
            EstimatorKind::Mean => mean(values),
        })
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub value: f64,
    pub estimator: EstimatorKind,
}

/// Discrete plug-in estimate: the arithmetic mean of the distinct values.
///
/// With `tolerance == 0` values are distinct when unequal. A positive
/// tolerance merges sorted neighbours closer than `tolerance` into one value
/// (their mean) before averaging.
pub fn discrete_plugin_av(s: &Sample, tolerance: f64) -> Result<PointEstimate> {
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(Error::param(format!("uniqueness tolerance must be non-negative, got {tolerance}")));
    }
    Ok(PointEstimate { value: plugin_value(s.values(), tolerance), estimator: EstimatorKind::Plugin })
}

pub fn midrange(s: &Sample) -> PointEstimate {
    PointEstimate { value: midrange_value(s.values()), estimator: EstimatorKind::Midrange }
}

pub fn sample_mean(s: &Sample) -> PointEstimate {
    PointEstimate { value: mean(s.values()), estimator: EstimatorKind::Mean }
}

/// Treated-minus-control contrast of `estimator`.
pub fn delta(two: &TwoArmSample, estimator: EstimatorKind) -> Result<PointEstimate> {
    let value = estimator.apply(two.treated.values())? - estimator.apply(two.control.values())?;
    Ok(PointEstimate { value, estimator })
}

pub(crate) fn midrange_value(values: &[f64]) -> f64 {
    let (lo, hi) = min_max(values);
    0.5 * (lo + hi)
}

/// Largest integer span handled with a presence bitmap instead of a sort.
const BITMAP_SPAN: f64 = 65_536.0;

pub(crate) fn plugin_value(values: &[f64], tolerance: f64) -> f64 {
    if tolerance == 0.0 {
        if let Some(v) = plugin_integer_bitmap(values) {
            return v;
        }
    }
    let mut sorted = values.to_vec();
    sort_floats(&mut sorted);
    let mut total = 0.0;
    let mut groups = 0usize;
    let mut group_sum = sorted[0];
    let mut group_len = 1usize;
    for w in sorted.windows(2) {
        if w[1] - w[0] > tolerance {
            total += group_sum / group_len as f64;
            groups += 1;
            group_sum = 0.0;
            group_len = 0;
        }
        group_sum += w[1];
        group_len += 1;
    }
    total += group_sum / group_len as f64;
    groups += 1;
    total / groups as f64
}

/// Integer-coded data over a modest range: mark presence, then average.
fn plugin_integer_bitmap(values: &[f64]) -> Option<f64> {
    let (lo, hi) = min_max(values);
    if hi - lo >= BITMAP_SPAN || values.iter().any(|v| v.fract() != 0.0) {
        return None;
    }
    let span = (hi - lo) as usize + 1;
    let mut seen = vec![false; span];
    for &v in values {
        seen[(v - lo) as usize] = true;
    }
    let (sum, count) =
        seen.iter().enumerate().filter(|(_, &s)| s).fold((0.0, 0usize), |(sum, c), (k, _)| (sum + k as f64, c + 1));
    Some(lo + sum / count as f64)
}
