//! Empirical checks of U-class plausibility: ECDF sum-symmetry, the distance
//! between mean and mid-range, and symmetry of the residual support.
//!
//! All checks return raw numbers. Thresholds are left to the caller.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Sample;
use crate::stats::{mean, min_max, sort_floats};

/// Right-continuous empirical CDF stored at its jump points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfCurve {
    /// Sorted distinct values.
    pub values: Vec<f64>,
    /// `F̂` at each value; non-decreasing, last entry 1.
    pub heights: Vec<f64>,
    pub n: usize,
}

impl EcdfCurve {
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v <= x);
        if k == 0 {
            0.0
        } else {
            self.heights[k - 1]
        }
    }

    /// `(y, F̂(y))` at every jump, for external plotting.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.heights.iter().copied())
    }

    /// `∫F̂` and `∫(1 − F̂)` over `[min, max]`.
    pub fn areas(&self) -> (f64, f64) {
        let mut below = 0.0;
        let mut above = 0.0;
        for (j, w) in self.values.windows(2).enumerate() {
            let d = w[1] - w[0];
            below += self.heights[j] * d;
            above += (1.0 - self.heights[j]) * d;
        }
        (below, above)
    }
}

pub fn ecdf(s: &Sample) -> EcdfCurve {
    let mut sorted = s.values().to_vec();
    sort_floats(&mut sorted);
    let n = sorted.len();
    let mut values = Vec::new();
    let mut heights = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        if i + 1 == n || sorted[i + 1] != v {
            values.push(v);
            heights.push((i + 1) as f64 / n as f64);
        }
    }
    EcdfCurve { values, heights, n }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumSymmetry {
    pub area_below: f64,
    pub area_above: f64,
    /// `area_below − area_above`; zero under sum-symmetry.
    pub gap: f64,
    /// `gap` divided by the observed range.
    pub normalized_gap: f64,
}

/// Areas below and above the ECDF over the observed range.
pub fn sum_symmetry(s: &Sample) -> Result<SumSymmetry> {
    if s.len() < 2 {
        return Err(Error::input("sum-symmetry needs at least two observations"));
    }
    let curve = ecdf(s);
    if curve.values.len() < 2 {
        return Err(Error::input("sum-symmetry needs a non-degenerate observed range"));
    }
    let (below, above) = curve.areas();
    let range = curve.values[curve.values.len() - 1] - curve.values[0];
    let gap = below - above;
    Ok(SumSymmetry { area_below: below, area_above: above, gap, normalized_gap: gap / range })
}

pub fn sum_symmetry_gap(s: &Sample) -> Result<f64> {
    Ok(sum_symmetry(s)?.gap)
}

/// `|mean − midrange|`
pub fn mean_midrange_distance(s: &Sample) -> f64 {
    let (lo, hi) = min_max(s.values());
    (mean(s.values()) - 0.5 * (lo + hi)).abs()
}

/// `|mean − midrange| / (max − min)`, zero for a constant sample.
pub fn normalized_mean_midrange_distance(s: &Sample) -> f64 {
    let (lo, hi) = min_max(s.values());
    if hi > lo {
        mean_midrange_distance(s) / (hi - lo)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportSymmetry {
    pub max: f64,
    pub min: f64,
    /// `|max + min| / (max − min)`
    pub asymmetry: f64,
}

pub fn residual_support_symmetry(residuals: &Sample) -> Result<SupportSymmetry> {
    if residuals.len() < 2 {
        return Err(Error::input("support symmetry needs at least two residuals"));
    }
    let (min, max) = min_max(residuals.values());
    if max <= min {
        return Err(Error::input("residuals are all equal"));
    }
    Ok(SupportSymmetry { max, min, asymmetry: (max + min).abs() / (max - min) })
}
