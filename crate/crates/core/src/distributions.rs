//! Generators for the simulation studies and closed-form functional averages
//! of regular (interval-supported) laws.
//!
//! Truncated normals are drawn by inverse-CDF transform. The interval is
//! reflected into the lower half-line before inverting so the normal CDF is
//! always evaluated where `erfc` keeps full relative precision.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::sample::Sample;
use crate::stats::round_half_away;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedNormalSpec {
    pub lower: f64,
    pub upper: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl TruncatedNormalSpec {
    pub fn new(lower: f64, upper: f64, mu: f64, sigma: f64) -> Result<Self> {
        let spec = Self { lower, upper, mu, sigma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.mu.is_finite()) {
            return Err(Error::param("truncated normal bounds and location must be finite"));
        }
        if self.lower >= self.upper {
            return Err(Error::param(format!(
                "truncated normal requires lower < upper, got [{}, {}]",
                self.lower, self.upper
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::param(format!("truncated normal sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    /// CDF of the truncated law.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lower {
            return 0.0;
        }
        if x >= self.upper {
            return 1.0;
        }
        let a = (self.lower - self.mu) / self.sigma;
        let b = (self.upper - self.mu) / self.sigma;
        let z = (x - self.mu) / self.sigma;
        if a + b > 0.0 {
            // upper-tail form: 1 - (S(z) - S(b)) / (S(a) - S(b))
            let (sa, sb, sz) = (std_normal_sf(a), std_normal_sf(b), std_normal_sf(z));
            1.0 - (sz - sb) / (sa - sb)
        } else {
            let (pa, pb, pz) = (std_normal_cdf(a), std_normal_cdf(b), std_normal_cdf(z));
            (pz - pa) / (pb - pa)
        }
    }

    /// Map a uniform `u` in `[0, 1)` to a draw from the truncated law.
    pub fn quantile(&self, u: f64) -> f64 {
        let a = (self.lower - self.mu) / self.sigma;
        let b = (self.upper - self.mu) / self.sigma;
        let z = if a + b > 0.0 { -std_truncated_quantile(-b, -a, 1.0 - u) } else { std_truncated_quantile(a, b, u) };
        (self.mu + self.sigma * z).clamp(self.lower, self.upper)
    }
}

/// Quantile of the standard normal truncated to `[a, b]` with `a + b <= 0`.
fn std_truncated_quantile(a: f64, b: f64, u: f64) -> f64 {
    let pa = std_normal_cdf(a);
    let pb = std_normal_cdf(b);
    let mass = pb - pa;
    if mass.is_nan() || mass <= 0.0 {
        // Both bounds sit beyond ~38 sd, where the normal CDF underflows.
        return a + u * (b - a);
    }
    std_normal_quantile(pa + u * mass).clamp(a, b)
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn std_normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernoulliSpec {
    pub p: f64,
}

impl BernoulliSpec {
    pub fn new(p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(Self { p })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialSpec {
    pub trials: u32,
    pub p: f64,
}

impl BinomialSpec {
    pub fn new(trials: u32, p: f64) -> Result<Self> {
        if trials < 1 {
            return Err(Error::param("binomial requires at least one trial"));
        }
        check_probability(p)?;
        Ok(Self { trials, p })
    }

    /// Cumulative probabilities `P(X <= k)` for `k = 0..=trials`; the last
    /// entry is pinned to exactly 1.
    fn cdf_table(&self) -> Vec<f64> {
        let t = self.trials as usize;
        let mut cdf = vec![0.0; t + 1];
        if self.p == 0.0 {
            cdf.iter_mut().for_each(|c| *c = 1.0);
            return cdf;
        }
        if self.p == 1.0 {
            cdf[t] = 1.0;
            return cdf;
        }
        let odds = self.p / (1.0 - self.p);
        let mut pmf = (1.0 - self.p).powi(self.trials as i32);
        let mut acc = 0.0;
        for (k, c) in cdf.iter_mut().enumerate() {
            acc += pmf;
            *c = acc;
            pmf *= (t - k) as f64 / (k + 1) as f64 * odds;
        }
        cdf[t] = 1.0;
        cdf
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(format!("probability must lie in [0, 1], got {p}")))
    }
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::param("sample size must be at least 1"))
    } else {
        Ok(())
    }
}

pub fn sample_truncated_normal<R: Rng + ?Sized>(spec: &TruncatedNormalSpec, n: usize, rng: &mut R) -> Result<Sample> {
    spec.validate()?;
    check_count(n)?;
    Sample::new((0..n).map(|_| spec.quantile(rng.random::<f64>())).collect())
}

pub fn sample_bernoulli<R: Rng + ?Sized>(spec: &BernoulliSpec, n: usize, rng: &mut R) -> Result<Sample> {
    check_probability(spec.p)?;
    check_count(n)?;
    Sample::new((0..n).map(|_| bernoulli_draw(spec.p, rng)).collect())
}

/// One Bernoulli draw; `p = 1` always yields 1 since uniforms lie in `[0, 1)`.
pub(crate) fn bernoulli_draw<R: Rng + ?Sized>(p: f64, rng: &mut R) -> f64 {
    if rng.random::<f64>() < p {
        1.0
    } else {
        0.0
    }
}

pub fn sample_binomial<R: Rng + ?Sized>(spec: &BinomialSpec, n: usize, rng: &mut R) -> Result<Sample> {
    if spec.trials < 1 {
        return Err(Error::param("binomial requires at least one trial"));
    }
    check_probability(spec.p)?;
    check_count(n)?;
    let cdf = spec.cdf_table();
    Sample::new(
        (0..n)
            .map(|_| {
                let u = rng.random::<f64>();
                cdf.partition_point(|&c| c <= u) as f64
            })
            .collect(),
    )
}

/// Functional average of a regular law supported on `[lower, upper]`.
pub fn true_functional_average(lower: f64, upper: f64) -> Result<f64> {
    if lower > upper {
        return Err(Error::param(format!("support lower bound {lower} exceeds upper bound {upper}")));
    }
    Ok(0.5 * (lower + upper))
}

/// Round every value to the nearest integer, ties away from zero.
pub fn round_to_integers(sample: &Sample) -> Sample {
    Sample::new(sample.values().iter().map(|&v| round_half_away(v)).collect())
        .expect("rounding preserves finiteness and length")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn tn(l: f64, u: f64, mu: f64, s: f64) -> TruncatedNormalSpec {
        TruncatedNormalSpec::new(l, u, mu, s).unwrap()
    }

    /// Truncated CDF computed directly from the parent normal's CDF ratio.
    fn oracle_cdf(spec: &TruncatedNormalSpec, x: f64) -> f64 {
        use statrs::distribution::{ContinuousCDF, Normal};
        let parent = Normal::new(spec.mu, spec.sigma).unwrap();
        let (fa, fb) = (parent.cdf(spec.lower), parent.cdf(spec.upper));
        ((parent.cdf(x.clamp(spec.lower, spec.upper)) - fa) / (fb - fa)).clamp(0.0, 1.0)
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(TruncatedNormalSpec::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(TruncatedNormalSpec::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(BernoulliSpec::new(1.1).is_err());
        assert!(BernoulliSpec::new(-0.1).is_err());
        assert!(BinomialSpec::new(0, 0.5).is_err());
        let mut rng = RngStream::new(1, 0).rng();
        let bad = TruncatedNormalSpec { lower: 2.0, upper: 1.0, mu: 0.0, sigma: 1.0 };
        assert!(sample_truncated_normal(&bad, 10, &mut rng).is_err());
        assert!(sample_truncated_normal(&tn(0.0, 1.0, 0.5, 1.0), 0, &mut rng).is_err());
    }

    #[test]
    fn symmetric_truncated_normal_mean() {
        let mut rng = RngStream::new(11, 0).rng();
        let s = sample_truncated_normal(&tn(0.0, 20.0, 10.0, 5.0), 1_000_000, &mut rng).unwrap();
        let mean = crate::stats::mean(s.values());
        assert!((mean - 10.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn skewed_truncated_normal_reaches_upper_tail() {
        // Oracle: P(X > 14.5) = (Phi(5/3) - Phi(1.5)) / (Phi(5/3) - Phi(-10/3)) ≈ 0.019
        // so 10^6 draws exceed 14.5 with overwhelming probability.
        let spec = tn(0.0, 15.0, 10.0, 3.0);
        let tail = 1.0 - oracle_cdf(&spec, 14.5);
        assert!(tail > 0.015 && tail < 0.025, "tail mass {tail}");
        let mut rng = RngStream::new(12, 0).rng();
        let s = sample_truncated_normal(&spec, 1_000_000, &mut rng).unwrap();
        let (lo, hi) = crate::stats::min_max(s.values());
        assert!(lo >= 0.0 && hi <= 15.0);
        assert!(hi > 14.5, "max {hi}");
    }

    #[test]
    fn truncated_normal_is_deterministic() {
        let spec = tn(0.0, 20.0, 10.0, 5.0);
        let a = sample_truncated_normal(&spec, 1000, &mut RngStream::new(5, 9).rng()).unwrap();
        let b = sample_truncated_normal(&spec, 1000, &mut RngStream::new(5, 9).rng()).unwrap();
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn truncated_normal_ecdf_within_dkw_band() {
        // DKW: sup |F_n - F| <= sqrt(ln(2/alpha) / (2n)) with prob 1 - alpha.
        let n = 100_000;
        let band = ((2.0f64 / 0.01).ln() / (2.0 * n as f64)).sqrt();
        for (i, spec) in
            [tn(0.0, 20.0, 10.0, 5.0), tn(0.0, 15.0, 10.0, 3.0), tn(0.0, 15.0, 5.0, 3.0), tn(-50.0, 50.0, 0.0, 25.0)]
                .iter()
                .enumerate()
        {
            let mut s = sample_truncated_normal(spec, n, &mut RngStream::new(99, i as u64).rng()).unwrap().into_inner();
            s.sort_by(f64::total_cmp);
            // parent quartiles: mu + sigma * {-0.6745, 0, 0.6745}
            for z in [-0.674_489_750_196_081_7, 0.0, 0.674_489_750_196_081_7] {
                let x = spec.mu + spec.sigma * z;
                let emp = s.partition_point(|&v| v <= x) as f64 / n as f64;
                let truth = oracle_cdf(spec, x);
                assert!((emp - truth).abs() < band, "spec {spec:?} at {x}: {emp} vs {truth}");
            }
        }
    }

    #[test]
    fn cdf_agrees_with_parent_ratio() {
        for spec in [tn(0.0, 15.0, 10.0, 3.0), tn(0.0, 15.0, 5.0, 3.0), tn(-50.0, 50.0, 0.0, 5.0)] {
            for k in 0..=20 {
                let x = spec.lower + (spec.upper - spec.lower) * k as f64 / 20.0;
                assert!((spec.cdf(x) - oracle_cdf(&spec, x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quantile_is_inverse_of_cdf() {
        for spec in
            [tn(0.0, 15.0, 10.0, 3.0), tn(0.0, 15.0, 5.0, 3.0), tn(10.0, 12.0, 0.0, 1.0), tn(-12.0, -10.0, 0.0, 1.0)]
        {
            for u in [0.001, 0.1, 0.5, 0.9, 0.999] {
                let x = spec.quantile(u);
                assert!((spec.cdf(x) - u).abs() < 1e-9, "{spec:?} u={u} x={x}");
            }
        }
    }

    #[test]
    fn bernoulli_extremes_and_mean() {
        let mut rng = RngStream::new(3, 0).rng();
        let zeros = sample_bernoulli(&BernoulliSpec::new(0.0).unwrap(), 1000, &mut rng).unwrap();
        assert!(zeros.values().iter().all(|&v| v == 0.0));
        let ones = sample_bernoulli(&BernoulliSpec::new(1.0).unwrap(), 1000, &mut rng).unwrap();
        assert!(ones.values().iter().all(|&v| v == 1.0));
        let s = sample_bernoulli(&BernoulliSpec::new(0.3).unwrap(), 1_000_000, &mut rng).unwrap();
        assert!((crate::stats::mean(s.values()) - 0.3).abs() < 0.002);
    }

    #[test]
    fn binomial_mean_and_support() {
        let mut rng = RngStream::new(4, 0).rng();
        let s = sample_binomial(&BinomialSpec::new(30, 0.5).unwrap(), 1_000_000, &mut rng).unwrap();
        assert!((crate::stats::mean(s.values()) - 15.0).abs() < 0.03);
        let s = sample_binomial(&BinomialSpec::new(50, 0.5).unwrap(), 100_000, &mut rng).unwrap();
        let (lo, hi) = crate::stats::min_max(s.values());
        assert!(lo >= 0.0 && hi <= 50.0);
        assert!(s.values().iter().all(|v| v.fract() == 0.0));
    }

    #[test]
    fn binomial_with_one_trial_is_bernoulli() {
        let spec = BinomialSpec::new(1, 0.3).unwrap();
        let s = sample_binomial(&spec, 100_000, &mut RngStream::new(8, 0).rng()).unwrap();
        assert!(s.values().iter().all(|&v| v == 0.0 || v == 1.0));
        assert!((crate::stats::mean(s.values()) - 0.3).abs() < 0.006);
        let all = sample_binomial(&BinomialSpec::new(5, 1.0).unwrap(), 100, &mut RngStream::new(8, 1).rng()).unwrap();
        assert!(all.values().iter().all(|&v| v == 5.0));
        let none = sample_binomial(&BinomialSpec::new(5, 0.0).unwrap(), 100, &mut RngStream::new(8, 1).rng()).unwrap();
        assert!(none.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn functional_average_of_interval() {
        assert_eq!(true_functional_average(0.0, 20.0).unwrap(), 10.0);
        assert_eq!(true_functional_average(0.0, 15.0).unwrap(), 7.5);
        assert_eq!(true_functional_average(3.0, 3.0).unwrap(), 3.0);
        assert!(true_functional_average(2.0, 1.0).is_err());
    }

    #[test]
    fn rounding_ties_away_from_zero() {
        let s = Sample::new(vec![1.4, 2.6, 2.5, -2.5, -0.4]).unwrap();
        assert_eq!(round_to_integers(&s).values(), &[1.0, 3.0, 3.0, -3.0, -0.0]);
        let mut rng = RngStream::new(6, 0).rng();
        let y = sample_truncated_normal(&tn(0.0, 40.0, 20.0, 5.0), 1_000_000, &mut rng).unwrap();
        let r = round_to_integers(&y);
        assert!(r.values().iter().all(|&v| (0.0..=40.0).contains(&v) && v.fract() == 0.0));
    }

    #[test]
    fn symmetric_law_mean_matches_midrange() {
        let mut rng = RngStream::new(21, 0).rng();
        let s = sample_truncated_normal(&tn(0.0, 20.0, 10.0, 5.0), 100_000, &mut rng).unwrap();
        let (lo, hi) = crate::stats::min_max(s.values());
        let mid = 0.5 * (lo + hi);
        assert!((crate::stats::mean(s.values()) - mid).abs() < 0.1);
    }
}
