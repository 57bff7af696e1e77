//! Logistic regression by iteratively reweighted least squares, and
//! propensity-score quantile strata.

use super::design::DesignMatrix;
use super::ols::ols_fit;
use crate::error::{Error, Result};
use crate::stats::{quantile_sorted, sort_floats};

const MAX_ITERATIONS: usize = 50;
/// Convergence threshold on `‖Xᵀ(y − p)‖ / n`.
const SCORE_TOL: f64 = 1e-8;
/// Linear predictors beyond this put fitted probabilities within ~1e-13 of
/// 0 or 1, which only happens when the classes are (quasi-)separated.
const ETA_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub coefficients: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Scaled score norm after each iteration.
    pub score_trace: Vec<f64>,
}

fn sigmoid(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta).exp())
}

fn scaled_score(x: &DesignMatrix, y: &[f64], p: &[f64]) -> f64 {
    let n = x.n_rows() as f64;
    (0..x.n_cols())
        .map(|j| {
            let g: f64 = x.column(j).iter().zip(y.iter().zip(p)).map(|(xi, (yi, pi))| xi * (yi - pi)).sum();
            g * g
        })
        .sum::<f64>()
        .sqrt()
        / n
}

pub fn logistic_fit(x: &DesignMatrix, y: &[f64]) -> Result<LogisticFit> {
    if y.len() != x.n_rows() {
        return Err(Error::input(format!("response has {} rows, design has {}", y.len(), x.n_rows())));
    }
    if let Some(bad) = y.iter().find(|&&v| v != 0.0 && v != 1.0) {
        return Err(Error::input(format!("logistic response must be 0/1, found {bad}")));
    }
    let (n, p) = (x.n_rows(), x.n_cols());
    let mut beta = vec![0.0; p];
    let mut trace = Vec::new();
    for iteration in 1..=MAX_ITERATIONS {
        let eta = x.apply(&beta);
        if eta.iter().any(|e| e.abs() > ETA_LIMIT) {
            return Err(Error::NonConvergence { iterations: iteration - 1, trace });
        }
        let probs: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
        let score = scaled_score(x, y, &probs);
        trace.push(score);
        if score < SCORE_TOL {
            return Ok(LogisticFit {
                coefficients: beta,
                probabilities: probs,
                converged: true,
                iterations: iteration - 1,
                score_trace: trace,
            });
        }
        // weighted least squares on sqrt(W)·X against sqrt(W)·z
        let weights: Vec<f64> = probs.iter().map(|q| q * (1.0 - q)).collect();
        let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let cols: Vec<Vec<f64>> = (0..p).map(|j| x.column(j).iter().zip(&sw).map(|(a, s)| a * s).collect()).collect();
        let wx = DesignMatrix::from_columns(x.names().to_vec(), cols)?;
        let z: Vec<f64> = (0..n).map(|i| sw[i] * eta[i] + (y[i] - probs[i]) / sw[i]).collect();
        beta = ols_fit(&wx, &z)?.coefficients;
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonConvergence { iterations: iteration, trace });
        }
    }
    Err(Error::NonConvergence { iterations: MAX_ITERATIONS, trace })
}

/// Per-row stratum in `1..=k` and the `k − 1` interior cut points.
#[derive(Debug, Clone, PartialEq)]
pub struct StrataAssignment {
    pub strata: Vec<usize>,
    pub cuts: Vec<f64>,
    pub k: usize,
}

impl StrataAssignment {
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &s in &self.strata {
            sizes[s - 1] += 1;
        }
        sizes
    }
}

/// Split rows at the type-7 `k`-quantiles of `scores`. A row equal to a cut
/// falls in the lower stratum.
pub fn propensity_strata(scores: &[f64], k: usize) -> Result<StrataAssignment> {
    if k < 1 {
        return Err(Error::param("need at least one stratum"));
    }
    if scores.len() < k {
        return Err(Error::Stratification(format!("{} rows cannot fill {k} strata", scores.len())));
    }
    let mut sorted = scores.to_vec();
    sort_floats(&mut sorted);
    let cuts: Vec<f64> = (1..k).map(|j| quantile_sorted(&sorted, j as f64 / k as f64)).collect();
    let strata: Vec<usize> = scores.iter().map(|&s| 1 + cuts.iter().filter(|&&c| s > c).count()).collect();
    let assignment = StrataAssignment { strata, cuts, k };
    if let Some(empty) = assignment.sizes().iter().position(|&c| c == 0) {
        return Err(Error::Stratification(format!("stratum {} is empty after tie handling", empty + 1)));
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::bernoulli_draw;
    use crate::rng::RngStream;

    fn logit(p: f64) -> f64 {
        (p / (1.0 - p)).ln()
    }

    #[test]
    fn intercept_only_recovers_logit_mean() {
        let y: Vec<f64> = (0..40).map(|i| if i % 4 == 0 { 1.0 } else { 0.0 }).collect();
        let x = DesignMatrix::from_rows(&vec![vec![1.0]; 40]).unwrap();
        let fit = logistic_fit(&x, &y).unwrap();
        assert!(fit.converged);
        assert!((fit.coefficients[0] - logit(0.25)).abs() < 1e-8);
        let balanced: Vec<f64> = (0..40).map(|i| (i % 2) as f64).collect();
        assert!(logistic_fit(&x, &balanced).unwrap().coefficients[0].abs() < 1e-10);
    }

    #[test]
    fn recovers_log_odds_difference() {
        let mut rng = RngStream::new(17, 0).rng();
        let n = 100_000;
        let c: Vec<f64> = (0..n).map(|_| bernoulli_draw(0.5, &mut rng)).collect();
        let t: Vec<f64> = c.iter().map(|&ci| bernoulli_draw(0.3 + 0.5 * ci, &mut rng)).collect();
        let x = DesignMatrix::from_columns(vec!["(Intercept)".into(), "c".into()], vec![vec![1.0; n], c]).unwrap();
        let fit = logistic_fit(&x, &t).unwrap();
        let truth = logit(0.8) - logit(0.3);
        assert!((fit.coefficients[1] - truth).abs() < 0.05, "{} vs {truth}", fit.coefficients[1]);
        assert!(fit.probabilities.iter().all(|&p| p > 0.0 && p < 1.0));
    }

    #[test]
    fn separated_data_is_flagged() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![1.0, i as f64]).collect();
        let y: Vec<f64> = (0..20).map(|i| if i >= 10 { 1.0 } else { 0.0 }).collect();
        let err = logistic_fit(&DesignMatrix::from_rows(&rows).unwrap(), &y).unwrap_err();
        match err {
            Error::NonConvergence { trace, .. } => assert!(!trace.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_binary_response() {
        let x = DesignMatrix::from_rows(&vec![vec![1.0]; 3]).unwrap();
        assert!(logistic_fit(&x, &[0.0, 0.5, 1.0]).is_err());
    }

    #[test]
    fn evenly_spread_scores_split_in_pairs() {
        let scores: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let s = propensity_strata(&scores, 5).unwrap();
        assert_eq!(s.sizes(), vec![2; 5]);
        assert_eq!(s.strata, vec![1, 1, 2, 2, 3, 3, 4, 4, 5, 5]);
    }

    #[test]
    fn constant_scores_cannot_be_stratified() {
        assert!(matches!(propensity_strata(&[0.4; 10], 5), Err(Error::Stratification(_))));
        assert!(propensity_strata(&[0.1, 0.2], 5).is_err());
    }
}
