//! Least squares by Householder QR.

use statrs::distribution::{ContinuousCDF, StudentsT};

use super::design::DesignMatrix;
use crate::bootstrap::{check_alpha, concentration_multiplier, IntervalEstimate, IntervalMethod};
use crate::error::{Error, Result};
use crate::stats::min_max;

/// A column whose component orthogonal to the earlier columns is below this
/// fraction of its own norm is treated as linearly dependent.
const RANK_TOL: f64 = 1e-10;

/// Thin QR factors of an `n × p` design.
#[derive(Debug, Clone, PartialEq)]
struct Qr {
    n: usize,
    p: usize,
    /// `p × p` upper triangle, column-major.
    r: Vec<f64>,
    /// `n × p` orthonormal columns, column-major.
    q: Vec<f64>,
}

impl Qr {
    fn factor(x: &DesignMatrix) -> Result<Self> {
        let (n, p) = (x.n_rows(), x.n_cols());
        let mut a: Vec<f64> = (0..p).flat_map(|j| x.column(j).to_vec()).collect();
        let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(p);
        let mut r = vec![0.0; p * p];
        for j in 0..p {
            let orig = x.column(j).iter().map(|v| v * v).sum::<f64>().sqrt();
            let col = &a[j * n + j..(j + 1) * n];
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if orig == 0.0 || norm <= RANK_TOL * orig {
                return Err(Error::Singular { column: x.names()[j].clone() });
            }
            let alpha = if col[0] > 0.0 { -norm } else { norm };
            let mut v = col.to_vec();
            v[0] -= alpha;
            let vv: f64 = v.iter().map(|t| t * t).sum();
            for k in j + 1..p {
                let ck = &mut a[k * n + j..(k + 1) * n];
                let s = 2.0 * v.iter().zip(ck.iter()).map(|(a, b)| a * b).sum::<f64>() / vv;
                ck.iter_mut().zip(&v).for_each(|(c, vi)| *c -= s * vi);
            }
            for i in 0..j {
                r[j * p + i] = a[j * n + i];
            }
            r[j * p + j] = alpha;
            reflectors.push(v.iter().map(|t| t / vv.sqrt()).collect());
        }
        // Q = H_0 H_1 ... H_{p-1} applied to the first p unit vectors
        let mut q = vec![0.0; n * p];
        for j in 0..p {
            q[j * n + j] = 1.0;
        }
        for (j, v) in reflectors.iter().enumerate().rev() {
            for k in 0..p {
                let ck = &mut q[k * n + j..(k + 1) * n];
                let s = 2.0 * v.iter().zip(ck.iter()).map(|(a, b)| a * b).sum::<f64>();
                ck.iter_mut().zip(v).for_each(|(c, vi)| *c -= s * vi);
            }
        }
        Ok(Self { n, p, r, q })
    }

    fn r_at(&self, i: usize, j: usize) -> f64 {
        self.r[j * self.p + i]
    }

    fn q_col(&self, j: usize) -> &[f64] {
        &self.q[j * self.n..(j + 1) * self.n]
    }

    /// Solve `R b = c` by back substitution.
    fn solve_r(&self, c: &[f64]) -> Vec<f64> {
        let mut b = c.to_vec();
        for i in (0..self.p).rev() {
            let s: f64 = (i + 1..self.p).map(|k| self.r_at(i, k) * b[k]).sum();
            b[i] = (b[i] - s) / self.r_at(i, i);
        }
        b
    }

    /// Solve `Rᵀ v = c` by forward substitution.
    fn solve_rt(&self, c: &[f64]) -> Vec<f64> {
        let mut v = c.to_vec();
        for i in 0..self.p {
            let s: f64 = (0..i).map(|k| self.r_at(k, i) * v[k]).sum();
            v[i] = (v[i] - s) / self.r_at(i, i);
        }
        v
    }

    fn least_squares(&self, y: &[f64]) -> Vec<f64> {
        let qty: Vec<f64> = (0..self.p).map(|j| dot(self.q_col(j), y)).collect();
        self.solve_r(&qty)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    pub names: Vec<String>,
    pub rss: f64,
    qr: Qr,
}

impl RegressionFit {
    pub fn n(&self) -> usize {
        self.qr.n
    }

    pub fn p(&self) -> usize {
        self.qr.p
    }

    pub fn df_residual(&self) -> usize {
        self.n() - self.p()
    }

    /// `rss / (n − p)`
    pub fn residual_variance(&self) -> f64 {
        self.rss / self.df_residual() as f64
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names.iter().position(|n| n == name).ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    fn check_index(&self, s: usize) -> Result<()> {
        if s < self.p() {
            Ok(())
        } else {
            Err(Error::input(format!("coefficient index {s} out of range for {} coefficients", self.p())))
        }
    }

    fn unit_solve(&self, s: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.p()];
        e[s] = 1.0;
        self.qr.solve_rt(&e)
    }

    /// Row `s` of `(XᵀX)⁻¹Xᵀ`: `β̂_s − β_s = Σ wᵢ εᵢ`.
    pub fn weight_row(&self, s: usize) -> Result<Vec<f64>> {
        self.check_index(s)?;
        let v = self.unit_solve(s);
        let mut w = vec![0.0; self.n()];
        for (j, vj) in v.iter().enumerate() {
            for (wi, qi) in w.iter_mut().zip(self.qr.q_col(j)) {
                *wi += vj * qi;
            }
        }
        Ok(w)
    }

    /// `Σᵢ w²ᵢ,ₛ`, equal to `[(XᵀX)⁻¹]ₛₛ`.
    pub fn weight_sum_squares(&self, s: usize) -> Result<f64> {
        self.check_index(s)?;
        Ok(self.unit_solve(s).iter().map(|v| v * v).sum())
    }

    pub fn standard_error(&self, s: usize) -> Result<f64> {
        Ok((self.residual_variance() * self.weight_sum_squares(s)?).sqrt())
    }

    /// Largest `|xⱼᵀ ê| / (‖xⱼ‖ ‖y‖)` over the design columns.
    pub fn orthogonality_error(&self, x: &DesignMatrix) -> f64 {
        let ynorm = self.fitted.iter().zip(&self.residuals).map(|(f, e)| (f + e).powi(2)).sum::<f64>().sqrt();
        (0..x.n_cols())
            .map(|j| {
                let col = x.column(j);
                let cnorm = dot(col, col).sqrt();
                dot(col, &self.residuals).abs() / (cnorm * ynorm).max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }
}

pub fn ols_fit(x: &DesignMatrix, y: &[f64]) -> Result<RegressionFit> {
    if y.len() != x.n_rows() {
        return Err(Error::input(format!("response has {} rows, design has {}", y.len(), x.n_rows())));
    }
    if x.n_rows() <= x.n_cols() {
        return Err(Error::input(format!("need more rows ({}) than columns ({})", x.n_rows(), x.n_cols())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("response contains a non-finite value"));
    }
    let qr = Qr::factor(x)?;
    let coefficients = qr.least_squares(y);
    let fitted = x.apply(&coefficients);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let rss = residuals.iter().map(|e| e * e).sum();
    Ok(RegressionFit { coefficients, residuals, fitted, names: x.names().to_vec(), rss, qr })
}

/// `β̂ₛ ± t(1−α/2, n−p) · SE(β̂ₛ)`
pub fn t_ci(fit: &RegressionFit, s: usize, alpha: f64) -> Result<IntervalEstimate> {
    check_alpha(alpha)?;
    let df = fit.df_residual();
    if df < 1 {
        return Err(Error::input("t interval needs at least one residual degree of freedom"));
    }
    let t =
        StudentsT::new(0.0, 1.0, df as f64).map_err(|e| Error::param(e.to_string()))?.inverse_cdf(1.0 - alpha / 2.0);
    let half = t * fit.standard_error(s)?;
    Ok(IntervalEstimate::symmetric(fit.coefficients[s], half, alpha, IntervalMethod::TDist))
}

/// `(ê(n) − ê(1)) · sqrt(Σ w²) · sqrt(ln(2/α) / 6)`
pub fn u_concentration_half_width(residual_range: f64, weight_sum_squares: f64, alpha: f64) -> f64 {
    residual_range * weight_sum_squares.sqrt() * concentration_multiplier(alpha, 6.0)
}

/// Concentration interval for U-class errors, with the residual extremes
/// standing in for the error support.
pub fn u_concentration_ci(fit: &RegressionFit, s: usize, alpha: f64) -> Result<IntervalEstimate> {
    check_alpha(alpha)?;
    let (lo, hi) = min_max(&fit.residuals);
    let half = u_concentration_half_width(hi - lo, fit.weight_sum_squares(s)?, alpha);
    Ok(IntervalEstimate::symmetric(fit.coefficients[s], half, alpha, IntervalMethod::UConcentration))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;

    /// Gauss-Jordan inverse with partial pivoting; test oracle only.
    fn invert(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        let p = a.len();
        let mut inv: Vec<Vec<f64>> = (0..p).map(|i| (0..p).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        for c in 0..p {
            let piv = (c..p).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, piv);
            inv.swap(c, piv);
            let d = a[c][c];
            for k in 0..p {
                a[c][k] /= d;
                inv[c][k] /= d;
            }
            for r in 0..p {
                if r != c {
                    let f = a[r][c];
                    for k in 0..p {
                        a[r][k] -= f * a[c][k];
                        inv[r][k] -= f * inv[c][k];
                    }
                }
            }
        }
        inv
    }

    fn normal_equation_oracle(rows: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let p = rows[0].len();
        let xtx: Vec<Vec<f64>> =
            (0..p).map(|i| (0..p).map(|j| rows.iter().map(|r| r[i] * r[j]).sum()).collect()).collect();
        let xty: Vec<f64> = (0..p).map(|i| rows.iter().zip(y).map(|(r, yy)| r[i] * yy).sum()).collect();
        let inv = invert(xtx);
        let beta = (0..p).map(|i| (0..p).map(|j| inv[i][j] * xty[j]).sum()).collect();
        (beta, inv)
    }

    #[test]
    fn exact_interpolation() {
        let x = DesignMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let fit = ols_fit(&x, &[1.0, 3.0, 5.0]).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(fit.residuals.iter().all(|e| e.abs() < 1e-12));
        let ci = t_ci(&fit, 1, 0.05).unwrap();
        assert!(ci.width() < 1e-10);
        assert!(u_concentration_ci(&fit, 1, 0.05).unwrap().width() < 1e-10);
    }

    #[test]
    fn two_by_two_needs_more_rows() {
        let x = DesignMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(ols_fit(&x, &[1.0, 3.0]).is_err());
    }

    #[test]
    fn singular_design_names_column() {
        let x = DesignMatrix::from_columns(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![1.0, 1.0, 1.0, 1.0], vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 4.0, 6.0, 8.0]],
        )
        .unwrap();
        match ols_fit(&x, &[1.0, 2.0, 3.0, 5.0]) {
            Err(Error::Singular { column }) => assert_eq!(column, "c"),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn matches_explicit_inverse_on_random_instances() {
        let mut rng = RngStream::new(2024, 0).rng();
        for _ in 0..100 {
            let rows: Vec<Vec<f64>> =
                (0..10).map(|_| vec![1.0, rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)]).collect();
            let y: Vec<f64> = (0..10).map(|_| rng.random_range(-10.0..10.0)).collect();
            let x = DesignMatrix::from_rows(&rows).unwrap();
            let fit = ols_fit(&x, &y).unwrap();
            let (beta, inv) = normal_equation_oracle(&rows, &y);
            for (a, b) in fit.coefficients.iter().zip(&beta) {
                assert!((a - b).abs() < 1e-6);
            }
            for (s, inv_row) in inv.iter().enumerate() {
                assert!((fit.weight_sum_squares(s).unwrap() - inv_row[s]).abs() < 1e-8);
                // w row equals row s of (XᵀX)⁻¹Xᵀ
                let w = fit.weight_row(s).unwrap();
                for (i, row) in rows.iter().enumerate() {
                    let expect: f64 = inv_row.iter().zip(row).map(|(a, b)| a * b).sum();
                    assert!((w[i] - expect).abs() < 1e-8);
                }
            }
            assert!(fit.orthogonality_error(&x) < 1e-8);
            assert!(fit.residuals.iter().sum::<f64>().abs() < 1e-9);
        }
    }

    #[test]
    fn recovers_noiseless_coefficients() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![1.0, i as f64, ((i * 7) % 5) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 3.0 - 2.0 * r[1] + 0.5 * r[2]).collect();
        let fit = ols_fit(&DesignMatrix::from_rows(&rows).unwrap(), &y).unwrap();
        for (a, b) in fit.coefficients.iter().zip([3.0, -2.0, 0.5]) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn u_concentration_hand_instance() {
        // range 2, Σw² = 0.25, α = 0.05 → 2 · 0.5 · 0.7841
        let h = u_concentration_half_width(2.0, 0.25, 0.05);
        assert!((h - 0.784_100_3).abs() < 1e-6);
    }

    #[test]
    fn t_width_shrinks_as_alpha_grows() {
        let mut rng = RngStream::new(5, 5).rng();
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![1.0, i as f64]).collect();
        let y: Vec<f64> = (0..30).map(|i| i as f64 + rng.random_range(-1.0..1.0)).collect();
        let fit = ols_fit(&DesignMatrix::from_rows(&rows).unwrap(), &y).unwrap();
        let widths: Vec<f64> =
            [0.01, 0.05, 0.2, 0.5, 0.9, 0.999].iter().map(|&a| t_ci(&fit, 1, a).unwrap().width()).collect();
        assert!(widths.windows(2).all(|w| w[0] > w[1]));
        assert!(widths[5] < 0.01 * widths[0]);
        assert!(t_ci(&fit, 7, 0.05).is_err());
    }
}
