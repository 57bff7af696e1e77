//! Least squares, logistic regression and the causal post-processing built
//! on them: t and U-concentration intervals, standardization contrasts and
//! propensity-score strata.

mod causal;
mod design;
mod logistic;
mod ols;

pub use causal::{
    ps_stratified_contrast, ps_stratified_point, standardization_bootstrap, standardization_contrast,
    StandardizationSpec,
};
pub use design::{DesignMatrix, ModelSpec, Term, INTERCEPT};
pub use logistic::{logistic_fit, propensity_strata, LogisticFit, StrataAssignment};
pub use ols::{ols_fit, t_ci, u_concentration_ci, u_concentration_half_width, RegressionFit};
