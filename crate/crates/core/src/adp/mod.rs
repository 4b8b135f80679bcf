//! Approximate dynamic programming with monotone projection and
//! regression-based initialization.

mod projection;
mod regression;
mod runner;

pub use projection::{monotone_projection, monotone_raising_sweep};
pub use regression::{fit_value_regression, RegressionCoeffs, RegressionSample};
pub use runner::{
    adp_run, regression_init, AdpConfig, AdpRunner, AdpVariant, GreedyPolicy, IterationRecord,
    IterationTrace, RbConfig, RegressionInit, ValueApprox,
};
