//! Stepsize rules for the value-smoothing weight.
//!
//! The deterministic rules depend only on the iteration counter. The
//! adaptive rule tracks per-state bias and noise estimates and shrinks the
//! stepsize only once observations look like noise around the current
//! approximation.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Floor for the adaptive stepsize so entries never freeze entirely.
pub const ADAPTIVE_ALPHA_MIN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepsizeSpec {
    OneOverN,
    Harmonic { w: f64 },
    Stc { alpha0: f64, mu1: f64, mu2: f64, zeta: f64 },
    Adaptive { inner_w: f64 },
}

impl StepsizeSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        match *self {
            StepsizeSpec::OneOverN => Ok(()),
            StepsizeSpec::Harmonic { w } | StepsizeSpec::Adaptive { inner_w: w } => {
                if w > 0.0 && w.is_finite() {
                    Ok(())
                } else {
                    bad(format!("harmonic stepsize needs w > 0, got {w}"))
                }
            }
            StepsizeSpec::Stc { alpha0, mu1, mu2, zeta } => {
                if !(alpha0 > 0.0 && alpha0 <= 1.0) {
                    bad(format!("STC needs alpha0 in (0, 1], got {alpha0}"))
                } else if !(mu1 >= 0.0 && mu2 >= 0.0) {
                    bad(format!("STC needs mu1, mu2 >= 0, got {mu1}, {mu2}"))
                } else if !(zeta > 0.5 && zeta <= 1.0) {
                    bad(format!("STC needs zeta in (0.5, 1], got {zeta}"))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, StepsizeSpec::Adaptive { .. })
    }

    /// The stepsize at iteration `n` for the deterministic rules.
    pub fn deterministic_alpha(&self, n: usize) -> Option<f64> {
        match *self {
            StepsizeSpec::OneOverN => Some(one_over_n(n)),
            StepsizeSpec::Harmonic { w } => Some(harmonic_alpha(w, n)),
            StepsizeSpec::Stc { alpha0, mu1, mu2, zeta } => {
                Some(stc_alpha(alpha0, mu1, mu2, zeta, n))
            }
            StepsizeSpec::Adaptive { .. } => None,
        }
    }
}

#[inline]
pub fn one_over_n(n: usize) -> f64 {
    1.0 / n as f64
}

/// `alpha_n = w / (w + n - 1)`.
#[inline]
pub fn harmonic_alpha(w: f64, n: usize) -> f64 {
    w / (w + n as f64 - 1.0)
}

/// Generalized search-then-converge rule:
/// `alpha_n = alpha0 (mu2/n + mu1) / (mu2/n + mu1 + n^zeta - 1)`.
///
/// Equals `alpha0` exactly at `n = 1` since `n^zeta - 1` vanishes there.
#[inline]
pub fn stc_alpha(alpha0: f64, mu1: f64, mu2: f64, zeta: f64, n: usize) -> f64 {
    let n = n as f64;
    let head = mu2 / n + mu1;
    alpha0 * head / (head + n.powf(zeta) - 1.0)
}

/// Per-state statistics for the bias-adjusted adaptive rule.
///
/// The recursion smooths the one-step error and its square with an inner
/// harmonic stepsize, estimates the noise variance as
/// `(nu - bias^2) / (1 + lambda)`, and returns `1 - noise/nu`: close to one
/// while the error is dominated by bias, shrinking toward zero once the
/// error is pure noise.
#[derive(Debug, Clone, Default)]
pub struct AdaptiveStats {
    count: usize,
    bias: f64,
    nu: f64,
    lambda: f64,
}

impl AdaptiveStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observations(&self) -> usize {
        self.count
    }

    /// Feed one observation and return the stepsize to apply.
    pub fn update(&mut self, inner_w: f64, observation: f64, previous: f64) -> f64 {
        self.count += 1;
        let n = self.count;
        let err = previous - observation;
        let eta = harmonic_alpha(inner_w, n);
        if n == 1 {
            self.bias = err;
            self.nu = err * err;
            self.lambda = 1.0;
            return 1.0;
        }
        let lambda_prev = self.lambda;
        self.bias = (1.0 - eta) * self.bias + eta * err;
        self.nu = (1.0 - eta) * self.nu + eta * err * err;
        let alpha = if self.nu <= f64::EPSILON {
            1.0
        } else {
            let noise = (self.nu - self.bias * self.bias) / (1.0 + lambda_prev);
            (1.0 - noise / self.nu).clamp(ADAPTIVE_ALPHA_MIN, 1.0)
        };
        self.lambda = alpha * alpha + (1.0 - alpha) * (1.0 - alpha) * lambda_prev;
        alpha
    }
}

/// Adaptive stepsizes keyed by (epoch, state index), owned by one ADP run.
#[derive(Debug, Clone)]
pub struct AdaptiveStepsize {
    inner_w: f64,
    stats: HashMap<(usize, usize), AdaptiveStats>,
}

impl AdaptiveStepsize {
    pub fn new(inner_w: f64) -> Self {
        Self {
            inner_w,
            stats: HashMap::new(),
        }
    }

    pub fn alpha(&mut self, epoch: usize, state_index: usize, observation: f64, previous: f64) -> f64 {
        self.stats
            .entry((epoch, state_index))
            .or_default()
            .update(self.inner_w, observation, previous)
    }
}
