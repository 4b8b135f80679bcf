//! Linear value regression used to initialize the approximation.

use nalgebra::{Cholesky, Matrix5, Vector5};

use crate::error::{Error, Result};

/// Coefficients of `V ~ h0 + h1 M + h2 s1 + h3 s2 + h4 t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionCoeffs {
    pub intercept: f64,
    pub battery_count: f64,
    pub full_count: f64,
    pub capacity: f64,
    pub epoch: f64,
}

impl RegressionCoeffs {
    pub fn predict(&self, m: f64, full: f64, capacity: f64, epoch: f64) -> f64 {
        self.intercept
            + self.battery_count * m
            + self.full_count * full
            + self.capacity * capacity
            + self.epoch * epoch
    }
}

/// One training row: a solved optimal value at a given instance size, state,
/// and epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionSample {
    pub battery_count: f64,
    pub full: f64,
    pub capacity: f64,
    pub epoch: f64,
    pub value: f64,
}

impl RegressionSample {
    fn features(&self) -> [f64; 4] {
        [self.battery_count, self.full, self.capacity, self.epoch]
    }
}

const FEATURE_NAMES: [&str; 4] = ["battery_count", "full_count", "capacity", "epoch"];

/// Ordinary least squares on the five-term linear value model.
///
/// Features are standardized internally so the normal equations stay well
/// conditioned, then the coefficients are mapped back to raw units.
pub fn fit_value_regression(samples: &[RegressionSample]) -> Result<RegressionCoeffs> {
    if samples.len() < 5 {
        return Err(Error::InvalidScenario(format!(
            "regression needs at least 5 samples, got {}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let mut mean = [0.0f64; 4];
    for s in samples {
        for (m, x) in mean.iter_mut().zip(s.features()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut scale = [0.0f64; 4];
    for s in samples {
        for ((sc, m), x) in scale.iter_mut().zip(mean).zip(s.features()) {
            *sc += (x - m) * (x - m);
        }
    }
    for (j, sc) in scale.iter_mut().enumerate() {
        *sc = (*sc / n).sqrt();
        if *sc <= 1e-12 * (1.0 + mean[j].abs()) {
            return Err(Error::DegenerateFeature(FEATURE_NAMES[j].into()));
        }
    }

    // Normal equations on (1, z1..z4) with standardized features.
    let mut xtx = Matrix5::<f64>::zeros();
    let mut xty = Vector5::<f64>::zeros();
    for s in samples {
        let f = s.features();
        let row = [
            1.0,
            (f[0] - mean[0]) / scale[0],
            (f[1] - mean[1]) / scale[1],
            (f[2] - mean[2]) / scale[2],
            (f[3] - mean[3]) / scale[3],
        ];
        for i in 0..5 {
            for j in 0..5 {
                xtx[(i, j)] += row[i] * row[j];
            }
            xty[i] += row[i] * s.value;
        }
    }
    let chol = Cholesky::new(xtx).ok_or_else(|| {
        Error::DegenerateFeature("collinear feature combination".into())
    })?;
    let beta = chol.solve(&xty);

    let slopes = [
        beta[1] / scale[0],
        beta[2] / scale[1],
        beta[3] / scale[2],
        beta[4] / scale[3],
    ];
    let intercept = beta[0] - slopes.iter().zip(mean).map(|(b, m)| b * m).sum::<f64>();
    Ok(RegressionCoeffs {
        intercept,
        battery_count: slopes[0],
        full_count: slopes[1],
        capacity: slopes[2],
        epoch: slopes[3],
    })
}
