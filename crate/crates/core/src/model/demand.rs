//! Per-epoch swap-demand distributions with exact tail handling.
//!
//! The boundary transition probability is the survival `P(D >= u)`, computed
//! as `1 - P(D < u)` from the summed pmf prefix so that the pmf plus its tail
//! always totals exactly one. The tail is never approximated by summing the
//! pmf out to a truncation point.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum DemandSpec {
    /// Independent Poisson demand with one mean per decision epoch.
    Poisson { lambda: Vec<f64> },
    /// Explicit finite pmf per decision epoch; each row sums to one.
    Explicit { pmf: Vec<Vec<f64>> },
}

#[derive(Debug, Clone)]
struct EpochTable {
    /// `pmf[j] = P(D = j)` for `j = 0..=max_count`.
    pmf: Vec<f64>,
    /// `cdf_below[u] = P(D < u)` for `u = 0..=max_count + 1`.
    cdf_below: Vec<f64>,
    /// `weighted[n] = sum_{j<n} j * P(D = j)` for `n = 0..=max_count + 1`.
    weighted: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DemandModel {
    spec: DemandSpec,
    tables: Vec<EpochTable>,
    max_count: u32,
}

impl DemandModel {
    pub fn poisson(lambda: Vec<f64>) -> Result<Self> {
        if lambda.iter().any(|&l| !l.is_finite() || l < 0.0) {
            return Err(Error::InvalidScenario(
                "Poisson demand means must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            spec: DemandSpec::Poisson { lambda },
            tables: Vec::new(),
            max_count: 0,
        })
    }

    pub fn explicit(pmf: Vec<Vec<f64>>) -> Result<Self> {
        for (i, row) in pmf.iter().enumerate() {
            if row.is_empty() || row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidScenario(format!(
                    "demand pmf row {i} has entries outside [0, 1]"
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidScenario(format!(
                    "demand pmf row {i} sums to {total}, expected 1"
                )));
            }
        }
        Ok(Self {
            spec: DemandSpec::Explicit { pmf },
            tables: Vec::new(),
            max_count: 0,
        })
    }

    /// Number of decision epochs the model covers.
    pub fn epochs(&self) -> usize {
        match &self.spec {
            DemandSpec::Poisson { lambda } => lambda.len(),
            DemandSpec::Explicit { pmf } => pmf.len(),
        }
    }

    pub fn spec(&self) -> &DemandSpec {
        &self.spec
    }

    /// Mean demand at decision epoch `t` (1-based).
    pub fn mean(&self, t: usize) -> f64 {
        match &self.spec {
            DemandSpec::Poisson { lambda } => lambda[t - 1],
            DemandSpec::Explicit { pmf } => pmf[t - 1]
                .iter()
                .enumerate()
                .map(|(j, p)| j as f64 * p)
                .sum(),
        }
    }

    /// A copy with every epoch mean scaled by `factor`.
    ///
    /// Explicit pmfs have no canonical rescaling, so they are replaced by
    /// Poisson distributions at the scaled means.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if factor == 1.0 {
            let mut clone = self.clone();
            clone.tables.clear();
            clone.max_count = 0;
            return Ok(clone);
        }
        let lambda = (1..=self.epochs()).map(|t| self.mean(t) * factor).collect();
        Self::poisson(lambda)
    }

    /// Precompute pmf prefix tables for swap counts up to `max_count`.
    pub(crate) fn prepare(&mut self, max_count: u32) {
        let cap = max_count as usize;
        self.max_count = max_count;
        self.tables = (0..self.epochs())
            .map(|i| {
                let pmf: Vec<f64> = (0..=cap).map(|j| self.pmf_unbounded(i + 1, j as u32)).collect();
                let mut cdf_below = Vec::with_capacity(cap + 2);
                let mut weighted = Vec::with_capacity(cap + 2);
                let (mut c, mut w) = (0.0, 0.0);
                cdf_below.push(0.0);
                weighted.push(0.0);
                for (j, &p) in pmf.iter().enumerate() {
                    c += p;
                    w += j as f64 * p;
                    cdf_below.push(c);
                    weighted.push(w);
                }
                EpochTable {
                    pmf,
                    cdf_below,
                    weighted,
                }
            })
            .collect();
    }

    fn table(&self, t: usize) -> &EpochTable {
        debug_assert!(!self.tables.is_empty(), "demand model not prepared");
        &self.tables[t - 1]
    }

    /// `P(D_t = j)` computed directly from the spec, for any `j`.
    fn pmf_unbounded(&self, t: usize, j: u32) -> f64 {
        match &self.spec {
            DemandSpec::Poisson { lambda } => {
                let l = lambda[t - 1];
                let mut p = (-l).exp();
                for k in 1..=j {
                    p *= l / f64::from(k);
                }
                p
            }
            DemandSpec::Explicit { pmf } => {
                pmf[t - 1].get(j as usize).copied().unwrap_or(0.0)
            }
        }
    }

    /// `P(D_t = j)` for `j <= max_count` (table lookup).
    #[inline]
    pub fn pmf(&self, t: usize, j: u32) -> f64 {
        self.table(t).pmf[j as usize]
    }

    /// `P(D_t >= u)` for `u <= max_count + 1`, computed as the complement
    /// of the summed prefix.
    #[inline]
    pub fn survival(&self, t: usize, u: u32) -> f64 {
        1.0 - self.table(t).cdf_below[u as usize]
    }

    /// `E[min(D_t, n)] = sum_{j<n} j pmf(j) + n P(D_t >= n)`.
    #[inline]
    pub fn expected_min(&self, t: usize, n: u32) -> f64 {
        let table = self.table(t);
        table.weighted[n as usize] + f64::from(n) * (1.0 - table.cdf_below[n as usize])
    }

    /// Draw one demand realization for epoch `t` by cdf inversion.
    pub fn sample<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        match &self.spec {
            DemandSpec::Explicit { pmf } => {
                let row = &pmf[t - 1];
                let mut acc = 0.0;
                for (j, &p) in row.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return j as u32;
                    }
                }
                (row.len() - 1) as u32
            }
            DemandSpec::Poisson { lambda } => {
                let l = lambda[t - 1];
                // Inversion by walking the recurrence; the cutoff is far out
                // in the tail (mass below 1e-12 at 12 sigma past the mean).
                let cutoff = (l + 12.0 * l.sqrt() + 30.0) as u32;
                let mut p = (-l).exp();
                let mut acc = p;
                let mut j = 0u32;
                while u >= acc && j < cutoff {
                    j += 1;
                    p *= l / f64::from(j);
                    acc += p;
                }
                j
            }
        }
    }
}
