//! Discretized average-capacity grid with a dedicated absorbing level.

use crate::error::{Error, Result};

/// Index into a [`CapacityGrid`].
///
/// Index 0 is the absorbing level: average capacity fell below the
/// replacement threshold and the station is frozen. Indices `1..=level_count`
/// map to the operational values `theta, theta+eps, ..., 1`. The integer
/// ordering of indices matches the capacity ordering, with the absorbing
/// level strictly below every operational level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CapIdx(pub u32);

impl CapIdx {
    pub const ABSORBING: CapIdx = CapIdx(0);

    #[inline]
    pub fn is_absorbing(self) -> bool {
        self.0 == 0
    }
}

/// Capacity levels `{theta, theta+eps, ..., 1}` plus the absorbing level.
///
/// `(1 - theta) / eps` must be a whole number so the grid closes exactly
/// at full capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityGrid {
    theta: f64,
    epsilon: f64,
    /// Number of grid steps between theta and 1, i.e. `(1 - theta) / eps`.
    steps: u32,
}

impl CapacityGrid {
    pub fn new(theta: f64, epsilon: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidGrid(format!(
                "threshold theta={theta} must lie in (0, 1)"
            )));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidGrid(format!(
                "increment eps={epsilon} must lie in (0, 1)"
            )));
        }
        let raw_steps = (1.0 - theta) / epsilon;
        let steps = raw_steps.round();
        if (raw_steps - steps).abs() > 1e-9 || steps < 1.0 {
            return Err(Error::InvalidGrid(format!(
                "(1 - theta)/eps = {raw_steps} is not a whole number; the grid must close at 1"
            )));
        }
        Ok(Self {
            theta,
            epsilon,
            steps: steps as u32,
        })
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Number of operational (non-absorbing) levels.
    #[inline]
    pub fn level_count(&self) -> u32 {
        self.steps + 1
    }

    /// Index of the full-capacity level (value 1).
    #[inline]
    pub fn top(&self) -> CapIdx {
        CapIdx(self.steps + 1)
    }

    #[inline]
    pub fn contains(&self, idx: CapIdx) -> bool {
        idx.0 <= self.steps + 1
    }

    /// Capacity value of an operational level; `None` for the absorbing level.
    #[inline]
    pub fn value(&self, idx: CapIdx) -> Option<f64> {
        if idx.is_absorbing() || !self.contains(idx) {
            None
        } else {
            Some(self.theta + f64::from(idx.0 - 1) * self.epsilon)
        }
    }

    /// Exact level lookup: succeeds only when `v` sits on the grid.
    pub fn index_of(&self, v: f64) -> Option<CapIdx> {
        if v < self.theta {
            return None;
        }
        let k = ((v - self.theta) / self.epsilon).round();
        if k < 0.0 || k > f64::from(self.steps) {
            return None;
        }
        let idx = CapIdx(k as u32 + 1);
        let level = self.value(idx).expect("operational index");
        ((v - level).abs() <= 1e-9 * self.epsilon).then_some(idx)
    }

    /// Snap a raw average capacity onto the grid.
    ///
    /// Values below theta enter the absorbing level; everything else rounds
    /// to the nearest operational level, ties upward.
    pub fn snap(&self, raw: f64) -> CapIdx {
        if raw < self.theta {
            return CapIdx::ABSORBING;
        }
        let k = ((raw - self.theta) / self.epsilon + 0.5).floor();
        let k = (k as i64).clamp(0, i64::from(self.steps)) as u32;
        CapIdx(k + 1)
    }

    /// Number of grid steps from `idx` up to full capacity.
    #[inline]
    pub fn steps_to_top(&self, idx: CapIdx) -> Option<u32> {
        if idx.is_absorbing() || !self.contains(idx) {
            None
        } else {
            Some(self.steps + 1 - idx.0)
        }
    }

    /// Operational level indices in increasing capacity order.
    pub fn levels(&self) -> impl Iterator<Item = CapIdx> {
        (1..=self.steps + 1).map(CapIdx)
    }

    /// All indices including the absorbing level, in increasing order.
    pub fn all_indices(&self) -> impl Iterator<Item = CapIdx> {
        (0..=self.steps + 1).map(CapIdx)
    }
}
