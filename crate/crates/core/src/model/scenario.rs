//! Problem instance, states, and actions.

use crate::error::{Error, Result};
use crate::model::demand::DemandModel;
use crate::model::grid::{CapIdx, CapacityGrid};

/// System state: number of full batteries and the discretized average
/// capacity level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct State {
    pub full: u32,
    pub cap: CapIdx,
}

impl State {
    pub fn new(full: u32, cap: CapIdx) -> Self {
        Self { full, cap }
    }

    /// Componentwise lattice order on (full count, capacity level).
    #[inline]
    pub fn dominates(self, other: State) -> bool {
        self.full >= other.full && self.cap >= other.cap
    }
}

/// Decision: signed recharge/discharge count plus replacement count.
///
/// Positive `charge` recharges depleted batteries, negative discharges full
/// ones back to the grid; the two never mix within one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Action {
    pub charge: i32,
    pub replace: u32,
}

impl Action {
    pub const NONE: Action = Action {
        charge: 0,
        replace: 0,
    };

    pub fn new(charge: i32, replace: u32) -> Self {
        Self { charge, replace }
    }

    /// Split the signed charge action into (recharge count, discharge count);
    /// at most one of the two is nonzero.
    #[inline]
    pub fn decompose(self) -> (u32, u32) {
        (self.recharge_count(), self.discharge_count())
    }

    #[inline]
    pub fn recharge_count(self) -> u32 {
        self.charge.max(0) as u32
    }

    #[inline]
    pub fn discharge_count(self) -> u32 {
        (-self.charge.min(0)) as u32
    }

    /// Total batteries cycled this epoch (recharged plus discharged).
    #[inline]
    pub fn cycled(self) -> u32 {
        self.charge.unsigned_abs()
    }

    /// Preference key for deterministic argmax tie-breaking: smaller |a1|,
    /// then smaller a1, then smaller a2.
    #[inline]
    pub fn tie_break_key(self) -> (u32, i32, u32) {
        (self.charge.unsigned_abs(), self.charge, self.replace)
    }
}

/// A complete problem instance.
///
/// Decision epochs run `t = 1..=N-1` with terminal epoch `N`; the cost and
/// revenue series each hold one entry per decision epoch.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Total batteries at the station.
    pub m: u32,
    /// Charging plug-ins; bounds simultaneous recharges and discharges.
    pub phi: u32,
    /// Terminal epoch index N.
    pub terminal_epoch: usize,
    pub grid: CapacityGrid,
    /// Capacity lost by a battery over one recharge/discharge cycle.
    pub delta_c: f64,
    /// Base revenue per swap at threshold capacity.
    pub beta: f64,
    /// Recharge cost per battery, per decision epoch (K_t).
    pub recharge_cost: Vec<f64>,
    /// Discharge revenue per battery, per decision epoch (J_t).
    pub discharge_revenue: Vec<f64>,
    /// Replacement cost per battery, per decision epoch (L_t).
    pub replacement_cost: Vec<f64>,
    pub demand: DemandModel,
}

impl Scenario {
    /// Validate every invariant and precompute demand tables.
    pub fn validated(mut self) -> Result<Self> {
        let n = self.terminal_epoch;
        if n < 2 {
            return Err(Error::InvalidScenario(format!(
                "terminal epoch N={n} leaves no decision epochs"
            )));
        }
        if self.m == 0 || self.phi == 0 || self.phi > self.m {
            return Err(Error::InvalidScenario(format!(
                "need 0 < plug-ins <= batteries, got phi={} M={}",
                self.phi, self.m
            )));
        }
        if !self.delta_c.is_finite() || self.delta_c <= 0.0 {
            return Err(Error::InvalidScenario(format!(
                "degradation per cycle must be positive, got {}",
                self.delta_c
            )));
        }
        let epochs = n - 1;
        for (name, series) in [
            ("recharge cost", &self.recharge_cost),
            ("discharge revenue", &self.discharge_revenue),
            ("replacement cost", &self.replacement_cost),
        ] {
            if series.len() != epochs {
                return Err(Error::InvalidScenario(format!(
                    "{name} series has {} entries, expected {epochs}",
                    series.len()
                )));
            }
            if series.iter().any(|&x| !x.is_finite() || x < 0.0) {
                return Err(Error::InvalidScenario(format!(
                    "{name} series has a negative or non-finite entry"
                )));
            }
        }
        let max_j = self
            .discharge_revenue
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        if self.beta < max_j {
            return Err(Error::InvalidScenario(format!(
                "swap revenue beta={} below max discharge revenue {max_j}; swapping must stay profitable",
                self.beta
            )));
        }
        if self.demand.epochs() != epochs {
            return Err(Error::InvalidScenario(format!(
                "demand model covers {} epochs, expected {epochs}",
                self.demand.epochs()
            )));
        }
        self.demand.prepare(self.m);
        Ok(self)
    }

    /// Number of decision epochs (N - 1).
    #[inline]
    pub fn decision_epochs(&self) -> usize {
        self.terminal_epoch - 1
    }

    pub fn check_epoch(&self, t: usize) -> Result<()> {
        if t == 0 || t >= self.terminal_epoch {
            return Err(Error::EpochOutOfRange(t));
        }
        Ok(())
    }

    /// Recharge cost at decision epoch `t` (1-based).
    #[inline]
    pub fn k(&self, t: usize) -> f64 {
        self.recharge_cost[t - 1]
    }

    /// Discharge revenue at decision epoch `t`.
    #[inline]
    pub fn j(&self, t: usize) -> f64 {
        self.discharge_revenue[t - 1]
    }

    /// Replacement cost at decision epoch `t`.
    #[inline]
    pub fn l(&self, t: usize) -> f64 {
        self.replacement_cost[t - 1]
    }

    pub fn check_state(&self, s: State) -> Result<()> {
        if s.full > self.m || !self.grid.contains(s.cap) {
            return Err(Error::InvalidState {
                state: s,
                m: self.m,
                levels: self.grid.level_count(),
            });
        }
        Ok(())
    }

    /// The start state used throughout: all batteries full at full capacity.
    pub fn reference_state(&self) -> State {
        State::new(self.m, self.grid.top())
    }
}
