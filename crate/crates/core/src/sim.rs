//! Sample-path simulation of policies and the evaluation metrics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::Policy;
use crate::model::{Action, Scenario, State};

/// One realized demand sequence over the decision epochs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandPath {
    pub demands: Vec<u32>,
    pub seed: u64,
}

/// Draw `count` independent demand paths, reproducible from the seed.
pub fn sample_demand_paths(sc: &Scenario, count: usize, seed: u64) -> Vec<DemandPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| DemandPath {
            demands: (1..sc.terminal_epoch)
                .map(|t| sc.demand.sample(t, &mut rng))
                .collect(),
            seed,
        })
        .collect()
}

/// The deterministic path where realized demand equals the rounded mean.
pub fn mean_demand_path(sc: &Scenario) -> DemandPath {
    DemandPath {
        demands: (1..sc.terminal_epoch)
            .map(|t| sc.demand.mean(t).round() as u32)
            .collect(),
        seed: 0,
    }
}

/// Anything that can pick an action for a state at an epoch: a solved policy
/// table, or a greedy rule over an approximate value function.
pub trait DecisionSource {
    fn decide(&self, sc: &Scenario, t: usize, s: State) -> Result<Action>;
}

impl DecisionSource for Policy {
    fn decide(&self, _sc: &Scenario, t: usize, s: State) -> Result<Action> {
        Ok(self.action(t, s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryStep {
    pub epoch: usize,
    pub state: State,
    pub action: Action,
    pub demand: u32,
    pub satisfied: u32,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    pub terminal_state: State,
    pub terminal_reward: f64,
    pub total_reward: f64,
}

impl Trajectory {
    pub fn total_cycled(&self) -> u64 {
        self.steps.iter().map(|s| u64::from(s.action.cycled())).sum()
    }

    pub fn total_replaced(&self) -> u64 {
        self.steps
            .iter()
            .map(|s| u64::from(s.action.replace))
            .sum()
    }
}

/// Roll one demand path forward under a decision source.
///
/// Starts from `start` (default: every battery full at full capacity),
/// checks each decision for feasibility, and accumulates realized rewards
/// plus the terminal reward.
pub fn simulate_policy(
    sc: &Scenario,
    source: &dyn DecisionSource,
    path: &DemandPath,
    start: Option<State>,
) -> Result<Trajectory> {
    if path.demands.len() != sc.decision_epochs() {
        return Err(Error::InvalidScenario(format!(
            "demand path has {} epochs, scenario expects {}",
            path.demands.len(),
            sc.decision_epochs()
        )));
    }
    let mut state = start.unwrap_or_else(|| sc.reference_state());
    sc.check_state(state)?;
    let mut steps = Vec::with_capacity(sc.decision_epochs());
    let mut total = 0.0;
    for (i, &demand) in path.demands.iter().enumerate() {
        let t = i + 1;
        let action = source.decide(sc, t, state)?;
        sc.check_action(state, action, t)?;
        let satisfied = if state.cap.is_absorbing() {
            0
        } else {
            demand.min(state.full - action.discharge_count())
        };
        let next = State::new(
            sc.next_full(state, action, demand),
            sc.next_capacity(state, action),
        );
        let reward = sc.immediate_reward(state, action, next, t);
        total += reward;
        steps.push(TrajectoryStep {
            epoch: t,
            state,
            action,
            demand,
            satisfied,
            reward,
        });
        state = next;
    }
    let terminal_reward = sc.terminal_reward(state);
    total += terminal_reward;
    Ok(Trajectory {
        steps,
        terminal_state: state,
        terminal_reward,
        total_reward: total,
    })
}

/// Absolute relative gap in percent between an exact and an approximate
/// expected reward.
pub fn optimality_gap(v_exact: f64, v_approx: f64) -> Result<f64> {
    if v_exact == 0.0 {
        return Err(Error::GapUndefined);
    }
    Ok(((v_exact - v_approx) / v_exact).abs() * 100.0)
}

/// Mean per-iteration optimality gap over a recorded value trace.
pub fn gap_over_iterations(trace_values: &[f64], v_exact: f64) -> Result<f64> {
    if trace_values.is_empty() {
        return Err(Error::EmptyInput("iteration trace"));
    }
    if v_exact == 0.0 {
        return Err(Error::GapUndefined);
    }
    let total: f64 = trace_values
        .iter()
        .map(|v| ((v_exact - v) / v_exact).abs() * 100.0)
        .sum();
    Ok(total / trace_values.len() as f64)
}

/// Arithmetic mean of per-scenario gaps.
pub fn gap_over_scenarios(gaps: &[f64]) -> Result<f64> {
    if gaps.is_empty() {
        return Err(Error::EmptyInput("per-scenario gaps"));
    }
    Ok(gaps.iter().sum::<f64>() / gaps.len() as f64)
}

/// Percentage action differences between two trajectory sets, averaged over
/// scenarios, plus the scenarios skipped for a zero reference total.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDifference {
    pub charge_pct: Option<f64>,
    pub replace_pct: Option<f64>,
    /// (scenario ordinal, action dimension name) pairs with an undefined
    /// ratio, excluded from the averages.
    pub excluded: Vec<(usize, &'static str)>,
}

/// Compare total recharge/discharge and replacement counts between a
/// reference trajectory set (`a`, one inner vector per scenario) and an
/// alternative (`b`) over the same demand paths.
pub fn action_difference(a: &[Vec<Trajectory>], b: &[Vec<Trajectory>]) -> Result<ActionDifference> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::EmptyInput("trajectory sets"));
    }
    let mut excluded = Vec::new();
    let mut charge = Vec::new();
    let mut replace = Vec::new();
    for (i, (set_a, set_b)) in a.iter().zip(b).enumerate() {
        let totals = |set: &[Trajectory]| {
            set.iter().fold((0u64, 0u64), |(c, r), trj| {
                (c + trj.total_cycled(), r + trj.total_replaced())
            })
        };
        let (ca, ra) = totals(set_a);
        let (cb, rb) = totals(set_b);
        if ca == 0 {
            excluded.push((i, "charge"));
        } else {
            charge.push((cb as f64 - ca as f64).abs() / ca as f64 * 100.0);
        }
        if ra == 0 {
            excluded.push((i, "replace"));
        } else {
            replace.push((rb as f64 - ra as f64).abs() / ra as f64 * 100.0);
        }
    }
    let mean = |xs: &[f64]| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    Ok(ActionDifference {
        charge_pct: mean(&charge),
        replace_pct: mean(&replace),
        excluded,
    })
}

/// Pooled fraction of demand met: total satisfied over total demanded across
/// all epochs and paths. Vacuously one when no demand arrives.
pub fn demand_met_fraction(trajectories: &[Trajectory]) -> f64 {
    let (satisfied, demanded) = trajectories
        .iter()
        .flat_map(|t| t.steps.iter())
        .fold((0u64, 0u64), |(s, d), step| {
            (s + u64::from(step.satisfied), d + u64::from(step.demand))
        });
    if demanded == 0 {
        1.0
    } else {
        satisfied as f64 / demanded as f64
    }
}

/// Replacement activity per the sample-path analyses: the fraction of
/// decision epochs with any replacement, and the mean fraction of the fleet
/// replaced when replacing.
pub fn replacement_stats(sc: &Scenario, trajectories: &[Trajectory]) -> (f64, f64) {
    let mut epochs = 0u64;
    let mut replacing = 0u64;
    let mut replaced_fraction = 0.0;
    for step in trajectories.iter().flat_map(|t| t.steps.iter()) {
        epochs += 1;
        if step.action.replace > 0 {
            replacing += 1;
            replaced_fraction += f64::from(step.action.replace) / f64::from(sc.m);
        }
    }
    if epochs == 0 {
        return (0.0, 0.0);
    }
    let freq = replacing as f64 / epochs as f64;
    let mean_size = if replacing == 0 {
        0.0
    } else {
        replaced_fraction / replacing as f64
    };
    (freq, mean_size)
}
