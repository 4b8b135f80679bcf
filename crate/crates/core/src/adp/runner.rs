//! The approximate value iteration loop and its variants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adp::projection::{monotone_projection, monotone_raising_sweep};
use crate::adp::regression::{fit_value_regression, RegressionCoeffs, RegressionSample};
use crate::error::{Error, Result};
use crate::exact::{backward_induction, SolveOptions, StateSpace};
use crate::model::{Action, CapIdx, Scenario, State};
use crate::sim::DecisionSource;
use crate::stepsize::{AdaptiveStepsize, StepsizeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdpVariant {
    /// Plain approximate value iteration: only the visited entry is updated.
    Avi,
    /// AVI with the regression-based initial table.
    AviRb,
    /// Monotone ADP: every update is projected onto the lattice order.
    Madp,
    /// Monotone ADP initialized with a hand-built monotone table.
    MadpM,
    /// Monotone ADP with the regression-based initial table.
    MadpRb,
}

impl AdpVariant {
    pub fn is_monotone(self) -> bool {
        matches!(self, AdpVariant::Madp | AdpVariant::MadpM | AdpVariant::MadpRb)
    }

    pub fn uses_regression(self) -> bool {
        matches!(self, AdpVariant::AviRb | AdpVariant::MadpRb)
    }

    pub fn name(self) -> &'static str {
        match self {
            AdpVariant::Avi => "avi",
            AdpVariant::AviRb => "avi-rb",
            AdpVariant::Madp => "madp",
            AdpVariant::MadpM => "madp-m",
            AdpVariant::MadpRb => "madp-rb",
        }
    }
}

impl std::str::FromStr for AdpVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "avi" => Ok(AdpVariant::Avi),
            "avi-rb" => Ok(AdpVariant::AviRb),
            "madp" => Ok(AdpVariant::Madp),
            "madp-m" => Ok(AdpVariant::MadpM),
            "madp-rb" => Ok(AdpVariant::MadpRb),
            other => Err(Error::InvalidScenario(format!("unknown ADP variant `{other}`"))),
        }
    }
}

/// Sizing of the small exactly-solved instances behind the regression init.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RbConfig {
    /// Batteries in the smallest instance.
    pub m_bar: u32,
    /// Decision epochs in the small instances.
    pub t_bar: usize,
    /// Additional instance sizes beyond the smallest (so `max_iterations + 1`
    /// solves in total).
    pub max_iterations: usize,
}

impl Default for RbConfig {
    fn default() -> Self {
        Self {
            m_bar: 2,
            t_bar: 48,
            max_iterations: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdpConfig {
    pub variant: AdpVariant,
    /// Core iteration budget tau.
    pub iterations: usize,
    pub stepsize: StepsizeSpec,
    pub seed: u64,
    pub rb: RbConfig,
    /// Per-epoch slope `k` of the hand-built monotone initialization.
    pub monotone_init_slope: f64,
    /// Keep per-iteration visited states in the trace.
    pub record_visits: bool,
}

impl AdpConfig {
    pub fn new(variant: AdpVariant, iterations: usize, stepsize: StepsizeSpec, seed: u64) -> Self {
        Self {
            variant,
            iterations,
            stepsize,
            seed,
            rb: RbConfig::default(),
            monotone_init_slope: 0.5,
            record_visits: false,
        }
    }

    fn validate(&self, sc: &Scenario) -> Result<()> {
        self.stepsize.validate()?;
        if self.iterations == 0 {
            return Err(Error::InvalidScenario("ADP needs at least one iteration".into()));
        }
        if self.variant.uses_regression() {
            if self.rb.m_bar == 0 || self.rb.m_bar >= sc.m {
                return Err(Error::InvalidScenario(format!(
                    "regression init starts at {} batteries, which must lie in 1..{}",
                    self.rb.m_bar, sc.m
                )));
            }
            if self.rb.max_iterations == 0 {
                return Err(Error::InvalidScenario(
                    "regression init needs at least two instance sizes to identify the \
                     battery-count coefficient"
                        .into(),
                ));
            }
            if self.rb.t_bar == 0 || self.rb.t_bar > sc.decision_epochs() {
                return Err(Error::InvalidScenario(format!(
                    "regression horizon {} must lie in 1..={}",
                    self.rb.t_bar,
                    sc.decision_epochs()
                )));
            }
        }
        Ok(())
    }
}

/// Approximate per-epoch value tables, epochs `1..=N` with the terminal
/// layer pinned to the terminal reward.
#[derive(Debug, Clone)]
pub struct ValueApprox {
    space: StateSpace,
    tables: Vec<Vec<f64>>,
    pub iterations_run: usize,
}

impl ValueApprox {
    /// All-zero decision-epoch tables with the terminal layer pinned to the
    /// terminal reward.
    pub fn empty(sc: &Scenario) -> Self {
        Self::zeroed(sc)
    }

    fn zeroed(sc: &Scenario) -> Self {
        let space = StateSpace::of(sc);
        let mut approx = Self {
            space,
            tables: vec![vec![0.0; space.len()]; sc.terminal_epoch],
            iterations_run: 0,
        };
        approx.pin_terminal(sc);
        approx
    }

    fn pin_terminal(&mut self, sc: &Scenario) {
        let n = sc.terminal_epoch;
        for s in self.space.iter() {
            let i = self.space.index(s);
            self.tables[n - 1][i] = sc.terminal_reward(s);
        }
    }

    #[inline]
    pub fn space(&self) -> StateSpace {
        self.space
    }

    #[inline]
    pub fn terminal_epoch(&self) -> usize {
        self.tables.len()
    }

    #[inline]
    pub fn epoch(&self, t: usize) -> &[f64] {
        &self.tables[t - 1]
    }

    #[inline]
    pub fn epoch_mut(&mut self, t: usize) -> &mut [f64] {
        &mut self.tables[t - 1]
    }

    #[inline]
    pub fn value(&self, t: usize, s: State) -> f64 {
        self.tables[t - 1][self.space.index(s)]
    }

    pub fn set_value(&mut self, t: usize, s: State, v: f64) {
        let i = self.space.index(s);
        self.tables[t - 1][i] = v;
    }

    /// True when every decision-epoch table respects the lattice order over
    /// the non-absorbing states. The absorbing level is pinned at zero and
    /// stays outside the order (a low-state approximation may legitimately
    /// sit below zero).
    pub fn is_lattice_monotone(&self, slack: f64) -> bool {
        let space = self.space;
        self.tables[..self.tables.len() - 1].iter().all(|table| {
            for i in 0..table.len() {
                let a = space.state(i);
                if a.cap.is_absorbing() {
                    continue;
                }
                for j in 0..table.len() {
                    let b = space.state(j);
                    if !b.cap.is_absorbing() && b.dominates(a) && table[j] < table[i] - slack {
                        return false;
                    }
                }
            }
            true
        })
    }
}

/// Per-iteration convergence record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// Approximate value of the reference start state at the first epoch.
    pub value_at_reference: f64,
    /// Stepsize applied at the iteration's first update.
    pub stepsize: f64,
}

#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    /// Visited states per iteration, when recording was requested.
    pub visits: Vec<Vec<State>>,
}

impl IterationTrace {
    pub fn reference_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.value_at_reference).collect()
    }
}

/// What the regression initialization was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionInit {
    pub coeffs: RegressionCoeffs,
    /// Battery counts of the exactly solved training instances.
    pub training_sizes: Vec<u32>,
    pub samples: usize,
}

/// Fit the linear value model to exact solutions of small instances and
/// evaluate it for the target instance.
///
/// Solves `max_iterations + 1` instances with `m_bar, m_bar+1, ...`
/// batteries over `t_bar` decision epochs, demand means scaled in proportion
/// to the instance size, fits the regression to every optimal value, then
/// makes each predicted per-epoch table monotone with one raising sweep.
pub fn regression_init(sc: &Scenario, cfg: &AdpConfig) -> Result<(ValueApprox, RegressionInit)> {
    let mut samples = Vec::new();
    let mut training_sizes = Vec::new();
    for iter in 0..=cfg.rb.max_iterations {
        let m_small = cfg.rb.m_bar + iter as u32;
        let small = shrink_scenario(sc, m_small, cfg.rb.t_bar)?;
        let (values, _) = backward_induction(&small, &SolveOptions::default())?;
        training_sizes.push(m_small);
        let space = values.space();
        for t in 1..=cfg.rb.t_bar {
            for s in space.iter() {
                let Some(capacity) = small.grid.value(s.cap) else {
                    continue;
                };
                samples.push(RegressionSample {
                    battery_count: f64::from(m_small),
                    full: f64::from(s.full),
                    capacity,
                    epoch: t as f64,
                    value: values.value(t, s),
                });
            }
        }
    }
    let coeffs = fit_value_regression(&samples)?;

    let mut approx = ValueApprox::zeroed(sc);
    let space = approx.space();
    let m = f64::from(sc.m);
    for t in 1..sc.terminal_epoch {
        let table = approx.epoch_mut(t);
        for s in space.iter() {
            if let Some(capacity) = sc.grid.value(s.cap) {
                table[space.index(s)] =
                    coeffs.predict(m, f64::from(s.full), capacity, t as f64);
            }
        }
        monotone_raising_sweep(table, space);
    }
    let report = RegressionInit {
        coeffs,
        samples: samples.len(),
        training_sizes,
    };
    Ok((approx, report))
}

/// The target scenario shrunk to a small exactly-solvable instance.
fn shrink_scenario(sc: &Scenario, m_small: u32, t_bar: usize) -> Result<Scenario> {
    let factor = f64::from(m_small) / f64::from(sc.m);
    let mut lambda_scaled = sc.demand.scaled(factor)?;
    lambda_scaled = truncate_demand(lambda_scaled, t_bar)?;
    Scenario {
        m: m_small,
        phi: sc.phi.min(m_small),
        terminal_epoch: t_bar + 1,
        grid: sc.grid.clone(),
        delta_c: sc.delta_c,
        beta: sc.beta,
        recharge_cost: sc.recharge_cost[..t_bar].to_vec(),
        discharge_revenue: sc.discharge_revenue[..t_bar].to_vec(),
        replacement_cost: sc.replacement_cost[..t_bar].to_vec(),
        demand: lambda_scaled,
    }
    .validated()
}

fn truncate_demand(demand: crate::model::DemandModel, epochs: usize) -> Result<crate::model::DemandModel> {
    use crate::model::{DemandModel, DemandSpec};
    match demand.spec() {
        DemandSpec::Poisson { lambda } => DemandModel::poisson(lambda[..epochs].to_vec()),
        DemandSpec::Explicit { pmf } => DemandModel::explicit(pmf[..epochs].to_vec()),
    }
}

/// Hand-built monotone initialization: the swap-out value of the current
/// full stock plus a state-independent term decreasing in the epoch.
fn monotone_init(sc: &Scenario, slope: f64) -> ValueApprox {
    let mut approx = ValueApprox::zeroed(sc);
    let space = approx.space();
    let n = sc.terminal_epoch;
    for t in 1..n {
        let table = approx.epoch_mut(t);
        for s in space.iter() {
            if let Ok(rho) = sc.rho(s.cap) {
                table[space.index(s)] = rho * f64::from(s.full) + slope * (n - t) as f64;
            }
        }
    }
    approx
}

/// An ADP run in progress; step it manually or drive it to completion.
pub struct AdpRunner<'a> {
    sc: &'a Scenario,
    cfg: AdpConfig,
    approx: ValueApprox,
    rng: ChaCha8Rng,
    adaptive: Option<AdaptiveStepsize>,
    trace: IterationTrace,
    reference: State,
    /// Scratch buffer of feasible actions per state, reused across steps.
    actions: Vec<Vec<Action>>,
}

impl<'a> AdpRunner<'a> {
    pub fn new(sc: &'a Scenario, cfg: AdpConfig) -> Result<Self> {
        cfg.validate(sc)?;
        let approx = match cfg.variant {
            AdpVariant::Avi | AdpVariant::Madp => ValueApprox::zeroed(sc),
            AdpVariant::MadpM => monotone_init(sc, cfg.monotone_init_slope),
            AdpVariant::AviRb | AdpVariant::MadpRb => regression_init(sc, &cfg)?.0,
        };
        let adaptive = match cfg.stepsize {
            StepsizeSpec::Adaptive { inner_w } => Some(AdaptiveStepsize::new(inner_w)),
            _ => None,
        };
        let space = approx.space();
        let actions = space
            .iter()
            .map(|s| sc.feasible_actions(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sc,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            adaptive,
            trace: IterationTrace::default(),
            reference: sc.reference_state(),
            approx,
            cfg,
            actions,
        })
    }

    pub fn values(&self) -> &ValueApprox {
        &self.approx
    }

    pub fn trace(&self) -> &IterationTrace {
        &self.trace
    }

    pub fn iterations_run(&self) -> usize {
        self.approx.iterations_run
    }

    /// Uniform draw over the non-absorbing states.
    fn random_initial_state(&mut self) -> State {
        let full = self.rng.random_range(0..=self.sc.m);
        let cap = self.rng.random_range(1..=self.approx.space().cap_max());
        State::new(full, CapIdx(cap))
    }

    /// Run one core iteration: walk one trajectory forward, smoothing the
    /// observed one-step lookahead value into the table at every visited
    /// state (with monotone projection for the MADP variants).
    pub fn step(&mut self) {
        let n = self.approx.iterations_run + 1;
        let space = self.approx.space();
        let mut state = self.random_initial_state();
        let mut visits = self
            .cfg
            .record_visits
            .then(|| Vec::with_capacity(self.sc.decision_epochs()));
        let mut first_alpha = 1.0;
        for t in 1..self.sc.terminal_epoch {
            if let Some(v) = visits.as_mut() {
                v.push(state);
            }
            if state.cap.is_absorbing() {
                // Value pinned at zero; the station is frozen.
                continue;
            }
            let demand = self.sc.demand.sample(t, &mut self.rng);
            // Greedy action against the sampled next state's value.
            let state_index = space.index(state);
            let mut best_q = f64::NEG_INFINITY;
            let mut best_next = state;
            for &a in &self.actions[state_index] {
                let next = State::new(
                    self.sc.next_full(state, a, demand),
                    self.sc.next_capacity(state, a),
                );
                let q = self.sc.expected_immediate_reward(state, a, t)
                    + self.approx.value(t + 1, next);
                if q > best_q {
                    best_q = q;
                    best_next = next;
                }
            }
            let observed = best_q;
            let previous = self.approx.value(t, state);
            let alpha = match self.cfg.stepsize.deterministic_alpha(n) {
                Some(a) => a,
                None => self
                    .adaptive
                    .as_mut()
                    .expect("adaptive stats present")
                    .alpha(t, state_index, observed, previous),
            };
            if t == 1 {
                first_alpha = alpha;
            }
            let smoothed = (1.0 - alpha) * previous + alpha * observed;
            if self.cfg.variant.is_monotone() {
                monotone_projection(self.approx.epoch_mut(t), space, state, smoothed);
            } else {
                self.approx.set_value(t, state, smoothed);
            }
            state = best_next;
        }
        self.approx.iterations_run = n;
        self.trace.records.push(IterationRecord {
            value_at_reference: self.approx.value(1, self.reference),
            stepsize: first_alpha,
        });
        if let Some(v) = visits {
            self.trace.visits.push(v);
        }
    }

    pub fn run_to_end(&mut self) {
        while self.approx.iterations_run < self.cfg.iterations {
            self.step();
        }
    }

    pub fn finish(self) -> (ValueApprox, IterationTrace) {
        (self.approx, self.trace)
    }
}

/// Run the configured variant for its full iteration budget.
pub fn adp_run(sc: &Scenario, cfg: AdpConfig) -> Result<(ValueApprox, IterationTrace)> {
    let mut runner = AdpRunner::new(sc, cfg)?;
    runner.run_to_end();
    Ok(runner.finish())
}

/// Greedy one-step-lookahead rule over an approximate value table, with the
/// same tie-break as the exact solvers. Used to simulate ADP output without
/// materializing a policy table.
pub struct GreedyPolicy<'a> {
    pub values: &'a ValueApprox,
}

impl DecisionSource for GreedyPolicy<'_> {
    fn decide(&self, sc: &Scenario, t: usize, s: State) -> Result<Action> {
        let space = self.values.space();
        let next_table = self.values.epoch(t + 1);
        let mut best: Option<(f64, Action)> = None;
        for a in sc.feasible_actions(s)? {
            let mut q = sc.expected_immediate_reward(s, a, t);
            for (j, p) in sc.transition_support(s, a, t)? {
                q += p * next_table[space.index(j)];
            }
            // Actions arrive in tie-break order; replace only on strict
            // improvement.
            if best.is_none_or(|(bq, _)| q > bq) {
                best = Some((q, a));
            }
        }
        Ok(best.expect("feasible action always exists").1)
    }
}
