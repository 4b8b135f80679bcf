//! Exact finite-horizon solvers: backward induction and its monotone variant.

use crate::error::{Error, Result};
use crate::model::{Action, CapIdx, Scenario, State};

/// Flat indexing over the full state lattice of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpace {
    m: u32,
    /// Capacity indices run `0..=cap_max` where 0 is absorbing.
    cap_max: u32,
}

impl StateSpace {
    pub fn of(sc: &Scenario) -> Self {
        Self {
            m: sc.m,
            cap_max: sc.grid.top().0,
        }
    }

    /// Build directly from dimensions (battery count, highest capacity index).
    pub fn raw(m: u32, cap_max: u32) -> Self {
        Self { m, cap_max }
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.m
    }

    #[inline]
    pub fn cap_max(&self) -> u32 {
        self.cap_max
    }

    #[inline]
    pub fn len(&self) -> usize {
        (self.m as usize + 1) * (self.cap_max as usize + 1)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, s: State) -> usize {
        debug_assert!(s.full <= self.m && s.cap.0 <= self.cap_max);
        s.full as usize * (self.cap_max as usize + 1) + s.cap.0 as usize
    }

    #[inline]
    pub fn state(&self, index: usize) -> State {
        let width = self.cap_max as usize + 1;
        State::new((index / width) as u32, CapIdx((index % width) as u32))
    }

    pub fn iter(&self) -> impl Iterator<Item = State> + '_ {
        (0..self.len()).map(|i| self.state(i))
    }

    /// Exhaustive pair scan for monotonicity under the componentwise order.
    /// Accepts a slack for roundoff in computed values.
    pub fn is_lattice_monotone(&self, table: &[f64], slack: f64) -> bool {
        debug_assert_eq!(table.len(), self.len());
        for i in 0..table.len() {
            let a = self.state(i);
            for j in 0..table.len() {
                let b = self.state(j);
                if b.dominates(a) && table[j] < table[i] - slack {
                    return false;
                }
            }
        }
        true
    }
}

/// Per-epoch value functions over the state lattice, epochs `1..=N`.
#[derive(Debug, Clone)]
pub struct ValueTable {
    space: StateSpace,
    values: Vec<Vec<f64>>,
}

impl ValueTable {
    pub fn zeroed(space: StateSpace, terminal_epoch: usize) -> Self {
        Self {
            space,
            values: vec![vec![0.0; space.len()]; terminal_epoch],
        }
    }

    #[inline]
    pub fn space(&self) -> StateSpace {
        self.space
    }

    /// Terminal epoch index N.
    #[inline]
    pub fn terminal_epoch(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn epoch(&self, t: usize) -> &[f64] {
        &self.values[t - 1]
    }

    #[inline]
    pub fn epoch_mut(&mut self, t: usize) -> &mut [f64] {
        &mut self.values[t - 1]
    }

    #[inline]
    pub fn value(&self, t: usize, s: State) -> f64 {
        self.values[t - 1][self.space.index(s)]
    }

    /// Largest absolute per-state difference across all epochs.
    pub fn max_abs_diff(&self, other: &ValueTable) -> f64 {
        self.values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Deterministic Markov decision rules for epochs `1..=N-1`.
#[derive(Debug, Clone)]
pub struct Policy {
    space: StateSpace,
    decisions: Vec<Vec<Action>>,
}

impl Policy {
    pub fn uniform(space: StateSpace, decision_epochs: usize, action: Action) -> Self {
        Self {
            space,
            decisions: vec![vec![action; space.len()]; decision_epochs],
        }
    }

    #[inline]
    pub fn space(&self) -> StateSpace {
        self.space
    }

    #[inline]
    pub fn decision_epochs(&self) -> usize {
        self.decisions.len()
    }

    #[inline]
    pub fn action(&self, t: usize, s: State) -> Action {
        self.decisions[t - 1][self.space.index(s)]
    }

    #[inline]
    pub fn set_action(&mut self, t: usize, s: State, a: Action) {
        let i = self.space.index(s);
        self.decisions[t - 1][i] = a;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProbabilityMode {
    /// Precompute every transition support once per epoch (memory heavy).
    Cached,
    /// Recompute supports at every Bellman lookup (compute heavy).
    #[default]
    OnDemand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReplacementCapMode {
    #[default]
    None,
    /// Cap the replacement search at each capacity level by the bound that
    /// keeps a monotone decision rule optimal.
    TheoremCap,
}

/// Argmax tie-breaking. There is a single deterministic rule: prefer the
/// smallest |a1|, then the smaller a1, then the smaller a2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    SmallestAction,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub probability_mode: ProbabilityMode,
    pub replacement_cap_mode: ReplacementCapMode,
    pub tie_break: TieBreak,
    /// Refuse solves whose tables (and transition cache, if enabled) would
    /// exceed this many entries.
    pub memory_budget: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            probability_mode: ProbabilityMode::default(),
            replacement_cap_mode: ReplacementCapMode::default(),
            tie_break: TieBreak::default(),
            memory_budget: 100_000_000,
        }
    }
}

impl SolveOptions {
    pub fn with_cap(mut self) -> Self {
        self.replacement_cap_mode = ReplacementCapMode::TheoremCap;
        self
    }
}

/// Relative tolerance for collecting near-optimal actions when propagating
/// the monotone search bound.
const BOUND_TIE_TOL: f64 = 1e-12;

struct Sweep<'a> {
    sc: &'a Scenario,
    space: StateSpace,
    /// Feasible actions per state in tie-break order, capped if requested.
    actions: Vec<Vec<Action>>,
    cached: Option<Vec<Vec<(usize, f64)>>>,
    /// Start of each state's slice in the flattened per-epoch cache.
    offsets: Vec<usize>,
}

impl<'a> Sweep<'a> {
    fn new(sc: &'a Scenario, opts: &SolveOptions) -> Result<Self> {
        let space = StateSpace::of(sc);
        Self::check_budget(sc, opts, space)?;
        let mut actions = Vec::with_capacity(space.len());
        let mut offsets = Vec::with_capacity(space.len() + 1);
        offsets.push(0);
        for s in space.iter() {
            let mut acts = sc.feasible_actions(s)?;
            if opts.replacement_cap_mode == ReplacementCapMode::TheoremCap && !s.cap.is_absorbing()
            {
                let bound = sc.replacement_cap(s.cap)?.limit(sc.m);
                acts.retain(|a| a.replace <= bound);
            }
            offsets.push(offsets.last().unwrap() + acts.len());
            actions.push(acts);
        }
        Ok(Self {
            sc,
            space,
            actions,
            cached: None,
            offsets,
        })
    }

    /// Size the tables (and the transition cache, if enabled) before
    /// allocating anything.
    fn check_budget(sc: &Scenario, opts: &SolveOptions, space: StateSpace) -> Result<()> {
        let required = Self::required_entries(sc, opts, space)?;
        if required > opts.memory_budget {
            return Err(Error::MemoryBudget {
                required,
                budget: opts.memory_budget,
            });
        }
        Ok(())
    }

    fn required_entries(sc: &Scenario, opts: &SolveOptions, space: StateSpace) -> Result<u64> {
        let n = sc.terminal_epoch as u64;
        let mut required = space.len() as u64 * (2 * n - 1); // value + policy tables
        if opts.probability_mode == ProbabilityMode::Cached {
            // One cache entry per reachable next state of every feasible
            // (state, action). A recharge-or-idle action keeps the full
            // stock swappable (support full+1); discharging k batteries
            // removes k of them.
            let phi = u64::from(sc.phi);
            for full in 0..=u64::from(sc.m) {
                let depleted = u64::from(sc.m) - full;
                let discharge_support: u64 =
                    (1..=full.min(phi)).map(|k| full - k + 1).sum();
                for cap in space_levels(space) {
                    let max_replace = match opts.replacement_cap_mode {
                        ReplacementCapMode::None => depleted,
                        ReplacementCapMode::TheoremCap => {
                            u64::from(sc.replacement_cap(cap)?.limit(sc.m)).min(depleted)
                        }
                    };
                    for replace in 0..=max_replace {
                        let recharges = (depleted - replace).min(phi) + 1; // incl. idle
                        required += recharges * (full + 1) + discharge_support;
                    }
                }
                required += 1; // the absorbing row's single self-transition
            }
        }
        Ok(required)
    }

    /// (Re)build the per-epoch transition cache when in cached mode.
    fn load_epoch(&mut self, t: usize, mode: ProbabilityMode) -> Result<()> {
        if mode == ProbabilityMode::OnDemand {
            return Ok(());
        }
        let mut cache = Vec::with_capacity(*self.offsets.last().unwrap());
        for (i, s) in self.space.iter().enumerate() {
            for &a in &self.actions[i] {
                let support = self.sc.transition_support(s, a, t)?;
                cache.push(
                    support
                        .into_iter()
                        .map(|(j, p)| (self.space.index(j), p))
                        .collect(),
                );
            }
        }
        self.cached = Some(cache);
        Ok(())
    }

    /// One-step lookahead value of `(s, a)` against the next-epoch table,
    /// summing transitions in ascending order of the full-battery count.
    fn q_value(
        &self,
        state_index: usize,
        action_ordinal: usize,
        s: State,
        a: Action,
        t: usize,
        next: &[f64],
    ) -> Result<f64> {
        let mut future = 0.0;
        match &self.cached {
            Some(cache) => {
                for &(j, p) in &cache[self.offsets[state_index] + action_ordinal] {
                    future += p * next[j];
                }
            }
            None => {
                for (j, p) in self.sc.transition_support(s, a, t)? {
                    future += p * next[self.space.index(j)];
                }
            }
        }
        Ok(self.sc.expected_immediate_reward(s, a, t) + future)
    }
}

fn space_levels(space: StateSpace) -> impl Iterator<Item = CapIdx> {
    (1..=space.cap_max).map(CapIdx)
}

fn solve(sc: &Scenario, opts: &SolveOptions, monotone: bool) -> Result<(ValueTable, Policy)> {
    let mut sweep = Sweep::new(sc, opts)?;
    let space = sweep.space;
    let n = sc.terminal_epoch;
    let mut values = ValueTable::zeroed(space, n);
    let mut policy = Policy::uniform(space, n - 1, Action::NONE);

    for s in space.iter() {
        let i = space.index(s);
        values.epoch_mut(n)[i] = sc.terminal_reward(s);
    }

    let mut scratch: Vec<(Action, f64)> = Vec::new();
    for t in (1..n).rev() {
        sweep.load_epoch(t, opts.probability_mode)?;
        let (head, tail) = values.values.split_at_mut(t);
        let (current, next) = (&mut head[t - 1], &tail[0][..]);

        for full in 0..=sc.m {
            // Monotone sweep: walk capacity upward per full-battery count,
            // never searching more replacements than the largest optimal
            // count at the previous (lower) capacity level.
            let mut bound = sc.m;
            for cap in (0..=space.cap_max).map(CapIdx) {
                let s = State::new(full, cap);
                let i = space.index(s);
                scratch.clear();
                for (ordinal, &a) in sweep.actions[i].iter().enumerate() {
                    if monotone && !cap.is_absorbing() && a.replace > bound {
                        continue;
                    }
                    let q = sweep.q_value(i, ordinal, s, a, t, next)?;
                    scratch.push((a, q));
                }
                // Actions are pre-sorted in tie-break order, so the first
                // strictly-best entry is the preferred argmax.
                let (mut best_a, mut best_q) = scratch[0];
                for &(a, q) in &scratch[1..] {
                    if q > best_q {
                        (best_a, best_q) = (a, q);
                    }
                }
                if monotone && !cap.is_absorbing() {
                    let tol = BOUND_TIE_TOL * best_q.abs().max(1.0);
                    bound = scratch
                        .iter()
                        .filter(|&&(_, q)| q >= best_q - tol)
                        .map(|&(a, _)| a.replace)
                        .max()
                        .unwrap_or(0);
                }
                current[i] = best_q;
                policy.decisions[t - 1][i] = best_a;
            }
        }
    }
    Ok((values, policy))
}

/// Optimal value functions and an optimal policy by backward induction.
pub fn backward_induction(sc: &Scenario, opts: &SolveOptions) -> Result<(ValueTable, Policy)> {
    solve(sc, opts, false)
}

/// Backward induction that restricts the replacement search to a monotone
/// non-increasing rule in the capacity dimension.
///
/// Exact when combined with [`ReplacementCapMode::TheoremCap`]; a heuristic
/// otherwise.
pub fn monotone_backward_induction(
    sc: &Scenario,
    opts: &SolveOptions,
) -> Result<(ValueTable, Policy)> {
    solve(sc, opts, true)
}

/// Expected total reward of a fixed policy, by backward recursion without
/// maximization.
pub fn policy_expected_value(sc: &Scenario, policy: &Policy) -> Result<ValueTable> {
    let space = StateSpace::of(sc);
    if policy.space() != space || policy.decision_epochs() != sc.decision_epochs() {
        return Err(Error::MissingDecisions {
            got: policy.decision_epochs(),
            expected: sc.decision_epochs(),
        });
    }
    let n = sc.terminal_epoch;
    let mut values = ValueTable::zeroed(space, n);
    for s in space.iter() {
        let i = space.index(s);
        values.epoch_mut(n)[i] = sc.terminal_reward(s);
    }
    for t in (1..n).rev() {
        let (head, tail) = values.values.split_at_mut(t);
        let (current, next) = (&mut head[t - 1], &tail[0][..]);
        for s in space.iter() {
            let a = policy.action(t, s);
            sc.check_action(s, a, t)?;
            let mut value = sc.expected_immediate_reward(s, a, t);
            for (j, p) in sc.transition_support(s, a, t)? {
                value += p * next[space.index(j)];
            }
            current[space.index(s)] = value;
        }
    }
    Ok(values)
}
