//! Brute-force oracles for the exact solvers on tiny instances.
//!
//! The oracle reimplements the dynamics from scratch on raw capacity values
//! (no grid indices, no shared code with the library) and computes optimal
//! values by exhaustive contingency search: every action choice at every
//! reachable history, every demand outcome, no memoization. Policy values
//! are recomputed by full demand-path enumeration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sairp_core::exact::{backward_induction, policy_expected_value, Policy, SolveOptions};
use sairp_core::model::{Action, CapacityGrid, DemandModel, Scenario, State};

/// Independent model parameters mirroring a tiny scenario.
struct Oracle {
    m: i64,
    phi: i64,
    theta: f64,
    eps: f64,
    delta_c: f64,
    beta: f64,
    k: Vec<f64>,
    j: Vec<f64>,
    l: Vec<f64>,
    /// Per-epoch finite demand pmf.
    pmf: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, PartialEq, Debug)]
struct OState {
    full: i64,
    /// Raw capacity value; `None` is the absorbing condition.
    cap: Option<f64>,
}

impl Oracle {
    fn snap(&self, raw: f64) -> Option<f64> {
        if raw < self.theta {
            return None;
        }
        let steps = ((1.0 - self.theta) / self.eps).round();
        let k = ((raw - self.theta) / self.eps + 0.5).floor().clamp(0.0, steps);
        Some(self.theta + k * self.eps)
    }

    fn rho(&self, cap: f64) -> f64 {
        self.beta * (1.0 + cap - 2.0 * self.theta) / (1.0 - self.theta)
    }

    fn actions(&self, s: OState) -> Vec<(i64, i64)> {
        let Some(_) = s.cap else {
            return vec![(0, 0)];
        };
        let mut out = Vec::new();
        for a2 in 0..=(self.m - s.full) {
            let lo = -(s.full.min(self.phi));
            let hi = (self.m - s.full - a2).min(self.phi);
            for a1 in lo..=hi {
                out.push((a1, a2));
            }
        }
        out
    }

    fn step(&self, s: OState, (a1, a2): (i64, i64), d: i64, t: usize) -> (OState, f64) {
        let Some(cap) = s.cap else {
            return (s, 0.0);
        };
        let plus = a1.max(0);
        let minus = (-a1).min(s.full).max(0);
        let swapped = d.min(s.full - minus);
        let full = s.full + a2 + plus - minus - swapped;
        let cycled = (plus + minus) as f64;
        let raw = ((cap - self.delta_c) * cycled
            + a2 as f64
            + cap * (self.m as f64 - cycled - a2 as f64))
            / self.m as f64;
        let reward = self.rho(cap) * swapped as f64 - self.k[t - 1] * plus as f64
            + self.j[t - 1] * minus as f64
            - self.l[t - 1] * a2 as f64;
        (
            OState {
                full,
                cap: self.snap(raw),
            },
            reward,
        )
    }

    fn terminal(&self, s: OState) -> f64 {
        match s.cap {
            Some(cap) => self.rho(cap) * s.full as f64,
            None => 0.0,
        }
    }

    /// Optimal expected total reward by exhaustive contingency search.
    fn best_value(&self, t: usize, s: OState) -> f64 {
        if t > self.pmf.len() {
            return self.terminal(s);
        }
        let mut best = f64::NEG_INFINITY;
        for a in self.actions(s) {
            let mut expected = 0.0;
            for (d, &p) in self.pmf[t - 1].iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let (next, reward) = self.step(s, a, d as i64, t);
                expected += p * (reward + self.best_value(t + 1, next));
            }
            best = best.max(expected);
        }
        best
    }

    /// Expected total reward of a fixed decision rule by enumerating every
    /// demand path with its probability.
    fn policy_value(&self, s0: OState, decide: &dyn Fn(usize, OState) -> (i64, i64)) -> f64 {
        fn walk(
            o: &Oracle,
            t: usize,
            s: OState,
            prob: f64,
            earned: f64,
            decide: &dyn Fn(usize, OState) -> (i64, i64),
        ) -> f64 {
            if t > o.pmf.len() {
                return prob * (earned + o.terminal(s));
            }
            let a = decide(t, s);
            let mut total = 0.0;
            for (d, &p) in o.pmf[t - 1].iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let (next, reward) = o.step(s, a, d as i64, t);
                total += walk(o, t + 1, next, prob * p, earned + reward, decide);
            }
            total
        }
        walk(self, 1, s0, 1.0, 0.0, decide)
    }
}

/// A random tiny instance (M <= 2, N <= 4, demand support <= 2) as both a
/// library scenario and its independent oracle twin.
fn random_tiny(seed: u64) -> (Scenario, Oracle) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=2u32);
    let phi = rng.random_range(1..=m);
    let epochs = rng.random_range(1..=3usize);
    let theta = [0.7, 0.8, 0.9][rng.random_range(0..3usize)];
    let steps = rng.random_range(1..=2u32);
    let eps = (1.0 - theta) / f64::from(steps);
    let delta_c = rng.random_range(0.01..0.3);
    let beta = rng.random_range(1.0..3.0);
    let k: Vec<f64> = (0..epochs).map(|_| rng.random_range(0.0..0.5)).collect();
    let j: Vec<f64> = (0..epochs).map(|_| rng.random_range(0.0..0.5)).collect();
    let l: Vec<f64> = (0..epochs).map(|_| rng.random_range(0.1..3.0)).collect();
    // Two-point dyadic pmfs so rows sum to one exactly.
    let pmf: Vec<Vec<f64>> = (0..epochs)
        .map(|_| {
            let hit = rng.random_range(1..8u32) as f64 / 8.0;
            let at = rng.random_range(1..=2usize);
            let mut row = vec![0.0; at + 1];
            row[0] = 1.0 - hit;
            row[at] = hit;
            row
        })
        .collect();
    let sc = Scenario {
        m,
        phi,
        terminal_epoch: epochs + 1,
        grid: CapacityGrid::new(theta, eps).unwrap(),
        delta_c,
        beta,
        recharge_cost: k.clone(),
        discharge_revenue: j.clone(),
        replacement_cost: l.clone(),
        demand: DemandModel::explicit(pmf.clone()).unwrap(),
    }
    .validated()
    .unwrap();
    let oracle = Oracle {
        m: i64::from(m),
        phi: i64::from(phi),
        theta,
        eps,
        delta_c,
        beta,
        k,
        j,
        l,
        pmf,
    };
    (sc, oracle)
}

fn oracle_state(sc: &Scenario, s: State) -> OState {
    OState {
        full: i64::from(s.full),
        cap: sc.grid.value(s.cap),
    }
}

#[test]
fn bi_matches_exhaustive_contingency_search() {
    for seed in 0..12u64 {
        let (sc, oracle) = random_tiny(seed);
        let (values, _) = backward_induction(&sc, &SolveOptions::default()).unwrap();
        let space = values.space();
        for s in space.iter() {
            let expect = oracle.best_value(1, oracle_state(&sc, s));
            let got = values.value(1, s);
            assert!(
                (expect - got).abs() <= 1e-9,
                "seed {seed}, start {s:?}: oracle {expect} vs BI {got}"
            );
        }
    }
}

#[test]
fn policy_evaluation_matches_demand_path_enumeration() {
    for seed in 0..12u64 {
        let (sc, oracle) = random_tiny(seed);
        let (_, policy) = backward_induction(&sc, &SolveOptions::default()).unwrap();
        let evaluated = policy_expected_value(&sc, &policy).unwrap();
        let space = evaluated.space();
        let decide = |t: usize, os: OState| -> (i64, i64) {
            let cap = match os.cap {
                Some(v) => sc.grid.index_of(v).unwrap(),
                None => sairp_core::model::CapIdx::ABSORBING,
            };
            let a = policy.action(t, State::new(os.full as u32, cap));
            (i64::from(a.charge), i64::from(a.replace))
        };
        for s in space.iter() {
            let expect = oracle.policy_value(oracle_state(&sc, s), &decide);
            let got = evaluated.value(1, s);
            assert!(
                (expect - got).abs() <= 1e-9,
                "seed {seed}, start {s:?}: paths {expect} vs recursion {got}"
            );
        }
    }
}

/// An arbitrary (non-optimal) fixed rule must also agree between the two
/// evaluation routes.
#[test]
fn arbitrary_policy_agrees_between_routes() {
    for seed in 20..26u64 {
        let (sc, oracle) = random_tiny(seed);
        let space = sairp_core::exact::StateSpace::of(&sc);
        let mut policy = Policy::uniform(space, sc.decision_epochs(), Action::NONE);
        // Recharge-one-when-possible rule.
        for t in 1..sc.terminal_epoch {
            for s in space.iter() {
                if !s.cap.is_absorbing() && s.full < sc.m {
                    policy.set_action(t, s, Action::new(1, 0));
                }
            }
        }
        let evaluated = policy_expected_value(&sc, &policy).unwrap();
        let decide = |t: usize, os: OState| -> (i64, i64) {
            let cap = match os.cap {
                Some(v) => sc.grid.index_of(v).unwrap(),
                None => sairp_core::model::CapIdx::ABSORBING,
            };
            let a = policy.action(t, State::new(os.full as u32, cap));
            (i64::from(a.charge), i64::from(a.replace))
        };
        for s in space.iter() {
            let expect = oracle.policy_value(oracle_state(&sc, s), &decide);
            let got = evaluated.value(1, s);
            assert!(
                (expect - got).abs() <= 1e-9,
                "seed {seed}, start {s:?}: paths {expect} vs recursion {got}"
            );
        }
    }
}
