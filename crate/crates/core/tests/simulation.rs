//! Simulation-level checks that close the loop between path rollouts and
//! the backward-recursion evaluators.

use sairp_core::adp::{adp_run, AdpConfig, AdpVariant, GreedyPolicy, RbConfig};
use sairp_core::exact::{backward_induction, policy_expected_value, Policy, SolveOptions, StateSpace};
use sairp_core::experiments::{builtin_point, scenario_from_point, BaseData};
use sairp_core::model::{Action, CapacityGrid, DemandModel, Scenario};
use sairp_core::sim::{demand_met_fraction, sample_demand_paths, simulate_policy, DemandPath};
use sairp_core::stepsize::StepsizeSpec;

fn tiny() -> Scenario {
    Scenario {
        m: 2,
        phi: 2,
        terminal_epoch: 4,
        grid: CapacityGrid::new(0.8, 0.1).unwrap(),
        delta_c: 0.06,
        beta: 2.2,
        recharge_cost: vec![0.1, 0.3, 0.2],
        discharge_revenue: vec![0.1, 0.3, 0.2],
        replacement_cost: vec![0.8, 0.8, 0.8],
        demand: DemandModel::explicit(vec![
            vec![0.5, 0.25, 0.25],
            vec![0.125, 0.875],
            vec![0.75, 0.25],
        ])
        .unwrap(),
    }
    .validated()
    .unwrap()
}

/// Enumerate every demand path with its probability.
fn all_paths(sc: &Scenario) -> Vec<(DemandPath, f64)> {
    let supports: Vec<Vec<(u32, f64)>> = (1..sc.terminal_epoch)
        .map(|t| {
            (0..=sc.m)
                .map(|d| (d, sc.demand.pmf(t, d)))
                .filter(|&(_, p)| p > 0.0)
                .collect()
        })
        .collect();
    let mut paths = vec![(Vec::new(), 1.0)];
    for epoch_support in &supports {
        let mut next = Vec::with_capacity(paths.len() * epoch_support.len());
        for (demands, prob) in &paths {
            for &(d, p) in epoch_support {
                let mut extended = demands.clone();
                extended.push(d);
                next.push((extended, prob * p));
            }
        }
        paths = next;
    }
    paths
        .into_iter()
        .map(|(demands, prob)| (DemandPath { demands, seed: 0 }, prob))
        .collect()
}

#[test]
fn exhaustive_path_mean_of_simulated_rewards_equals_the_recursion() {
    let sc = tiny();
    let (values, policy) = backward_induction(&sc, &SolveOptions::default()).unwrap();
    let evaluated = policy_expected_value(&sc, &policy).unwrap();
    let paths = all_paths(&sc);
    let total_prob: f64 = paths.iter().map(|(_, p)| p).sum();
    assert!((total_prob - 1.0).abs() < 1e-12);
    for start in values.space().iter() {
        let mean: f64 = paths
            .iter()
            .map(|(path, prob)| {
                prob * simulate_policy(&sc, &policy, path, Some(start))
                    .unwrap()
                    .total_reward
            })
            .sum();
        assert!(
            (mean - evaluated.value(1, start)).abs() <= 1e-9,
            "start {start:?}: path mean {mean} vs recursion {}",
            evaluated.value(1, start)
        );
        assert!(
            (mean - values.value(1, start)).abs() <= 1e-9,
            "optimal policy must attain the optimal value at {start:?}"
        );
    }
}

#[test]
fn rb_policy_meets_at_least_as_much_demand_as_doing_nothing() {
    let base = BaseData::builtin();
    let sc = scenario_from_point(&builtin_point(15).unwrap(), &base, 4, 49).unwrap();
    let mut cfg = AdpConfig::new(
        AdpVariant::MadpRb,
        10_000,
        StepsizeSpec::Harmonic { w: 2500.0 },
        4,
    );
    cfg.rb = RbConfig {
        m_bar: 2,
        t_bar: 48,
        max_iterations: 2,
    };
    let (approx, _) = adp_run(&sc, cfg).unwrap();
    let greedy = GreedyPolicy { values: &approx };
    let idle = Policy::uniform(StateSpace::of(&sc), sc.decision_epochs(), Action::NONE);

    let paths = sample_demand_paths(&sc, 200, 77);
    let rb: Vec<_> = paths
        .iter()
        .map(|p| simulate_policy(&sc, &greedy, p, None).unwrap())
        .collect();
    let none: Vec<_> = paths
        .iter()
        .map(|p| simulate_policy(&sc, &idle, p, None).unwrap())
        .collect();
    let met_rb = demand_met_fraction(&rb);
    let met_none = demand_met_fraction(&none);
    assert!(
        met_rb >= met_none,
        "RB policy met {met_rb:.3}, doing nothing met {met_none:.3}"
    );
    assert!(met_none < 1.0, "idle policy should eventually run dry");
}
