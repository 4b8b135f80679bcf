//! The four subcommands: solve, simulate, experiment, compare.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use sairp_core::adp::{adp_run, AdpConfig, GreedyPolicy, IterationTrace, ValueApprox};
use sairp_core::exact::{
    backward_induction, monotone_backward_induction, Policy, SolveOptions, ValueTable,
};
use sairp_core::experiments::ScenarioPoint;
use sairp_core::model::Scenario;
use sairp_core::sim::{
    self, demand_met_fraction, gap_over_iterations, optimality_gap, sample_demand_paths,
    simulate_policy, DecisionSource, DemandPath, Trajectory,
};

use crate::artifacts::{
    policy_csv, read_policy_csv, read_values_csv, trace_csv, trajectory_csv, value_approx_csv,
    value_table_csv, write_atomic,
};
use crate::config::{RunConfig, SolverSpec};

fn solve_options(cap: bool) -> SolveOptions {
    if cap {
        SolveOptions::default().with_cap()
    } else {
        SolveOptions::default()
    }
}

fn adp_config(cfg: &RunConfig, variant: sairp_core::adp::AdpVariant, seed: u64) -> Result<AdpConfig> {
    let mut adp = AdpConfig::new(variant, cfg.tau(), cfg.stepsize_spec()?, seed);
    adp.rb = cfg.rb_config();
    if let Some(k) = cfg.init_slope {
        adp.monotone_init_slope = k;
    }
    Ok(adp)
}

enum Solved {
    Exact(ValueTable, Policy),
    Approx(ValueApprox, IterationTrace),
}

fn run_solver(sc: &Scenario, cfg: &RunConfig, spec: SolverSpec, seed: u64) -> Result<Solved> {
    match spec {
        SolverSpec::Bi { cap } => {
            let (values, policy) = backward_induction(sc, &solve_options(cap))?;
            Ok(Solved::Exact(values, policy))
        }
        SolverSpec::Mbi { cap } => {
            let (values, policy) = monotone_backward_induction(sc, &solve_options(cap))?;
            Ok(Solved::Exact(values, policy))
        }
        SolverSpec::Adp(variant) => {
            let (values, trace) = adp_run(sc, adp_config(cfg, variant, seed)?)?;
            Ok(Solved::Approx(values, trace))
        }
    }
}

/// Solve one scenario and write its artifacts. Prints the value of the
/// reference start state.
pub fn cmd_solve(cfg: &RunConfig) -> Result<()> {
    let sc = cfg.build_scenario()?;
    let out = cfg.out_root();
    let spec = cfg.solver_spec()?;
    let reference = sc.reference_state();
    match run_solver(&sc, cfg, spec, cfg.seed())? {
        Solved::Exact(values, policy) => {
            write_atomic(&out.join("values.csv"), &value_table_csv(&sc, &values))?;
            write_atomic(&out.join("policy.csv"), &policy_csv(&sc, &policy))?;
            println!("V1(reference) = {}", values.value(1, reference));
        }
        Solved::Approx(values, trace) => {
            write_atomic(
                &out.join("values_approx.csv"),
                &value_approx_csv(&sc, &values),
            )?;
            write_atomic(&out.join("trace.csv"), &trace_csv(&trace))?;
            println!("V1(reference) = {}", values.value(1, reference));
        }
    }
    println!("artifacts written to {}", out.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct SimulationMetrics {
    paths: usize,
    mean_total_reward: f64,
    demand_met_fraction: f64,
    replacement_epoch_fraction: f64,
    mean_fraction_replaced_when_replacing: f64,
}

fn simulate_set(
    sc: &Scenario,
    source: &dyn DecisionSource,
    paths: &[DemandPath],
) -> Result<Vec<Trajectory>> {
    paths
        .iter()
        .map(|p| Ok(simulate_policy(sc, source, p, None)?))
        .collect()
}

/// Simulate a previously solved policy or value artifact.
pub fn cmd_simulate(
    cfg: &RunConfig,
    policy_path: Option<&Path>,
    values_path: Option<&Path>,
) -> Result<()> {
    let sc = cfg.build_scenario()?;
    match (policy_path, values_path) {
        (Some(p), None) => {
            let policy = read_policy_csv(p, &sc)?;
            simulate_and_report(cfg, &sc, &policy)
        }
        (None, Some(v)) => {
            let values = read_values_csv(v, &sc)?;
            let greedy = GreedyPolicy { values: &values };
            simulate_and_report(cfg, &sc, &greedy)
        }
        _ => bail!(
            "simulate needs exactly one of --policy <policy.csv> or --values <values_approx.csv>"
        ),
    }
}

fn simulate_and_report(cfg: &RunConfig, sc: &Scenario, source: &dyn DecisionSource) -> Result<()> {
    let out = cfg.out_root();
    let paths = if cfg.mean_demand.unwrap_or(false) {
        vec![sim::mean_demand_path(sc)]
    } else {
        let count = cfg
            .paths
            .context("simulate needs --paths <count> or --mean-demand")?;
        if count == 0 {
            bail!("path count must be positive");
        }
        sample_demand_paths(sc, count, cfg.seed())
    };
    let trajectories = simulate_set(sc, source, &paths)?;

    write_atomic(
        &out.join("trajectory.csv"),
        &trajectory_csv(sc, &trajectories[0]),
    )?;
    let (freq, size) = sim::replacement_stats(sc, &trajectories);
    let metrics = SimulationMetrics {
        paths: trajectories.len(),
        mean_total_reward: trajectories.iter().map(|t| t.total_reward).sum::<f64>()
            / trajectories.len() as f64,
        demand_met_fraction: demand_met_fraction(&trajectories),
        replacement_epoch_fraction: freq,
        mean_fraction_replaced_when_replacing: size,
    };
    write_atomic(
        &out.join("metrics.json"),
        &(serde_json::to_string_pretty(&metrics)? + "\n"),
    )?;
    println!(
        "{} path(s): mean total reward {:.4}, demand met {:.2}%",
        metrics.paths,
        metrics.mean_total_reward,
        100.0 * metrics.demand_met_fraction
    );
    println!("artifacts written to {}", out.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct ScenarioRow {
    scenario: u32,
    method: String,
    stepsize: String,
    gap_pct: Option<f64>,
    value_reference: f64,
    iteration_gap_pct: Option<f64>,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct ExperimentSummary {
    scenarios: usize,
    exact_reference: String,
    /// Mean final-value optimality gap per method, over scenarios.
    mean_gap_pct: BTreeMap<String, f64>,
    /// Mean per-iteration optimality gap per method, over scenarios.
    mean_iteration_gap_pct: BTreeMap<String, f64>,
    failures: Vec<String>,
}

/// Run scenarios x solvers, with backward induction as the exactness
/// reference, and emit `gaps.csv`, per-scenario convergence traces, and an
/// aggregate summary.
pub fn cmd_experiment(cfg: &RunConfig) -> Result<()> {
    let points = cfg.scenario_points()?;
    if points.is_empty() {
        bail!("experiment needs at least one scenario");
    }
    let solvers: Vec<String> = cfg
        .solvers
        .clone()
        .unwrap_or_else(|| vec!["bi".into(), "mbi:cap".into(), "adp:madp-rb".into()]);
    for s in &solvers {
        crate::config::parse_solver(s)?;
    }
    let out = cfg.out_root();
    std::fs::create_dir_all(out.join("convergence"))?;
    let stepsize_label = cfg.stepsize.clone().unwrap_or_else(|| "harmonic:w=25000".into());

    let results: Vec<ScenarioOutcome> = points
        .par_iter()
        .map(|pt| run_experiment_scenario(cfg, pt, &solvers, &stepsize_label))
        .collect();

    let mut gaps = String::from("scenario,method,stepsize,gap_pct\n");
    let mut per_method_gap: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut per_method_iter_gap: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut failures = Vec::new();
    for (pt, rows, traces) in &results {
        for row in rows {
            match (&row.error, row.gap_pct) {
                (None, Some(gap)) => {
                    use std::fmt::Write as _;
                    let _ = writeln!(
                        gaps,
                        "{},{},{},{gap}",
                        row.scenario, row.method, row.stepsize
                    );
                    per_method_gap.entry(row.method.clone()).or_default().push(gap);
                    if let Some(ig) = row.iteration_gap_pct {
                        per_method_iter_gap
                            .entry(row.method.clone())
                            .or_default()
                            .push(ig);
                    }
                }
                (Some(err), _) => {
                    failures.push(format!("scenario {}: {}: {err}", row.scenario, row.method));
                }
                (None, None) => {}
            }
        }
        let mut convergence = String::from("iteration,method,value_at_reference,stepsize\n");
        for (method, trace) in traces {
            use std::fmt::Write as _;
            for (i, r) in trace.records.iter().enumerate() {
                let _ = writeln!(
                    convergence,
                    "{},{method},{},{}",
                    i + 1,
                    r.value_at_reference,
                    r.stepsize
                );
            }
        }
        write_atomic(
            &out.join("convergence").join(format!("scenario_{:02}.csv", pt.id)),
            &convergence,
        )?;
    }
    write_atomic(&out.join("gaps.csv"), &gaps)?;

    let mean = |m: &BTreeMap<String, Vec<f64>>| -> BTreeMap<String, f64> {
        m.iter()
            .map(|(k, v)| (k.clone(), v.iter().sum::<f64>() / v.len() as f64))
            .collect()
    };
    let summary = ExperimentSummary {
        scenarios: points.len(),
        exact_reference: "bi".into(),
        mean_gap_pct: mean(&per_method_gap),
        mean_iteration_gap_pct: mean(&per_method_iter_gap),
        failures: failures.clone(),
    };
    write_atomic(
        &out.join("summary.json"),
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    println!(
        "{} scenario(s), {} solver(s); artifacts in {}",
        points.len(),
        solvers.len(),
        out.display()
    );
    for (method, gap) in &summary.mean_gap_pct {
        println!("  mean gap {method}: {gap:.4}%");
    }
    if !failures.is_empty() {
        bail!("{} run(s) failed; see summary.json", failures.len());
    }
    Ok(())
}

/// Rows plus the labeled convergence traces for one scenario.
type ScenarioOutcome = (ScenarioPoint, Vec<ScenarioRow>, Vec<(String, IterationTrace)>);

fn run_experiment_scenario(
    cfg: &RunConfig,
    pt: &ScenarioPoint,
    solvers: &[String],
    stepsize_label: &str,
) -> ScenarioOutcome {
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    let build = || -> Result<(Scenario, f64)> {
        let base = cfg.base_data()?;
        let sc = sairp_core::experiments::scenario_from_point(
            pt,
            &base,
            cfg.m(),
            cfg.decision_epochs() + 1,
        )?;
        let (bi_values, _) = backward_induction(&sc, &SolveOptions::default())?;
        let v_exact = bi_values.value(1, sc.reference_state());
        Ok((sc, v_exact))
    };
    let (sc, v_exact) = match build() {
        Ok(x) => x,
        Err(e) => {
            rows.push(ScenarioRow {
                scenario: pt.id,
                method: "bi".into(),
                stepsize: "-".into(),
                gap_pct: None,
                value_reference: f64::NAN,
                iteration_gap_pct: None,
                error: Some(format!("{e:#}")),
            });
            return (*pt, rows, traces);
        }
    };
    // Per-scenario seed keeps scenarios independent and the sweep
    // order-insensitive.
    let seed = cfg.seed().wrapping_add(u64::from(pt.id));
    for solver in solvers {
        let spec = crate::config::parse_solver(solver).expect("validated upstream");
        let label = solver.clone();
        let stepsize = if spec.is_exact() { "-".to_string() } else { stepsize_label.to_string() };
        match run_solver(&sc, cfg, spec, seed) {
            Ok(Solved::Exact(values, _)) => {
                let v = values.value(1, sc.reference_state());
                rows.push(ScenarioRow {
                    scenario: pt.id,
                    method: label,
                    stepsize,
                    gap_pct: optimality_gap(v_exact, v).ok(),
                    value_reference: v,
                    iteration_gap_pct: None,
                    error: None,
                });
            }
            Ok(Solved::Approx(values, trace)) => {
                let v = values.value(1, sc.reference_state());
                let iteration_gap =
                    gap_over_iterations(&trace.reference_values(), v_exact).ok();
                rows.push(ScenarioRow {
                    scenario: pt.id,
                    method: label.clone(),
                    stepsize,
                    gap_pct: optimality_gap(v_exact, v).ok(),
                    value_reference: v,
                    iteration_gap_pct: iteration_gap,
                    error: None,
                });
                traces.push((label, trace));
            }
            Err(e) => {
                rows.push(ScenarioRow {
                    scenario: pt.id,
                    method: label,
                    stepsize,
                    gap_pct: None,
                    value_reference: f64::NAN,
                    iteration_gap_pct: None,
                    error: Some(format!("{e:#}")),
                });
            }
        }
    }
    (*pt, rows, traces)
}

#[derive(Debug, Serialize)]
struct CompareReport {
    scenario: u32,
    solver_a: String,
    solver_b: String,
    paths: usize,
    value_reference_a: f64,
    value_reference_b: f64,
    mean_total_reward_a: f64,
    mean_total_reward_b: f64,
    demand_met_a: f64,
    demand_met_b: f64,
    /// Percent difference in total recharge/discharge and replacement
    /// actions of b relative to a.
    charge_action_difference_pct: Option<f64>,
    replace_action_difference_pct: Option<f64>,
    excluded_dimensions: Vec<String>,
}

/// Solve the scenario with two solver specs and compare their policies on a
/// common set of demand paths.
pub fn cmd_compare(cfg: &RunConfig, solver_a: &str, solver_b: &str) -> Result<()> {
    let sc = cfg.build_scenario()?;
    let out = cfg.out_root();
    let paths = sample_demand_paths(&sc, cfg.paths.unwrap_or(100), cfg.seed());

    let run = |spec_text: &str| -> Result<(f64, Vec<Trajectory>)> {
        let spec = crate::config::parse_solver(spec_text)?;
        match run_solver(&sc, cfg, spec, cfg.seed())? {
            Solved::Exact(values, policy) => {
                let v = values.value(1, sc.reference_state());
                Ok((v, simulate_set(&sc, &policy, &paths)?))
            }
            Solved::Approx(values, _) => {
                let v = values.value(1, sc.reference_state());
                let greedy = GreedyPolicy { values: &values };
                Ok((v, simulate_set(&sc, &greedy, &paths)?))
            }
        }
    };
    let (value_a, set_a) = run(solver_a)?;
    let (value_b, set_b) = run(solver_b)?;
    let diff = sim::action_difference(std::slice::from_ref(&set_a), std::slice::from_ref(&set_b))?;
    let mean_reward =
        |set: &[Trajectory]| set.iter().map(|t| t.total_reward).sum::<f64>() / set.len() as f64;
    let report = CompareReport {
        scenario: cfg.scenario_point()?.id,
        solver_a: solver_a.into(),
        solver_b: solver_b.into(),
        paths: paths.len(),
        value_reference_a: value_a,
        value_reference_b: value_b,
        mean_total_reward_a: mean_reward(&set_a),
        mean_total_reward_b: mean_reward(&set_b),
        demand_met_a: demand_met_fraction(&set_a),
        demand_met_b: demand_met_fraction(&set_b),
        charge_action_difference_pct: diff.charge_pct,
        replace_action_difference_pct: diff.replace_pct,
        excluded_dimensions: diff
            .excluded
            .iter()
            .map(|(_, dim)| format!("{dim} (zero reference total)"))
            .collect(),
    };
    write_atomic(
        &out.join("compare.json"),
        &(serde_json::to_string_pretty(&report)? + "\n"),
    )?;
    println!(
        "{}: V1 {:.4} | {}: V1 {:.4}",
        solver_a, value_a, solver_b, value_b
    );
    println!("artifacts written to {}", out.display());
    Ok(())
}
