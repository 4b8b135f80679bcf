//! File artifacts: deterministic CSV/JSON writers and the matching readers.
//!
//! Floats are written with Rust's shortest round-trip formatting, so files
//! are byte-stable across runs and parse back to identical values.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

use sairp_core::exact::{Policy, StateSpace, ValueTable};
use sairp_core::model::{Action, CapIdx, Scenario, State};
use sairp_core::sim::Trajectory;
use sairp_core::adp::{IterationTrace, ValueApprox};

/// Write via a temp file and rename, so readers never see partial output.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn values_csv(sc: &Scenario, epochs: usize, value: impl Fn(usize, State) -> f64) -> String {
    let space = StateSpace::of(sc);
    let mut out = String::from("t,full,cap,cap_value,value\n");
    for t in 1..=epochs {
        for s in space.iter() {
            let cap_value = sc
                .grid
                .value(s.cap)
                .map(|v| v.to_string())
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{t},{},{},{cap_value},{}",
                s.full,
                s.cap.0,
                value(t, s)
            );
        }
    }
    out
}

pub fn policy_csv(sc: &Scenario, policy: &Policy) -> String {
    let space = StateSpace::of(sc);
    let mut out = String::from("t,full,cap,a1,a2\n");
    for t in 1..=policy.decision_epochs() {
        for s in space.iter() {
            let a = policy.action(t, s);
            let _ = writeln!(out, "{t},{},{},{},{}", s.full, s.cap.0, a.charge, a.replace);
        }
    }
    out
}

pub fn read_policy_csv(path: &Path, sc: &Scenario) -> Result<Policy> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("policy artifact {}", path.display()))?;
    let space = StateSpace::of(sc);
    let mut policy = Policy::uniform(space, sc.decision_epochs(), Action::NONE);
    let mut seen = vec![false; sc.decision_epochs() * space.len()];
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            bail!("{}:{}: expected 5 fields", path.display(), i + 1);
        }
        let t: usize = fields[0].parse()?;
        let s = State::new(fields[1].parse()?, CapIdx(fields[2].parse()?));
        if t == 0 || t > sc.decision_epochs() || sc.check_state(s).is_err() {
            bail!("{}:{}: entry outside the scenario", path.display(), i + 1);
        }
        policy.set_action(t, s, Action::new(fields[3].parse()?, fields[4].parse()?));
        seen[(t - 1) * space.len() + space.index(s)] = true;
    }
    if !seen.iter().all(|&s| s) {
        bail!(
            "{}: policy does not cover every (epoch, state)",
            path.display()
        );
    }
    Ok(policy)
}

pub fn read_values_csv(path: &Path, sc: &Scenario) -> Result<ValueApprox> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("value artifact {}", path.display()))?;
    let mut approx = ValueApprox::empty(sc);
    let space = approx.space();
    let n = sc.terminal_epoch;
    let mut seen = vec![false; n * space.len()];
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            bail!("{}:{}: expected 5 fields", path.display(), i + 1);
        }
        let t: usize = fields[0].parse()?;
        let s = State::new(fields[1].parse()?, CapIdx(fields[2].parse()?));
        if t == 0 || t > n || sc.check_state(s).is_err() {
            bail!("{}:{}: entry outside the scenario", path.display(), i + 1);
        }
        approx.set_value(t, s, fields[4].parse()?);
        seen[(t - 1) * space.len() + space.index(s)] = true;
    }
    if !seen.iter().all(|&s| s) {
        bail!(
            "{}: values do not cover every (epoch, state)",
            path.display()
        );
    }
    Ok(approx)
}

pub fn trace_csv(trace: &IterationTrace) -> String {
    let mut out = String::from("iteration,value_at_reference,stepsize\n");
    for (i, r) in trace.records.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", i + 1, r.value_at_reference, r.stepsize);
    }
    out
}

pub fn trajectory_csv(sc: &Scenario, trajectory: &Trajectory) -> String {
    let mut out = String::from("t,full,cap,cap_value,a1,a2,demand,satisfied,reward\n");
    for step in &trajectory.steps {
        let cap_value = sc
            .grid
            .value(step.state.cap)
            .map(|v| v.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{cap_value},{},{},{},{},{}",
            step.epoch,
            step.state.full,
            step.state.cap.0,
            step.action.charge,
            step.action.replace,
            step.demand,
            step.satisfied,
            step.reward
        );
    }
    out
}

/// Convenience for exporting an exact value table.
pub fn value_table_csv(sc: &Scenario, values: &ValueTable) -> String {
    values_csv(sc, values.terminal_epoch(), |t, s| values.value(t, s))
}

/// Convenience for exporting an approximate value table.
pub fn value_approx_csv(sc: &Scenario, values: &ValueApprox) -> String {
    values_csv(sc, values.terminal_epoch(), |t, s| values.value(t, s))
}
