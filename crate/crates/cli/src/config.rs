//! Run configuration: JSON file plus flag overrides, flags winning.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use sairp_core::adp::{AdpVariant, RbConfig};
use sairp_core::experiments::{
    self, builtin_point, load_series_csv, BaseData, ScenarioPoint, SeriesKind,
};
use sairp_core::model::Scenario;
use sairp_core::stepsize::StepsizeSpec;

pub const OUT_ROOT_ENV: &str = "SAIRP_OUT_ROOT";

/// One run's settings. Every field is optional so a config file and command
/// line flags can each fill any subset; flags take precedence.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// `builtin:<id>` or `point:<beta>,<L>,<deltaC>`.
    pub scenario: Option<String>,
    /// Hourly price CSV (`hour,usd_per_kwh`) replacing the bundled series.
    pub price_csv: Option<PathBuf>,
    /// Hourly demand CSV (`hour,lambda`) replacing the bundled template.
    pub demand_csv: Option<PathBuf>,
    /// Batteries at the station.
    pub m: Option<u32>,
    /// Decision epochs (the terminal epoch is one past).
    pub t: Option<usize>,
    pub theta: Option<f64>,
    pub epsilon: Option<f64>,
    /// Plug-ins; defaults to the fleet size.
    pub phi: Option<u32>,
    /// `bi`, `mbi`, `bi:cap`, `mbi:cap`, or `adp:<variant>` with variant in
    /// `avi | avi-rb | madp | madp-m | madp-rb`.
    pub solver: Option<String>,
    /// `one-over-n`, `harmonic:w=<w>`, `stc:alpha0=..,mu1=..,mu2=..,zeta=..`,
    /// or `adaptive[:w=<w>]`.
    pub stepsize: Option<String>,
    /// ADP iteration budget.
    pub tau: Option<usize>,
    pub seed: Option<u64>,
    /// Smallest instance size for the regression initialization.
    pub m_bar: Option<u32>,
    /// Decision epochs of the regression instances.
    pub t_bar: Option<usize>,
    /// Extra regression instance sizes beyond the smallest.
    pub rb_iterations: Option<usize>,
    /// Epoch slope of the hand-built monotone initialization.
    pub init_slope: Option<f64>,
    pub out: Option<PathBuf>,
    /// Simulation sample-path count.
    pub paths: Option<usize>,
    /// Simulate the single path where demand equals its rounded mean.
    pub mean_demand: Option<bool>,
    /// Experiment scenario set: `builtin:all`, `builtin:<a>-<b>`,
    /// `builtin:<id>[,<id>...]`, or `file:<points.csv>`.
    pub scenarios: Option<String>,
    /// Experiment solver list.
    pub solvers: Option<Vec<String>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Overlay `flags` (higher precedence) on `self`.
    pub fn merged_with(mut self, flags: RunConfig) -> RunConfig {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if flags.$field.is_some() { self.$field = flags.$field; })*
            };
        }
        take!(
            scenario, price_csv, demand_csv, m, t, theta, epsilon, phi, solver, stepsize, tau,
            seed, m_bar, t_bar, rb_iterations, init_slope, out, paths, mean_demand, scenarios,
            solvers
        );
        self
    }

    pub fn out_root(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_ROOT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("sairp-out"))
    }

    pub fn m(&self) -> u32 {
        self.m.unwrap_or(3)
    }

    pub fn decision_epochs(&self) -> usize {
        self.t.unwrap_or(48)
    }

    pub fn tau(&self) -> usize {
        self.tau.unwrap_or(20_000)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn rb_config(&self) -> RbConfig {
        RbConfig {
            m_bar: self.m_bar.unwrap_or(2),
            t_bar: self.t_bar.unwrap_or_else(|| self.decision_epochs()),
            max_iterations: self.rb_iterations.unwrap_or(2),
        }
    }

    pub fn base_data(&self) -> Result<BaseData> {
        let mut base = BaseData::builtin();
        if let Some(path) = &self.price_csv {
            base.hourly_price = load_series_csv(path, SeriesKind::Price)?;
        }
        if let Some(path) = &self.demand_csv {
            base.hourly_lambda = load_series_csv(path, SeriesKind::Demand)?;
        }
        if let Some(theta) = self.theta {
            base.theta = theta;
        }
        if let Some(epsilon) = self.epsilon {
            base.epsilon = epsilon;
        }
        base.phi = self.phi;
        Ok(base)
    }

    pub fn scenario_point(&self) -> Result<ScenarioPoint> {
        parse_scenario_point(self.scenario.as_deref().unwrap_or("builtin:1"))
    }

    pub fn build_scenario(&self) -> Result<Scenario> {
        let point = self.scenario_point()?;
        let base = self.base_data()?;
        Ok(experiments::scenario_from_point(
            &point,
            &base,
            self.m(),
            self.decision_epochs() + 1,
        )?)
    }

    pub fn solver_spec(&self) -> Result<SolverSpec> {
        parse_solver(self.solver.as_deref().unwrap_or("bi"))
    }

    pub fn stepsize_spec(&self) -> Result<StepsizeSpec> {
        let spec = parse_stepsize(self.stepsize.as_deref().unwrap_or("harmonic:w=25000"))?;
        spec.validate()?;
        Ok(spec)
    }

    /// The scenario points an experiment runs over.
    pub fn scenario_points(&self) -> Result<Vec<ScenarioPoint>> {
        let spec = self.scenarios.as_deref().unwrap_or("builtin:all");
        if let Some(rest) = spec.strip_prefix("builtin:") {
            let all = experiments::builtin_lhs40();
            if rest == "all" {
                return Ok(all);
            }
            if let Some((a, b)) = rest.split_once('-') {
                let (a, b): (u32, u32) = (a.parse()?, b.parse()?);
                if a == 0 || b > 40 || a > b {
                    bail!("scenario range {a}-{b} outside 1..=40");
                }
                return Ok(all.into_iter().filter(|p| p.id >= a && p.id <= b).collect());
            }
            let ids = rest
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if ids.is_empty() {
                bail!("empty scenario list");
            }
            return ids.into_iter().map(|id| Ok(builtin_point(id)?)).collect();
        }
        if let Some(path) = spec.strip_prefix("file:") {
            let points = experiments::load_points_csv(Path::new(path))?;
            return Ok(points);
        }
        bail!("scenario set `{spec}` must be builtin:... or file:<points.csv>")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverSpec {
    Bi { cap: bool },
    Mbi { cap: bool },
    Adp(AdpVariant),
}

impl SolverSpec {
    pub fn is_exact(self) -> bool {
        !matches!(self, SolverSpec::Adp(_))
    }
}

pub fn parse_solver(text: &str) -> Result<SolverSpec> {
    match text {
        "bi" => Ok(SolverSpec::Bi { cap: false }),
        "bi:cap" => Ok(SolverSpec::Bi { cap: true }),
        "mbi" => Ok(SolverSpec::Mbi { cap: false }),
        "mbi:cap" => Ok(SolverSpec::Mbi { cap: true }),
        other => match other.strip_prefix("adp:") {
            Some(variant) => Ok(SolverSpec::Adp(variant.parse()?)),
            None => bail!(
                "unknown solver `{other}` (expected bi[:cap], mbi[:cap], or adp:<variant>)"
            ),
        },
    }
}

pub fn parse_scenario_point(text: &str) -> Result<ScenarioPoint> {
    if let Some(id) = text.strip_prefix("builtin:") {
        let id: u32 = id.parse().context("builtin scenario id")?;
        return Ok(builtin_point(id)?);
    }
    if let Some(rest) = text.strip_prefix("point:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 3 {
            bail!("point spec needs beta,L,deltaC");
        }
        return Ok(ScenarioPoint {
            id: 0,
            beta: parts[0].trim().parse()?,
            replacement_cost: parts[1].trim().parse()?,
            degradation: parts[2].trim().parse()?,
        });
    }
    bail!("scenario `{text}` must be builtin:<id> or point:<beta>,<L>,<deltaC>")
}

pub fn parse_stepsize(text: &str) -> Result<StepsizeSpec> {
    let (kind, args) = match text.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (text, None),
    };
    let params = |args: Option<&str>| -> Result<Vec<(String, f64)>> {
        args.unwrap_or("")
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|pair| {
                let (k, v) = pair
                    .split_once('=')
                    .with_context(|| format!("expected key=value in `{pair}`"))?;
                Ok((k.trim().to_string(), v.trim().parse::<f64>()?))
            })
            .collect()
    };
    let lookup = |ps: &[(String, f64)], key: &str| -> Option<f64> {
        ps.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    };
    match kind {
        "one-over-n" => Ok(StepsizeSpec::OneOverN),
        "harmonic" => {
            let ps = params(args)?;
            Ok(StepsizeSpec::Harmonic {
                w: lookup(&ps, "w").context("harmonic needs w=<value>")?,
            })
        }
        "stc" => {
            let ps = params(args)?;
            Ok(StepsizeSpec::Stc {
                alpha0: lookup(&ps, "alpha0").unwrap_or(1.0),
                mu1: lookup(&ps, "mu1").context("stc needs mu1=<value>")?,
                mu2: lookup(&ps, "mu2").context("stc needs mu2=<value>")?,
                zeta: lookup(&ps, "zeta").context("stc needs zeta=<value>")?,
            })
        }
        "adaptive" => {
            let ps = params(args)?;
            Ok(StepsizeSpec::Adaptive {
                inner_w: lookup(&ps, "w").unwrap_or(25_000.0),
            })
        }
        other => bail!("unknown stepsize `{other}`"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_specs_parse() {
        assert_eq!(parse_solver("bi").unwrap(), SolverSpec::Bi { cap: false });
        assert_eq!(parse_solver("mbi:cap").unwrap(), SolverSpec::Mbi { cap: true });
        assert_eq!(
            parse_solver("adp:madp-rb").unwrap(),
            SolverSpec::Adp(AdpVariant::MadpRb)
        );
        assert!(parse_solver("vi").is_err());
    }

    #[test]
    fn stepsize_specs_parse() {
        assert_eq!(
            parse_stepsize("harmonic:w=25000").unwrap(),
            StepsizeSpec::Harmonic { w: 25_000.0 }
        );
        assert_eq!(
            parse_stepsize("stc:alpha0=1,mu1=600,mu2=1000,zeta=0.7").unwrap(),
            StepsizeSpec::Stc {
                alpha0: 1.0,
                mu1: 600.0,
                mu2: 1000.0,
                zeta: 0.7
            }
        );
        assert_eq!(
            parse_stepsize("adaptive").unwrap(),
            StepsizeSpec::Adaptive { inner_w: 25_000.0 }
        );
        assert!(parse_stepsize("harmonic").is_err());
    }

    #[test]
    fn flags_override_config() {
        let file = RunConfig {
            m: Some(3),
            tau: Some(100),
            ..RunConfig::default()
        };
        let flags = RunConfig {
            tau: Some(7),
            ..RunConfig::default()
        };
        let merged = file.merged_with(flags);
        assert_eq!(merged.m, Some(3));
        assert_eq!(merged.tau, Some(7));
    }

    #[test]
    fn scenario_sets_parse() {
        let cfg = RunConfig {
            scenarios: Some("builtin:3-5".into()),
            ..RunConfig::default()
        };
        let pts = cfg.scenario_points().unwrap();
        assert_eq!(pts.iter().map(|p| p.id).collect::<Vec<_>>(), vec![3, 4, 5]);

        let cfg = RunConfig {
            scenarios: Some("builtin:7,22".into()),
            ..RunConfig::default()
        };
        let pts = cfg.scenario_points().unwrap();
        assert_eq!(pts.iter().map(|p| p.id).collect::<Vec<_>>(), vec![7, 22]);

        let cfg = RunConfig {
            scenarios: Some("builtin:".into()),
            ..RunConfig::default()
        };
        assert!(cfg.scenario_points().is_err());
    }
}
