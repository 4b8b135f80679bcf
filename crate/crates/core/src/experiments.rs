//! Scenario construction: bundled base data, CSV ingestion, Latin hypercube
//! designs, and the 40 built-in study scenarios.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{CapacityGrid, DemandModel, Scenario};

/// Synthetic stand-in for one week of hourly power prices. Day/night shape
/// with an evening peak, weekday ramp, weekend dip.
const WEEKLY_PRICES_CSV: &str = include_str!("../data/weekly_prices.csv");

/// Two-peak hourly arrival template for a seven-battery station, one week.
const WEEKLY_DEMAND_CSV: &str = include_str!("../data/weekly_demand.csv");

/// Hours in the weekly profiles.
pub const WEEK_HOURS: usize = 168;

/// Battery pack energy used to turn power prices into per-battery charge
/// costs (a 400 Wh pack).
pub const BATTERY_KWH: f64 = 0.4;

/// The demand template is calibrated for a seven-battery station; means
/// scale in proportion to the target fleet size.
pub const TEMPLATE_FLEET: f64 = 7.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FactorRange {
    pub name: String,
    pub low: f64,
    pub high: f64,
}

impl FactorRange {
    pub fn new(name: &str, low: f64, high: f64) -> Result<Self> {
        if low >= high || !(low.is_finite() && high.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "factor {name}: low {low} must be below high {high}"
            )));
        }
        Ok(Self {
            name: name.into(),
            low,
            high,
        })
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.low..=self.high).contains(&x)
    }
}

/// The three study factors with their design bounds.
pub fn study_factor_ranges() -> [FactorRange; 3] {
    [
        FactorRange::new("beta", 1.0, 3.0).unwrap(),
        FactorRange::new("replacement_cost", 2.0, 100.0).unwrap(),
        FactorRange::new("degradation", 0.005, 0.02).unwrap(),
    ]
}

/// One sampled design point: swap revenue base, flat replacement cost, and
/// per-cycle degradation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioPoint {
    pub id: u32,
    pub beta: f64,
    pub replacement_cost: f64,
    pub degradation: f64,
}

/// Everything a scenario needs besides the design point.
#[derive(Debug, Clone)]
pub struct BaseData {
    /// Hourly power prices, tiled over the horizon.
    pub hourly_price: Vec<f64>,
    /// Hourly demand means for a [`TEMPLATE_FLEET`]-battery station,
    /// tiled over the horizon.
    pub hourly_lambda: Vec<f64>,
    pub battery_kwh: f64,
    pub theta: f64,
    pub epsilon: f64,
    /// Plug-ins; defaults to the fleet size when absent.
    pub phi: Option<u32>,
}

impl BaseData {
    /// The bundled synthetic series with the study's grid parameters.
    pub fn builtin() -> Self {
        Self {
            hourly_price: parse_series(WEEKLY_PRICES_CSV, "<builtin prices>", SeriesKind::Price)
                .expect("bundled price series parses"),
            hourly_lambda: parse_series(WEEKLY_DEMAND_CSV, "<builtin demand>", SeriesKind::Demand)
                .expect("bundled demand series parses"),
            battery_kwh: BATTERY_KWH,
            theta: 0.8,
            epsilon: 0.01,
            phi: None,
        }
    }
}

/// Plain stratified Latin hypercube: each factor's range splits into `count`
/// equal strata, each used exactly once, paired by independent shuffles.
pub fn lhs_design(ranges: &[FactorRange], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(ranges.len());
    for range in ranges {
        let width = (range.high - range.low) / count as f64;
        let mut strata: Vec<usize> = (0..count).collect();
        strata.shuffle(&mut rng);
        let column = strata
            .into_iter()
            .map(|k| range.low + (k as f64 + rng.random::<f64>()) * width)
            .collect();
        columns.push(column);
    }
    (0..count)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect()
}

/// LHS over the three study factors, as typed scenario points.
pub fn lhs_scenario_points(count: usize, seed: u64) -> Vec<ScenarioPoint> {
    lhs_design(&study_factor_ranges(), count, seed)
        .into_iter()
        .enumerate()
        .map(|(i, row)| ScenarioPoint {
            id: i as u32 + 1,
            beta: row[0],
            replacement_cost: row[1],
            degradation: row[2],
        })
        .collect()
}

/// The 40 fixed study scenarios.
pub fn builtin_lhs40() -> Vec<ScenarioPoint> {
    const TRIPLES: [(f64, f64, f64); 40] = [
        (1.03, 45.0, 0.009),
        (1.08, 82.0, 0.011),
        (1.13, 61.0, 0.005),
        (1.20, 69.0, 0.009),
        (1.23, 89.0, 0.008),
        (1.26, 47.0, 0.010),
        (1.32, 98.0, 0.019),
        (1.39, 94.0, 0.011),
        (1.41, 87.0, 0.014),
        (1.48, 36.0, 0.006),
        (1.53, 68.0, 0.016),
        (1.56, 28.0, 0.018),
        (1.60, 57.0, 0.010),
        (1.68, 31.0, 0.017),
        (1.71, 62.0, 0.006),
        (1.76, 44.0, 0.017),
        (1.83, 55.0, 0.016),
        (1.88, 51.0, 0.019),
        (1.94, 66.0, 0.012),
        (1.95, 73.0, 0.019),
        (2.00, 83.0, 0.012),
        (2.07, 20.0, 0.013),
        (2.15, 90.0, 0.013),
        (2.16, 41.0, 0.007),
        (2.22, 79.0, 0.015),
        (2.27, 8.0, 0.007),
        (2.32, 25.0, 0.017),
        (2.37, 74.0, 0.014),
        (2.40, 7.0, 0.018),
        (2.50, 14.0, 0.008),
        (2.51, 24.0, 0.015),
        (2.56, 34.0, 0.009),
        (2.64, 39.0, 0.010),
        (2.68, 54.0, 0.016),
        (2.71, 3.0, 0.007),
        (2.77, 16.0, 0.012),
        (2.83, 21.0, 0.013),
        (2.90, 77.0, 0.015),
        (2.91, 96.0, 0.020),
        (2.96, 12.0, 0.005),
    ];
    TRIPLES
        .iter()
        .enumerate()
        .map(|(i, &(beta, l, dc))| ScenarioPoint {
            id: i as u32 + 1,
            beta,
            replacement_cost: l,
            degradation: dc,
        })
        .collect()
}

pub fn builtin_point(id: u32) -> Result<ScenarioPoint> {
    builtin_lhs40()
        .into_iter()
        .find(|p| p.id == id)
        .ok_or_else(|| Error::MissingData(format!("builtin scenario {id} (valid: 1..=40)")))
}

/// Assemble a full scenario from a design point and base data.
///
/// Recharge cost is the hourly price times the pack energy, discharge
/// revenue equals the recharge cost, the replacement cost is flat, and the
/// demand means are the weekly template scaled by `target_m / 7` and tiled
/// over the horizon.
pub fn scenario_from_point(
    pt: &ScenarioPoint,
    base: &BaseData,
    target_m: u32,
    horizon: usize,
) -> Result<Scenario> {
    if base.hourly_price.is_empty() || base.hourly_lambda.is_empty() {
        return Err(Error::MissingData(
            "base data needs both a price and a demand series".into(),
        ));
    }
    if horizon < 2 {
        return Err(Error::InvalidScenario(format!(
            "terminal epoch {horizon} leaves no decision epochs"
        )));
    }
    let epochs = horizon - 1;
    let price = |t: usize| base.hourly_price[(t - 1) % base.hourly_price.len()];
    let recharge_cost: Vec<f64> = (1..=epochs).map(|t| price(t) * base.battery_kwh).collect();
    let scale = f64::from(target_m) / TEMPLATE_FLEET;
    let lambda: Vec<f64> = (1..=epochs)
        .map(|t| base.hourly_lambda[(t - 1) % base.hourly_lambda.len()] * scale)
        .collect();
    Scenario {
        m: target_m,
        phi: base.phi.unwrap_or(target_m),
        terminal_epoch: horizon,
        grid: CapacityGrid::new(base.theta, base.epsilon)?,
        delta_c: pt.degradation,
        beta: pt.beta,
        discharge_revenue: recharge_cost.clone(),
        recharge_cost,
        replacement_cost: vec![pt.replacement_cost; epochs],
        demand: DemandModel::poisson(lambda)?,
    }
    .validated()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// Schema `hour,usd_per_kwh`.
    Price,
    /// Schema `hour,lambda`.
    Demand,
}

impl SeriesKind {
    fn header(self) -> &'static str {
        match self {
            SeriesKind::Price => "hour,usd_per_kwh",
            SeriesKind::Demand => "hour,lambda",
        }
    }
}

/// Load an hourly series CSV, validating the schema and nonnegativity.
pub fn load_series_csv(path: &Path, kind: SeriesKind) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    parse_series(&text, &path.display().to_string(), kind)
}

fn parse_series(text: &str, path: &str, kind: SeriesKind) -> Result<Vec<f64>> {
    let err = |line: usize, msg: String| Error::Csv {
        path: path.into(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty file".into()))?;
    if header.trim() != kind.header() {
        return Err(err(
            1,
            format!("expected header `{}`, found `{header}`", kind.header()),
        ));
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (hour, value) = match (fields.next(), fields.next(), fields.next()) {
            (Some(h), Some(v), None) => (h, v),
            _ => return Err(err(lineno, "expected exactly two fields".into())),
        };
        let hour: usize = hour
            .trim()
            .parse()
            .map_err(|e| err(lineno, format!("bad hour: {e}")))?;
        if hour != out.len() {
            return Err(err(
                lineno,
                format!("hours must be consecutive from 0; expected {}, found {hour}", out.len()),
            ));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| err(lineno, format!("bad value: {e}")))?;
        if !value.is_finite() || value < 0.0 {
            return Err(err(lineno, format!("value {value} must be nonnegative")));
        }
        out.push(value);
    }
    if out.is_empty() {
        return Err(err(1, "series has no rows".into()));
    }
    Ok(out)
}

/// Load scenario points from a CSV with schema `id,beta,L,deltaC`.
pub fn load_points_csv(path: &Path) -> Result<Vec<ScenarioPoint>> {
    let text = std::fs::read_to_string(path)?;
    let err = |line: usize, msg: String| Error::Csv {
        path: path.display().to_string(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    if header.trim() != "id,beta,L,deltaC" {
        return Err(err(1, format!("expected header `id,beta,L,deltaC`, found `{header}`")));
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(err(lineno, "expected exactly four fields".into()));
        }
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.parse()
                .map_err(|e| err(lineno, format!("bad {what}: {e}")))
        };
        out.push(ScenarioPoint {
            id: fields[0]
                .parse()
                .map_err(|e| err(lineno, format!("bad id: {e}")))?,
            beta: parse_f(fields[1], "beta")?,
            replacement_cost: parse_f(fields[2], "L")?,
            degradation: parse_f(fields[3], "deltaC")?,
        });
    }
    if out.is_empty() {
        return Err(err(1, "no scenario points".into()));
    }
    Ok(out)
}
