//! Checked-in parameter sets and the runners that turn them into tables.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use reliab_core::baseline::{beta_required_miles, classical_failure_free_miles, rand_power_miles, BetaPrior};
use reliab_core::cbi::{compensation_miles, n_star, p_star, required_miles, PriorConstraints, ReliabilityClaim};

use crate::output::{num, Table};

const BUILTIN: [(&str, &str); 4] = [
    ("table1", include_str!("../scenarios/table1.json")),
    ("fig2", include_str!("../scenarios/fig2.json")),
    ("fig3", include_str!("../scenarios/fig3.json")),
    ("fig4", include_str!("../scenarios/fig4.json")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Cbi,
    Classical,
    RandPower,
    BetaUniform,
    BetaJeffreys,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodSpec {
    pub label: String,
    pub method: Method,
    pub epsilon: Option<f64>,
    pub theta: Option<f64>,
    pub p_l: Option<f64>,
    /// Assumed true rate for the power calculation.
    pub true_rate: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cell {
    #[serde(flatten)]
    pub spec: MethodSpec,
    pub k: u64,
    pub p: f64,
    pub c: f64,
    pub reference: Option<f64>,
    #[serde(default = "yes")]
    pub reproduce: bool,
    pub note: Option<String>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub log: bool,
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points < 2 || !(self.min < self.max) || (self.log && self.min <= 0.0) {
            bail!("grid needs min < max, at least 2 points and positive bounds on a log scale");
        }
        let last = (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| {
                let f = i as f64 / last;
                if i == 0 {
                    self.min
                } else if i + 1 == self.points {
                    self.max
                } else if self.log {
                    (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + f * (self.max - self.min)
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompensationSetting {
    pub label: String,
    pub epsilon: f64,
    pub theta: f64,
    pub p_l: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case")]
pub enum Task {
    MilesTable { cells: Vec<Cell> },
    MilesSweep { k: u64, c: f64, p_grid: Grid, methods: Vec<MethodSpec> },
    Compensation { n1_grid: Grid, settings: Vec<CompensationSetting> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(flatten)]
    pub task: Task,
}

impl ScenarioConfig {
    pub fn builtin(name: &str) -> Result<Self> {
        let (_, text) = BUILTIN
            .iter()
            .find(|(n, _)| *n == name)
            .with_context(|| format!("no built-in scenario `{name}`"))?;
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing scenario {}", path.display()))
    }

    pub fn run(&self) -> Result<Vec<Table>> {
        match &self.task {
            Task::MilesTable { cells } => Ok(vec![miles_table(&self.name, cells)?]),
            Task::MilesSweep { k, c, p_grid, methods } => Ok(vec![miles_sweep(&self.name, *k, *c, p_grid, methods)?]),
            Task::Compensation { n1_grid, settings } => compensation(&self.name, n1_grid, settings),
        }
    }
}

pub fn constraints_of(spec: &MethodSpec) -> Result<PriorConstraints> {
    match (spec.epsilon, spec.theta, spec.p_l) {
        (Some(e), Some(t), Some(l)) => Ok(PriorConstraints::new(e, t, l)?),
        _ => bail!("method `{}` needs epsilon, theta and p_l", spec.label),
    }
}

/// Miles needed by one method for `k` failures and the claim `(p, c)`.
pub fn miles(spec: &MethodSpec, k: u64, p: f64, c: f64) -> Result<f64> {
    let claim = ReliabilityClaim::new(p, c)?;
    Ok(match spec.method {
        Method::Cbi => required_miles(&constraints_of(spec)?, k, &claim)?,
        Method::Classical => {
            if k > 0 {
                bail!("the classical failure-free calculation only covers k = 0");
            }
            classical_failure_free_miles(&claim)?
        }
        Method::RandPower => {
            let rate = spec.true_rate.context("rand-power needs true_rate")?;
            rand_power_miles(rate, p, c)?
        }
        Method::BetaUniform => beta_required_miles(&BetaPrior::UNIFORM, k, &claim)?,
        Method::BetaJeffreys => beta_required_miles(&BetaPrior::JEFFREYS, k, &claim)?,
    })
}

fn miles_table(name: &str, cells: &[Cell]) -> Result<Table> {
    let mut t = Table::new(name, &["method", "k", "p", "c", "miles", "reference", "relative_difference", "status"]);
    for cell in cells {
        let (value, diff, status) = if cell.reproduce {
            let v = miles(&cell.spec, cell.k, cell.p, cell.c)?;
            let d = cell.reference.map(|r| v / r - 1.0);
            let status = match d {
                Some(d) if d.abs() <= 0.01 => "within 1%".to_string(),
                Some(_) => "outside 1%".to_string(),
                None => String::new(),
            };
            (num(v), d.map(num).unwrap_or_default(), status)
        } else {
            (String::new(), String::new(), cell.note.clone().unwrap_or_else(|| "not reproduced".into()))
        };
        t.push(vec![
            cell.spec.label.clone(),
            cell.k.to_string(),
            num(cell.p),
            num(cell.c),
            value,
            cell.reference.map(num).unwrap_or_default(),
            diff,
            status,
        ]);
    }
    Ok(t)
}

fn miles_sweep(name: &str, k: u64, c: f64, grid: &Grid, methods: &[MethodSpec]) -> Result<Table> {
    let mut header = vec!["p".to_string()];
    header.extend(methods.iter().map(|m| m.label.clone()));
    let mut t = Table::with_header(name, header);
    for p in grid.values()? {
        let mut row = vec![num(p)];
        for m in methods {
            // Claims at or below the goal have no finite mileage: leave the cell empty.
            row.push(match miles(m, k, p, c) {
                Ok(v) => num(v),
                Err(e) => {
                    log::debug!("{} at p = {p:e}: {e}", m.label);
                    String::new()
                }
            });
        }
        t.push(row);
    }
    Ok(t)
}

/// The `n2(n1)` curves plus one reference table per setting.
pub fn compensation(name: &str, grid: &Grid, settings: &[CompensationSetting]) -> Result<Vec<Table>> {
    let n1s = grid.values()?;
    let mut header = vec!["n1".to_string()];
    header.extend(settings.iter().map(|s| s.label.clone()));
    let mut references = Table::new(format!("{name}_reference"), &["setting", "n_star", "p_star", "inverse_goal"]);
    let mut marks = Vec::new();
    for s in settings {
        let cs = PriorConstraints::new(s.epsilon, s.theta, s.p_l)?;
        let ns = n_star(&cs)?;
        let ps = p_star(&cs, s.c).ok();
        references.push(vec![s.label.clone(), num(ns), ps.map(num).unwrap_or_default(), num(1.0 / s.epsilon)]);
        marks.push((ns, ps, 1.0 / s.epsilon));
    }
    // Reference lines of the first setting go into the curve table so the plot
    // can be drawn from that file alone.
    let (ns, ps, inv) = marks[0];
    let p_label = ps.map(|p| format!(", p*={p:.3e}")).unwrap_or_default();
    header.push(format!("vline:n*={ns:.3e}{p_label}"));
    header.push(format!("hline:1/epsilon={inv:.3e}"));
    let mut curves = Table::with_header(name, header);
    for (i, &n1) in n1s.iter().enumerate() {
        let mut row = vec![num(n1)];
        for s in settings {
            let cs = PriorConstraints::new(s.epsilon, s.theta, s.p_l)?;
            row.push(match compensation_miles(&cs, n1, s.c) {
                Ok(r) => num(r.n2),
                Err(e) => {
                    log::debug!("{} at n1 = {n1:e}: {e}", s.label);
                    String::new()
                }
            });
        }
        row.push(if i == 0 { num(ns) } else { String::new() });
        row.push(if i == 0 { num(inv) } else { String::new() });
        curves.push(row);
    }
    Ok(vec![curves, references])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_scenarios_parse() {
        for (name, _) in BUILTIN {
            let s = ScenarioConfig::builtin(name).unwrap();
            assert_eq!(s.name, name);
        }
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g = Grid { min: 1e-4, max: 1e-2, points: 3, log: true };
        let v = g.values().unwrap();
        assert_eq!(v.len(), 3);
        assert!((v[1] / 1e-3 - 1.0).abs() < 1e-12);
        assert!(Grid { min: 1.0, max: 1.0, points: 3, log: false }.values().is_err());
    }
}
