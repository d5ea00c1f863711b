#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;
mod scenario;
mod srgm_cmd;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use reliab_core::baseline::{beta_posterior_confidence, BetaPrior};
use reliab_core::cbi::{worst_case_posterior_confidence, worst_case_prior, Observation, PriorConstraints};
use reliab_core::data::{bundled_fixture, expand_to_interfailure, load_monthly_csv, write_history_csv};
use reliab_core::evaluation::{plr, u_plot, PredictionRecord};
use reliab_core::oracle::{minimize_over_feasible_priors_with, OracleConfig};

use output::{num, Format, Sink, Table};
use scenario::{Grid, Method, MethodSpec, ScenarioConfig};

#[derive(Parser)]
#[command(name = "reliab", version, about = "Reliability claims from road-testing evidence")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Directory for output files; tables go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Scenario parameter file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    Table1,
    Fig2,
    Fig3,
    Fig4,
}

impl Scenario {
    fn name(self) -> &'static str {
        match self {
            Scenario::Table1 => "table1",
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
            Scenario::Fig4 => "fig4",
        }
    }
}

#[derive(Args, Clone)]
struct PriorArgs {
    /// Engineering goal (failures per mile).
    #[arg(long, default_value_t = 1.09e-10)]
    epsilon: f64,
    /// Prior confidence that the goal is met.
    #[arg(long, default_value_t = 0.9)]
    theta: f64,
    /// Lowest failure probability per mile the technology can have.
    #[arg(long, default_value_t = 1e-15)]
    p_l: f64,
}

impl PriorArgs {
    fn constraints(&self) -> Result<PriorConstraints> {
        Ok(PriorConstraints::new(self.epsilon, self.theta, self.p_l)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Miles needed to support a claim, for a scenario or a single point.
    Miles {
        #[arg(long, value_enum)]
        scenario: Option<Scenario>,
        #[arg(long, value_enum, default_value_t = Method::Cbi)]
        method: Method,
        /// Claimed bound on the failure probability per mile.
        #[arg(long)]
        p: Option<f64>,
        /// Required confidence.
        #[arg(long, default_value_t = 0.95)]
        c: f64,
        /// Failures observed.
        #[arg(long, default_value_t = 0)]
        k: u64,
        /// True rate assumed by the power calculation.
        #[arg(long)]
        true_rate: Option<f64>,
        #[command(flatten)]
        prior: PriorArgs,
    },
    /// Posterior confidence in `X <= p` after `k` failures in `n` miles.
    Confidence {
        #[arg(long, value_enum, default_value_t = Method::Cbi)]
        method: Method,
        /// Bound whose posterior probability is reported.
        #[arg(long)]
        p: f64,
        /// Miles driven.
        #[arg(long)]
        n: f64,
        /// Failures observed.
        #[arg(long, default_value_t = 0)]
        k: u64,
        #[command(flatten)]
        prior: PriorArgs,
    },
    /// Failure-free miles needed to recover confidence after one failure.
    Compensate {
        /// Confidence to recover.
        #[arg(long, default_value_t = 0.95)]
        c: f64,
        /// Smallest failure-free mileage before the failure.
        #[arg(long, default_value_t = 1e8)]
        n1_min: f64,
        /// Largest failure-free mileage before the failure.
        #[arg(long, default_value_t = 1e14)]
        n1_max: f64,
        /// Log-spaced grid points.
        #[arg(long, default_value_t = 97)]
        points: usize,
        #[command(flatten)]
        prior: PriorArgs,
    },
    /// Brute-force minimum over feasible priors, next to the closed form.
    Oracle {
        /// Claimed bound on the failure probability per mile.
        #[arg(long)]
        p: f64,
        /// Miles driven.
        #[arg(long)]
        n: f64,
        /// Failures observed.
        #[arg(long, default_value_t = 0)]
        k: u64,
        /// Grid resolution of the search over two-point priors.
        #[arg(long, default_value_t = 2000)]
        grid: usize,
        /// Random feasible mixtures tried besides the grid.
        #[arg(long, default_value_t = 1000)]
        random_mixtures: usize,
        #[command(flatten)]
        prior: PriorArgs,
    },
    /// Expand a monthly report into inter-failure miles.
    Ingest {
        /// Monthly CSV (`month,miles,disengagements`); the bundled 51-month fixture when absent.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Fit reliability growth models and evaluate their rolling predictions.
    Srgm(srgm_cmd::SrgmArgs),
    /// Score prediction records, or render an emitted CSV as SVG.
    Evaluate {
        /// Prediction records CSV (`index,u,log_density,floored,median,realized`).
        #[arg(long)]
        records: Option<PathBuf>,
        /// Second records file; adds the log prequential likelihood ratio.
        #[arg(long)]
        against: Option<PathBuf>,
        /// CSV file to render as SVG.
        #[arg(long)]
        render: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RELIAB_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let sink = Sink { out: cli.out.clone(), format: cli.format };
    match cli.command {
        Command::Miles { scenario, method, p, c, k, true_rate, prior } => {
            let config = match (&cli.config, scenario) {
                (Some(path), _) => Some(ScenarioConfig::load(path)?),
                (None, Some(s)) => Some(ScenarioConfig::builtin(s.name())?),
                (None, None) => None,
            };
            if let Some(config) = config {
                for table in config.run()? {
                    sink.emit(&table)?;
                }
                return Ok(ExitCode::SUCCESS);
            }
            let p = p.context("give --p for a single query, or --scenario / --config")?;
            let spec = MethodSpec {
                label: format!("{method:?}"),
                method,
                epsilon: Some(prior.epsilon),
                theta: Some(prior.theta),
                p_l: Some(prior.p_l),
                true_rate,
            };
            println!("{}", num(scenario::miles(&spec, k, p, c)?));
        }
        Command::Confidence { method, p, n, k, prior } => {
            let obs = Observation::new(k, n)?;
            let value = match method {
                Method::Cbi => worst_case_posterior_confidence(&prior.constraints()?, &obs, p)?,
                Method::BetaUniform => beta_posterior_confidence(&BetaPrior::UNIFORM, &obs, p)?,
                Method::BetaJeffreys => beta_posterior_confidence(&BetaPrior::JEFFREYS, &obs, p)?,
                Method::Classical | Method::RandPower => {
                    bail!("confidence is defined for cbi, beta-uniform and beta-jeffreys")
                }
            };
            println!("{}", num(value));
        }
        Command::Compensate { c, n1_min, n1_max, points, prior } => {
            let setting = scenario::CompensationSetting {
                label: format!("c={c} theta={}", prior.theta),
                epsilon: prior.epsilon,
                theta: prior.theta,
                p_l: prior.p_l,
                c,
            };
            let tables = match &cli.config {
                Some(path) => ScenarioConfig::load(path)?.run()?,
                None => scenario::compensation(
                    "compensation",
                    &Grid { min: n1_min, max: n1_max, points, log: true },
                    &[setting],
                )?,
            };
            for t in tables {
                sink.emit(&t)?;
            }
        }
        Command::Oracle { p, n, k, grid, random_mixtures, prior } => {
            let cs = prior.constraints()?;
            let obs = Observation::new(k, n)?;
            let theorem = worst_case_posterior_confidence(&cs, &obs, p)?;
            let two_point = worst_case_prior(&cs, &obs, p)?;
            let config = OracleConfig { random_mixtures, seed: cli.seed, ..Default::default() };
            let (oracle, argmin) = minimize_over_feasible_priors_with(&cs, &obs, p, grid, &config)?;
            let mut t = Table::new("oracle", &["quantity", "value"]);
            t.push(vec!["closed_form_confidence".into(), num(theorem)]);
            t.push(vec!["oracle_confidence".into(), num(oracle)]);
            t.push(vec!["difference".into(), num(oracle - theorem)]);
            t.push(vec!["closed_form_x1".into(), num(two_point.x1)]);
            t.push(vec!["closed_form_x3".into(), num(two_point.x3)]);
            for (x, m) in argmin.support().iter().zip(argmin.masses()) {
                t.push(vec![format!("oracle_mass_at_{x:e}"), num(*m)]);
            }
            sink.emit(&t)?;
        }
        Command::Ingest { input } => {
            let records = match input {
                Some(path) => load_monthly_csv(&path).with_context(|| format!("reading {}", path.display()))?,
                None => bundled_fixture(),
            };
            let history = expand_to_interfailure(&records, cli.seed)?;
            eprintln!(
                "{} months, {} events, {} miles, {} miles after the last event",
                records.len(),
                history.len(),
                history.total_miles,
                history.censored_tail
            );
            let mut buf = Vec::new();
            write_history_csv(&history.interfailure_miles, &mut buf)?;
            match &cli.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    std::fs::write(dir.join("history.csv"), buf)?;
                }
                None => print!("{}", String::from_utf8(buf)?),
            }
        }
        Command::Srgm(args) => return srgm_cmd::run(&args, cli.seed, &sink),
        Command::Evaluate { records, against, render } => {
            if let Some(path) = render {
                let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                let title = path.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
                let svg = svg::render(&text, title)?;
                match &cli.out {
                    Some(dir) => {
                        std::fs::create_dir_all(dir)?;
                        std::fs::write(dir.join(format!("{title}.svg")), svg)?;
                    }
                    None => print!("{svg}"),
                }
                return Ok(ExitCode::SUCCESS);
            }
            let path = records.context("give --records or --render")?;
            let a = read_records(&path)?;
            let mut t = Table::new("evaluation", &["quantity", "value"]);
            t.push(vec!["predictions".into(), a.len().to_string()]);
            t.push(vec!["ks_distance".into(), num(u_plot(&a)?.ks_distance)]);
            if let Some(other) = against {
                let b = read_records(&other)?;
                let trace = plr(&a, &b)?;
                t.push(vec!["log_plr".into(), trace.last().map(|v| num(*v)).unwrap_or_default()]);
            }
            sink.emit(&t)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn read_records(path: &std::path::Path) -> Result<Vec<PredictionRecord>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    reader
        .deserialize()
        .collect::<Result<Vec<PredictionRecord>, _>>()
        .with_context(|| format!("parsing prediction records in {}", path.display()))
}
