use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;

use reliab_core::data::{bundled_fixture, expand_to_interfailure, load_monthly_csv, read_history_csv, FailureHistory};
use reliab_core::evaluation::{align, plr, PredictionRecord};
use reliab_core::srgm::{analyze_history, AnalysisOptions, RollingOptions, SrgmAnalysis, SrgmKind, SAFETY_CAVEAT};

use crate::output::{num, opt, Sink, Table};

#[derive(Args, Clone)]
pub struct SrgmArgs {
    /// Monthly CSV (`month,miles,disengagements`); the bundled fixture when absent.
    #[arg(long, conflicts_with = "history")]
    input: Option<PathBuf>,
    /// Inter-failure CSV (`index,interfailure_miles`) used as is.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Models to fit.
    #[arg(long, value_delimiter = ',', default_value = "GO,DU,MO,LI,LV")]
    kinds: Vec<SrgmKind>,
    /// First prefix length used for rolling predictions.
    #[arg(long, default_value_t = 50)]
    start: usize,
    /// Earlier predictions needed before recalibrating.
    #[arg(long, default_value_t = 20)]
    warmup: usize,
    /// Report raw predictions only.
    #[arg(long)]
    no_recalibrate: bool,
    /// Ignore the miles after the last event in the final forecast.
    #[arg(long)]
    exclude_tail: bool,
    /// Repeat the monthly expansion for this many consecutive seeds.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
}

fn history_for(args: &SrgmArgs, seed: u64) -> Result<FailureHistory> {
    if let Some(path) = &args.history {
        let file = std::fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
        let gaps = read_history_csv(file)?;
        let total = gaps.iter().sum();
        return Ok(FailureHistory { interfailure_miles: gaps, total_miles: total, censored_tail: 0.0, seed });
    }
    let records = match &args.input {
        Some(path) => load_monthly_csv(path).with_context(|| format!("reading {}", path.display()))?,
        None => bundled_fixture(),
    };
    Ok(expand_to_interfailure(&records, seed)?)
}

fn final_recalibrated(a: &reliab_core::srgm::KindAnalysis) -> Option<f64> {
    a.final_median_recalibrated.as_ref().ok().copied()
}

pub fn run(args: &SrgmArgs, seed: u64, sink: &Sink) -> Result<ExitCode> {
    eprintln!("{SAFETY_CAVEAT}");
    let options = AnalysisOptions {
        rolling: RollingOptions { start: args.start, ..Default::default() },
        warmup: args.warmup,
        include_tail: !args.exclude_tail,
    };
    let history = history_for(args, seed)?;
    let analysis = analyze_history(&history, &args.kinds, &options)?;
    let hard_failures: Vec<SrgmKind> = analysis.kinds.iter().filter(|k| k.raw.steps.is_empty()).map(|k| k.kind).collect();

    let summary = summary(&analysis, !args.no_recalibrate);
    sink.emit(&summary)?;
    if sink.out.is_some() {
        print!("{}", summary.to_csv()?);
        sink.emit(&mmtd_table(&analysis, !args.no_recalibrate))?;
        sink.emit(&u_plot_table(&analysis, !args.no_recalibrate))?;
        if let Some(t) = plr_table(&analysis)? {
            sink.emit(&t)?;
        }
        for k in &analysis.kinds {
            sink.emit(&records_table(&format!("records_{}", k.kind), &k.raw.records()))?;
            if !args.no_recalibrate {
                sink.emit(&records_table(&format!("records_{}_recalibrated", k.kind), &k.recalibrated.records()))?;
            }
        }
    }
    if args.seeds > 1 {
        let mut header = vec!["seed".to_string(), "consensus_raw".into(), "consensus_recalibrated".into()];
        header.extend(args.kinds.iter().map(|k| format!("{k}#")));
        let mut t = Table::with_header("srgm_seed_sweep", header);
        for s in seed..seed + args.seeds {
            let a = if s == seed { analysis.clone() } else { analyze_history(&history_for(args, s)?, &args.kinds, &options)? };
            let mut row = vec![s.to_string(), opt(a.consensus_raw), opt(a.consensus_recalibrated)];
            row.extend(a.kinds.iter().map(|k| opt(final_recalibrated(k))));
            t.push(row);
        }
        sink.emit(&t)?;
    }
    for (k, skipped) in analysis.kinds.iter().map(|k| (k.kind, k.raw.skipped.len())).filter(|(_, s)| *s > 0) {
        eprintln!("{k}: {skipped} rolling steps skipped after failed fits");
    }
    if !hard_failures.is_empty() {
        eprintln!("no usable predictions from: {hard_failures:?}");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn summary(a: &SrgmAnalysis, recalibrated: bool) -> Table {
    let mut t = Table::new(
        "srgm_summary",
        &["model", "predictions", "skipped", "ks_raw", "ks_recalibrated", "final_mmtd_raw", "final_mmtd_recalibrated", "note"],
    );
    for k in &a.kinds {
        let note = match (&k.final_median_raw, &k.final_median_recalibrated) {
            (Err(e), _) => e.to_string(),
            (_, Err(e)) if recalibrated => e.to_string(),
            _ => String::new(),
        };
        t.push(vec![
            k.kind.to_string(),
            k.raw.steps.len().to_string(),
            k.raw.skipped.len().to_string(),
            opt(k.ks_raw),
            if recalibrated { opt(k.ks_recalibrated) } else { String::new() },
            opt(k.final_median_raw.as_ref().ok().copied()),
            if recalibrated { opt(final_recalibrated(k)) } else { String::new() },
            note,
        ]);
    }
    t.push(vec![
        "consensus".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        opt(a.consensus_raw),
        if recalibrated { opt(a.consensus_recalibrated) } else { String::new() },
        "median over models".into(),
    ]);
    t
}

fn mmtd_table(a: &SrgmAnalysis, recalibrated: bool) -> Table {
    let mut header = vec!["index".to_string()];
    header.extend(a.kinds.iter().map(|k| k.kind.to_string()));
    if recalibrated {
        header.extend(a.kinds.iter().map(|k| format!("{}#", k.kind)));
    }
    let lo = a.kinds.iter().flat_map(|k| k.raw.steps.first()).map(|s| s.record.index).min().unwrap_or(0);
    let hi = a.kinds.iter().flat_map(|k| k.raw.steps.last()).map(|s| s.record.index).max().unwrap_or(0);
    let lookup = |records: &[PredictionRecord], index: usize| {
        records.binary_search_by_key(&index, |r| r.index).ok().and_then(|i| records[i].median)
    };
    let raw: Vec<Vec<PredictionRecord>> = a.kinds.iter().map(|k| k.raw.records()).collect();
    let cal: Vec<Vec<PredictionRecord>> = a.kinds.iter().map(|k| k.recalibrated.records()).collect();
    let mut t = Table::with_header("mmtd", header);
    for index in lo..=hi {
        let mut row = vec![index.to_string()];
        row.extend(raw.iter().map(|r| opt(lookup(r, index))));
        if recalibrated {
            row.extend(cal.iter().map(|r| opt(lookup(r, index))));
        }
        t.push(row);
    }
    t
}

fn u_plot_table(a: &SrgmAnalysis, recalibrated: bool) -> Table {
    let mut header = vec!["u".to_string(), "uniform".to_string()];
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for k in &a.kinds {
        header.push(k.kind.to_string());
        columns.push(k.raw.records().iter().map(|r| r.u).collect());
    }
    if recalibrated {
        for k in &a.kinds {
            header.push(format!("{}#", k.kind));
            columns.push(k.recalibrated.records().iter().map(|r| r.u).collect());
        }
    }
    for c in &mut columns {
        c.sort_by(f64::total_cmp);
    }
    let mut t = Table::with_header("uplot", header);
    for i in 0..=100 {
        let x = i as f64 / 100.0;
        let mut row = vec![num(x), num(x)];
        row.extend(columns.iter().map(|c| {
            if c.is_empty() {
                String::new()
            } else {
                num(c.partition_point(|&u| u <= x) as f64 / c.len() as f64)
            }
        }));
        t.push(row);
    }
    t
}

/// Log PLR of every model against the first one, over the indices all share.
fn plr_table(a: &SrgmAnalysis) -> Result<Option<Table>> {
    let Some(reference) = a.kinds.first() else { return Ok(None) };
    if a.kinds.len() < 2 {
        return Ok(None);
    }
    let mut common = reference.raw.records();
    for k in &a.kinds[1..] {
        common = align(&common, &k.raw.records()).0;
    }
    let mut header = vec!["index".to_string()];
    let mut traces = Vec::new();
    for k in &a.kinds[1..] {
        let (_, other) = align(&common, &k.raw.records());
        traces.push(plr(&other, &common)?);
        header.push(format!("{}:{}", k.kind, reference.kind));
    }
    let mut t = Table::with_header("plr", header);
    for (i, r) in common.iter().enumerate() {
        let mut row = vec![r.index.to_string()];
        row.extend(traces.iter().map(|tr| num(tr[i])));
        t.push(row);
    }
    Ok(Some(t))
}

fn records_table(name: &str, records: &[PredictionRecord]) -> Table {
    let mut t = Table::new(name, &["index", "u", "log_density", "floored", "median", "realized"]);
    for r in records {
        t.push(vec![
            r.index.to_string(),
            num(r.u),
            num(r.log_density),
            r.floored.to_string(),
            opt(r.median),
            num(r.realized),
        ]);
    }
    t
}
