//! Monthly disengagement reports and their expansion into inter-failure miles.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bundled 51-month fixture (528 disengagements), `month,miles,disengagements`.
pub const BUNDLED_FIXTURE_CSV: &str = include_str!("../data/disengagements_51_months.csv");

const HEADER: [&str; 3] = ["month", "miles", "disengagements"];

/// One row of a monthly report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyRecord {
    /// Months since the first row of the report.
    pub month_index: u32,
    pub label: String,
    pub miles: f64,
    pub disengagements: u64,
}

/// Inter-failure miles reconstructed from monthly totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureHistory {
    pub interfailure_miles: Vec<f64>,
    pub total_miles: f64,
    /// Miles driven after the last disengagement (right-censored exposure).
    pub censored_tail: f64,
    pub seed: u64,
}

impl FailureHistory {
    pub fn len(&self) -> usize {
        self.interfailure_miles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interfailure_miles.is_empty()
    }

    /// Cumulative miles at each disengagement.
    pub fn event_miles(&self) -> Vec<f64> {
        cumulative(&self.interfailure_miles)
    }
}

pub(crate) fn cumulative(gaps: &[f64]) -> Vec<f64> {
    gaps.iter()
        .scan(0.0, |acc, g| {
            *acc += g;
            Some(*acc)
        })
        .collect()
}

/// Months as an ordinal: `YYYY-MM` labels or plain integers.
fn month_key(label: &str) -> Option<i64> {
    if let Some((y, m)) = label.split_once('-') {
        let y: i64 = y.trim().parse().ok()?;
        let m: i64 = m.trim().parse().ok()?;
        if (1..=12).contains(&m) {
            return Some(y * 12 + m - 1);
        }
        return None;
    }
    label.trim().parse().ok()
}

/// Parses a `month,miles,disengagements` report.
pub fn parse_monthly_csv<R: Read>(source: R) -> Result<Vec<MonthlyRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = reader.headers()?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names != HEADER {
        return Err(Error::ParseError {
            line: 1,
            message: format!("expected header `month,miles,disengagements`, got `{}`", names.join(",")),
        });
    }
    let mut records = Vec::new();
    let mut first_key = None;
    let mut last_key = None;
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let bad = |message: String| Error::ParseError { line, message };
        if row.len() != 3 {
            return Err(bad(format!("expected 3 fields, got {}", row.len())));
        }
        let label = row[0].to_string();
        let key = month_key(&label).ok_or_else(|| bad(format!("unrecognised month `{label}`")))?;
        let miles: f64 = row[1]
            .parse()
            .map_err(|_| bad(format!("miles `{}` is not a number", &row[1])))?;
        if !(miles >= 0.0 && miles.is_finite()) {
            return Err(bad(format!("miles must be finite and non-negative, got {miles}")));
        }
        let disengagements: u64 = row[2]
            .parse()
            .map_err(|_| bad(format!("disengagements `{}` is not a non-negative integer", &row[2])))?;
        if disengagements > 0 && miles == 0.0 {
            return Err(bad("disengagements reported in a month with no miles".into()));
        }
        if let Some(prev) = last_key {
            if key <= prev {
                return Err(Error::NonMonotoneMonths { line, label });
            }
        }
        last_key = Some(key);
        let first = *first_key.get_or_insert(key);
        records.push(MonthlyRecord {
            month_index: (key - first) as u32,
            label,
            miles,
            disengagements,
        });
    }
    Ok(records)
}

pub fn load_monthly_csv(path: impl AsRef<Path>) -> Result<Vec<MonthlyRecord>> {
    parse_monthly_csv(std::fs::File::open(path)?)
}

/// The bundled 51-month fixture.
pub fn bundled_fixture() -> Vec<MonthlyRecord> {
    parse_monthly_csv(BUNDLED_FIXTURE_CSV.as_bytes()).expect("bundled fixture parses")
}

/// Places each month's disengagements uniformly at random within that month's
/// miles (a homogeneous Poisson process conditioned on its count) and returns
/// the gaps between consecutive events. Deterministic for a fixed seed.
pub fn expand_to_interfailure(records: &[MonthlyRecord], seed: u64) -> Result<FailureHistory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = Vec::new();
    let mut offset = 0.0;
    for r in records {
        if r.disengagements > 0 && !(r.miles > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "month {} reports disengagements without miles",
                r.label
            )));
        }
        let mut month: Vec<f64> = (0..r.disengagements)
            // 1 - U lies in (0, 1], so positions lie in (0, miles].
            .map(|_| offset + (1.0 - rng.random::<f64>()) * r.miles)
            .collect();
        month.sort_by(f64::total_cmp);
        events.extend(month);
        offset += r.miles;
    }
    let mut previous = 0.0;
    let interfailure_miles = events
        .iter()
        .map(|&e| {
            let gap = e - previous;
            previous = e;
            gap
        })
        .collect();
    Ok(FailureHistory {
        interfailure_miles,
        total_miles: offset,
        censored_tail: offset - previous,
        seed,
    })
}

/// Writes `index,interfailure_miles` rows (1-based index).
pub fn write_history_csv<W: Write>(gaps: &[f64], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["index", "interfailure_miles"])?;
    for (i, g) in gaps.iter().enumerate() {
        w.write_record([(i + 1).to_string(), g.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `index,interfailure_miles` rows back.
pub fn read_history_csv<R: Read>(source: R) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["index", "interfailure_miles"] {
        return Err(Error::ParseError {
            line: 1,
            message: "expected header `index,interfailure_miles`".into(),
        });
    }
    let mut gaps = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let gap: f64 = row
            .get(1)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::ParseError { line, message: "bad inter-failure value".into() })?;
        if !(gap > 0.0 && gap.is_finite()) {
            return Err(Error::ParseError { line, message: format!("inter-failure miles must be positive, got {gap}") });
        }
        gaps.push(gap);
    }
    Ok(gaps)
}
