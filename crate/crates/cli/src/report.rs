//! CSV rows and the plain-text run summary.

use std::fmt::{self, Write as _};
use std::fs;
use std::io;
use std::path::Path;

use nonconvex_ftpl::{CallCounts, OracleReport};
use serde::Serialize;

/// Version tag of the CSV layout; bump when columns change.
pub const CSV_SCHEMA: &str = "ftpl-rows/1";

/// Column names, in order. Inapplicable cells are left empty.
pub const CSV_HEADER: [&str; 12] = [
    "trial",
    "t",
    "incurred_loss",
    "cumulative_loss",
    "best_in_hindsight",
    "regret",
    "avg_regret",
    "offline_calls",
    "value_calls",
    "gap_x",
    "gap_y",
    "l1_step_gap",
];

/// One CSV line. `t` is the round (or the draw index for `stability` and the
/// horizon for `scaling`); counts are cumulative within the trial.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CsvRow {
    pub trial: usize,
    pub t: usize,
    pub incurred_loss: Option<f64>,
    pub cumulative_loss: Option<f64>,
    pub best_in_hindsight: Option<f64>,
    pub regret: Option<f64>,
    pub avg_regret: Option<f64>,
    pub offline_calls: Option<u64>,
    pub value_calls: Option<u64>,
    pub gap_x: Option<f64>,
    pub gap_y: Option<f64>,
    pub l1_step_gap: Option<f64>,
}

impl CsvRow {
    pub fn new(trial: usize, t: usize) -> Self {
        Self {
            trial,
            t,
            ..Self::default()
        }
    }

    pub fn with_counts(mut self, counts: CallCounts) -> Self {
        self.offline_calls = Some(counts.offline_calls);
        self.value_calls = Some(counts.value_calls);
        self
    }
}

/// Writes `rows` under the fixed header.
pub fn write_csv(path: &Path, rows: &[CsvRow]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()
}

/// Sum of per-trial call counts.
pub fn total_counts<'a>(counts: impl IntoIterator<Item = &'a CallCounts>) -> CallCounts {
    counts.into_iter().fold(CallCounts::default(), |acc, c| CallCounts {
        value_calls: acc.value_calls + c.value_calls,
        offline_calls: acc.offline_calls + c.offline_calls,
        sample_count: acc.sample_count + c.sample_count,
    })
}

/// A sectioned `key = value` text block.
#[derive(Debug, Clone, Default)]
pub struct Summary {
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn section(&mut self, name: &str) -> &mut Self {
        self.sections.push((name.to_string(), Vec::new()));
        self
    }

    pub fn entry(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        if self.sections.is_empty() {
            self.section("run");
        }
        let (_, entries) = self.sections.last_mut().expect("a section exists");
        entries.push((key.to_string(), value.to_string()));
        self
    }

    /// The learner's oracle totals; complexity is samples + value calls +
    /// offline calls.
    pub fn oracle(&mut self, name: &str, report: OracleReport) -> &mut Self {
        self.section(name)
            .entry("sample_count", report.sample_count)
            .entry("value_calls", report.value_calls)
            .entry("offline_calls", report.offline_calls)
            .entry("oracle_complexity", report.oracle_complexity)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .filter(|(s, _)| s == section)
            .flat_map(|(_, e)| e.iter())
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.to_string())
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (i, (name, entries)) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            writeln!(out, "[{name}]")?;
            for (k, v) in entries {
                writeln!(out, "{k} = {v}")?;
            }
        }
        f.write_str(&out)
    }
}

/// `mean ± se` with enough digits for comparison across runs.
pub fn mean_se(mean: f64, se: f64) -> String {
    format!("{mean:.6} (se {se:.6})")
}
