//! Built-in test equations and the method comparison grid.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::classify;
use crate::error::{Error, Result};
use crate::methods::{iterate, Method};
use crate::problem::{Outcome, Problem, Status, StopCriteria};

/// A test equation with its starting point.
#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub problem: Problem,
    pub x0: f64,
}

/// The seven test equations with their standard starting points.
///
/// | name | f(x)                        | x0  |
/// |------|-----------------------------|-----|
/// | f1   | x⁵ - x + 1                  | 2   |
/// | f2   | cos x - x                   | 1.2 |
/// | f3   | arctan x                    | 3   |
/// | f4   | 10x e^(-x²) - 1             | 2.5 |
/// | f5   | e^(-x) sin x + ln(x² + 1)   | 1.3 |
/// | f6   | x³ - e^(-x)                 | 2   |
/// | f7   | e^(-x) - cos x              | 2   |
pub fn builtin_suite() -> Vec<SuiteEntry> {
    let entry = |problem, x0| SuiteEntry { problem, x0 };
    vec![
        entry(
            Problem::new("f1", |x: f64| x.powi(5) - x + 1.0, |x: f64| 5.0 * x.powi(4) - 1.0),
            2.0,
        ),
        entry(Problem::new("f2", |x: f64| x.cos() - x, |x: f64| -x.sin() - 1.0), 1.2),
        entry(Problem::new("f3", f64::atan, |x: f64| 1.0 / (1.0 + x * x)), 3.0),
        entry(
            Problem::new(
                "f4",
                |x: f64| 10.0 * x * (-x * x).exp() - 1.0,
                |x: f64| 10.0 * (-x * x).exp() * (1.0 - 2.0 * x * x),
            ),
            2.5,
        ),
        entry(
            Problem::new(
                "f5",
                |x: f64| (-x).exp() * x.sin() + (x * x).ln_1p(),
                |x: f64| (-x).exp() * (x.cos() - x.sin()) + 2.0 * x / (x * x + 1.0),
            ),
            1.3,
        ),
        entry(
            Problem::new("f6", |x: f64| x.powi(3) - (-x).exp(), |x: f64| 3.0 * x * x + (-x).exp()),
            2.0,
        ),
        entry(
            Problem::new("f7", |x: f64| (-x).exp() - x.cos(), |x: f64| -(-x).exp() + x.sin()),
            2.0,
        ),
    ]
}

/// Looks up a built-in entry by name (`f1` .. `f7`).
pub fn suite_entry(name: &str) -> Result<SuiteEntry> {
    builtin_suite()
        .into_iter()
        .find(|e| e.problem.name() == name)
        .ok_or_else(|| Error::UnknownFunction(name.to_string()))
}

/// One cell of the comparison grid.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub function: String,
    pub x0: f64,
    pub method: Method,
    pub outcome: Outcome,
}

impl ComparisonRow {
    pub fn record(&self) -> TableRecord {
        TableRecord {
            function: self.function.clone(),
            x0: self.x0,
            method: self.method.to_string(),
            status: self.outcome.status.as_str().to_string(),
            iterations: self.outcome.iterations,
            nfe: self.outcome.nfe,
            root: classify(&self.outcome),
        }
    }
}

/// Rows ordered by suite entry, then by method.
#[derive(Debug, Clone, Default)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn records(&self) -> Vec<TableRecord> {
        self.rows.iter().map(ComparisonRow::record).collect()
    }

    pub fn find(&self, function: &str, method: Method) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.function == function && r.method == method)
    }
}

/// The flat, serialisable form of a row: the seven csv/json fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub function: String,
    pub x0: f64,
    pub method: String,
    pub status: String,
    pub iterations: usize,
    pub nfe: u64,
    /// Root to 15 significant digits, or `Diverse` / `Breakdown`.
    pub root: String,
}

/// Runs every method on every entry. Cells are independent and run in
/// parallel; row order does not depend on scheduling.
pub fn run_comparison(suite: &[SuiteEntry], methods: &[Method], criteria: &StopCriteria) -> ComparisonTable {
    let cells: Vec<(&SuiteEntry, Method)> = suite
        .iter()
        .flat_map(|entry| methods.iter().map(move |&m| (entry, m)))
        .collect();
    let rows = cells
        .into_par_iter()
        .map(|(entry, method)| ComparisonRow {
            function: entry.problem.name().to_string(),
            x0: entry.x0,
            method,
            outcome: iterate(method, &entry.problem, entry.x0, criteria),
        })
        .collect();
    ComparisonTable { rows }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

pub const CSV_HEADER: &str = "function,x0,method,status,iterations,nfe,root";

pub fn format_table(table: &ComparisonTable, format: OutputFormat) -> String {
    format_records(&table.records(), format)
}

pub fn format_records(records: &[TableRecord], format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => render_text(records),
        OutputFormat::Csv => render_csv(records),
        OutputFormat::Json => render_json(records),
    }
}

fn render_csv(records: &[TableRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},\"{}\"",
            r.function, r.x0, r.method, r.status, r.iterations, r.nfe, r.root
        )
        .unwrap();
    }
    out
}

fn render_json(records: &[TableRecord]) -> String {
    let mut out = serde_json::to_string_pretty(records).expect("records serialise");
    out.push('\n');
    out
}

fn render_text(records: &[TableRecord]) -> String {
    let header = ["Function", "x0", "Method", "IT", "NFE", "xn"];
    let lines: Vec<[String; 6]> = records
        .iter()
        .map(|r| {
            // non-converged cells leave IT and NFE blank
            let converged = r.status == Status::Converged.as_str();
            let count = |v: String| if converged { v } else { String::new() };
            [
                r.function.clone(),
                r.x0.to_string(),
                r.method.clone(),
                count(r.iterations.to_string()),
                count(r.nfe.to_string()),
                r.root.clone(),
            ]
        })
        .collect();

    let mut widths = header.map(str::len);
    for line in &lines {
        for (w, cell) in widths.iter_mut().zip(line) {
            *w = (*w).max(cell.len());
        }
    }

    let mut out = String::new();
    let mut push_line = |cells: &[&str]| {
        let row: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(row.join("  ").trim_end());
        out.push('\n');
    };
    push_line(&header);
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    push_line(&rule.iter().map(String::as_str).collect::<Vec<_>>());
    for line in &lines {
        push_line(&line.iter().map(String::as_str).collect::<Vec<_>>());
    }
    out
}

/// Parses csv produced by [`format_table`].
pub fn parse_csv(text: &str) -> std::result::Result<Vec<TableRecord>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}
