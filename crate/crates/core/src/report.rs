//! Experiment artifacts: CSV tables and the JSON summary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::tolerances::{Check, CRITERIA};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// 17 significant digits in scientific notation, so every `f64` round-trips.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// RFC 4180 text: comma separated, CRLF line ends, fields quoted when
    /// they contain a comma, quote or line break.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .quote_style(csv::QuoteStyle::Necessary)
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    /// Acceptance criterion number, `None` for checks outside the suite.
    pub id: Option<u8>,
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl CriterionOutcome {
    pub fn new(id: u8, checks: Vec<Check>) -> Self {
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        CriterionOutcome { id: Some(id), name: CRITERIA[id as usize - 1].into(), passed, checks }
    }

    pub fn extra(name: &str, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        CriterionOutcome { id: None, name: name.into(), passed, checks }
    }

    /// One line: `criterion  3 PASS Fourier diagonalization  [name=measured (< threshold), ...]`.
    pub fn line(&self) -> String {
        let id = self.id.map(|k| format!("{k:>2}")).unwrap_or_else(|| " -".into());
        let checks: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                let op = match c.bound {
                    crate::tolerances::Bound::Below => "<",
                    crate::tolerances::Bound::Above => ">",
                    crate::tolerances::Bound::AtLeast => ">=",
                };
                format!("{}={:.3e} ({op} {:.1e})", c.name, c.measured, c.threshold)
            })
            .collect();
        format!(
            "criterion {id} {} {}  [{}]",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            checks.join(", ")
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub tables: Vec<Table>,
    pub criteria: Vec<CriterionOutcome>,
    pub tolerance_overrides: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct Summary<'a> {
    experiment: &'a str,
    seed: u64,
    passed: bool,
    criteria: &'a [CriterionOutcome],
    max_residuals: BTreeMap<&'a str, f64>,
    tolerance_overrides: &'a BTreeMap<String, f64>,
    files: Vec<String>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    /// Largest measured value per check name across criteria.
    pub fn max_residuals(&self) -> BTreeMap<&str, f64> {
        let mut out: BTreeMap<&str, f64> = BTreeMap::new();
        for c in self.criteria.iter().flat_map(|c| &c.checks) {
            let e = out.entry(c.name.as_str()).or_insert(f64::NEG_INFINITY);
            *e = e.max(c.measured);
        }
        out
    }

    /// Table names already carry the experiment prefix.
    pub fn file_name(&self, table: &Table) -> String {
        format!("{}.csv", table.name)
    }

    pub fn summary_json(&self) -> Result<String> {
        let s = Summary {
            experiment: &self.experiment,
            seed: self.seed,
            passed: self.passed(),
            criteria: &self.criteria,
            max_residuals: self.max_residuals(),
            tolerance_overrides: &self.tolerance_overrides,
            files: self.tables.iter().map(|t| self.file_name(t)).collect(),
        };
        Ok(serde_json::to_string_pretty(&s)? + "\n")
    }

    /// Writes every table and `<experiment>_summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for t in &self.tables {
            let p = dir.join(self.file_name(t));
            fs::write(&p, t.to_csv()?)?;
            written.push(p);
        }
        let p = dir.join(format!("{}_summary.json", self.experiment));
        fs::write(&p, self.summary_json()?)?;
        written.push(p);
        Ok(written)
    }
}
