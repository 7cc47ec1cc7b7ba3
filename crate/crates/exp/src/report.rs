//! Output files: sweep CSVs, chain-trace CSVs and `summary.json`.
//!
//! Float cells use Rust's shortest round-trip formatting, so reruns with the
//! same master seed produce byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use rcar_core::mh::ChainTrace;

/// Version stamp baked in at build time.
pub fn build_describe() -> &'static str {
    env!("RCAR_GIT_DESCRIBE")
}

/// One cell of a sweep table.
#[derive(Clone, Debug)]
pub enum Cell {
    /// Text cell.
    Str(String),
    /// Numeric cell.
    Num(f64),
    /// Integer cell.
    Int(i64),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_string())
    }
}
impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

fn render(cell: &Cell) -> String {
    match cell {
        Cell::Str(s) => s.clone(),
        Cell::Num(x) => format!("{x}"),
        Cell::Int(i) => format!("{i}"),
    }
}

/// A sweep table with named columns; every estimate row is expected to carry
/// a standard error column.
#[derive(Clone, Debug)]
pub struct Table {
    /// Column names (header row).
    pub columns: Vec<String>,
    /// Row-major cells.
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    /// Empty table with the given header.
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row; panics when the width disagrees with the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    /// Writes the table as CSV.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(render))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Envelope written to `summary.json` next to the sweep CSVs.
#[derive(Serialize)]
pub struct Summary<T: Serialize> {
    /// Experiment name (the CLI subcommand).
    pub experiment: String,
    /// `git describe` of the build.
    pub build: String,
    /// Master seed of the run.
    pub master_seed: u64,
    /// Fully resolved configuration, defaults included.
    pub config: BTreeMap<String, String>,
    /// Named pass/fail gates.
    pub verdicts: BTreeMap<String, bool>,
    /// Experiment-specific fitted quantities.
    pub body: T,
}

impl<T: Serialize> Summary<T> {
    /// Writes `summary.json` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let path = dir.join("summary.json");
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    /// True when every verdict passed.
    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| *v)
    }
}

/// Writes a chain trace as CSV: one row per step with the step index, the
/// accept flag and every recorded functional.
pub fn write_trace_csv(trace: &ChainTrace, path: &Path) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header = vec!["step".to_string(), "accepted".to_string()];
    header.extend(trace.functionals().iter().map(|f| f.to_string()));
    w.write_record(&header)?;
    for step in 0..trace.n_steps() {
        let mut row = vec![
            format!("{step}"),
            format!("{}", u8::from(trace.accepted()[step])),
        ];
        for col in 0..trace.functionals().len() {
            row.push(format!("{}", trace.value_at(step, col)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trips_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(&["parameter", "estimate", "std_err", "n_samples"]);
        t.push(vec![2.0.into(), 0.125.into(), 0.01.into(), 100usize.into()]);
        let path = dir.path().join("t.csv");
        t.write_csv(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "parameter,estimate,std_err,n_samples\n2,0.125,0.01,100\n"
        );
    }
}
