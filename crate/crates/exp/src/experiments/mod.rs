//! Experiment drivers: each submodule owns its config (defaults plus config
//! file overrides), its run function and its output tables.
//!
//! Runs are reproducible bit for bit from `(config, master seed)`: every
//! parallel work unit draws from its own `RngStream` keyed by a stable index,
//! and results are merged in index order by a single collector before
//! anything is written.

pub mod diagnostics;
pub mod innovation;
pub mod mse;
pub mod posterior1d;
pub mod projection;
pub mod reversibility;

use std::path::Path;

use anyhow::Result;
use serde::Serialize;

use crate::report::{Summary, Table};

/// A finished experiment: summary plus named sweep tables and optional
/// chain-trace exports.
pub struct Outcome<T: Serialize> {
    /// Verdicts, fitted quantities, resolved config.
    pub summary: Summary<T>,
    /// `(file_stem, table)` pairs written as `<file_stem>.csv`.
    pub tables: Vec<(String, Table)>,
    /// `(file_stem, trace)` pairs written as `<file_stem>.csv`.
    pub traces: Vec<(String, rcar_core::mh::ChainTrace)>,
    /// Observation data behind the run, written as `data.csv`.
    pub data: Option<rcar_core::potential::ObservationData>,
}

impl<T: Serialize> Outcome<T> {
    /// Writes every table, trace and the summary under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (stem, table) in &self.tables {
            table.write_csv(&dir.join(format!("{stem}.csv")))?;
        }
        for (stem, trace) in &self.traces {
            crate::report::write_trace_csv(trace, &dir.join(format!("{stem}.csv")))?;
        }
        if let Some(data) = &self.data {
            crate::synth::write_data_csv(data, &dir.join("data.csv"))?;
        }
        self.summary.write(dir)?;
        Ok(())
    }

    /// Prints one line per verdict and returns whether all passed.
    pub fn print_verdicts(&self) -> bool {
        for (name, pass) in &self.summary.verdicts {
            println!("{} {name}", if *pass { "PASS" } else { "FAIL" });
        }
        self.summary.all_pass()
    }
}
