//! CSV and JSON result files.
//!
//! Numbers are written in Rust's shortest round-trip form, so identical runs
//! give byte-identical files. Infinite CRB values are written as `inf`.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::ao::{IterationRecord, Solution};
use crate::beamform::BeamCovariance;
use crate::error::{Error, Result};
use crate::fa_pso::ArrayLayout;

/// Shortest round-trip text for `v`; exponent form for very small or large magnitudes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if !v.is_finite() || a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// A small CSV table of pre-formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

pub fn convergence_table(trace: &[IterationRecord]) -> CsvTable {
    let mut t = CsvTable::new(&["iteration", "objective_rad_inv2", "avg_crb_rad2"]);
    for r in trace {
        t.push(vec![r.iteration.to_string(), num(r.objective), num(r.avg_crb)]);
    }
    t
}

/// `slot, target, crb_rad2` for every entry, 1-based indices.
pub fn crb_table(solution: &Solution) -> CsvTable {
    let mut t = CsvTable::new(&["slot", "target", "crb_rad2"]);
    for (n, row) in solution.report.per_slot_per_target.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            t.push(vec![(n + 1).to_string(), (k + 1).to_string(), num(*v)]);
        }
    }
    t
}

pub fn path_table(solution: &Solution) -> CsvTable {
    let mut t = CsvTable::new(&["slot", "x_m", "y_m"]);
    for (n, p) in solution.path.points.iter().enumerate() {
        t.push(vec![(n + 1).to_string(), num(p[0]), num(p[1])]);
    }
    t
}

#[derive(Serialize)]
struct SlotDump<'a> {
    slot: usize,
    position_m: [f64; 2],
    tx_positions_m: &'a [f64],
    rx_positions_m: &'a [f64],
    covariance: &'a BeamCovariance,
}

#[derive(Serialize)]
struct SolutionDump<'a> {
    altitude_m: f64,
    iterations_used: usize,
    converged: bool,
    avg_crb_rad2: f64,
    infinite_crb_entries: usize,
    objective_rad_inv2: f64,
    slots: Vec<SlotDump<'a>>,
    trace: &'a [IterationRecord],
}

pub fn solution_json(solution: &Solution) -> Result<String> {
    let slots = solution
        .path
        .points
        .iter()
        .zip(&solution.layouts)
        .zip(&solution.covariances)
        .enumerate()
        .map(|(n, ((&q, ArrayLayout { tx, rx }), cov))| SlotDump {
            slot: n + 1,
            position_m: q,
            tx_positions_m: tx,
            rx_positions_m: rx,
            covariance: cov,
        })
        .collect();
    let dump = SolutionDump {
        altitude_m: solution.path.altitude,
        iterations_used: solution.iterations_used,
        converged: solution.converged,
        avg_crb_rad2: solution.report.avg_crb,
        infinite_crb_entries: solution.report.infinite_count,
        objective_rad_inv2: solution.report.reciprocal_objective,
        slots,
        trace: &solution.trace,
    };
    serde_json::to_string_pretty(&dump).map_err(|e| Error::Serialize(e.to_string()))
}

/// Writes `solution.json`, `crb_per_target.csv`, `convergence.csv` and `path.csv`.
pub fn save_results(solution: &Solution, out_dir: impl AsRef<Path>) -> Result<()> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json = solution_json(solution)?;
    let json_path = dir.join("solution.json");
    fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;
    crb_table(solution).write(dir.join("crb_per_target.csv"))?;
    convergence_table(&solution.trace).write(dir.join("convergence.csv"))?;
    path_table(solution).write(dir.join("path.csv"))?;
    Ok(())
}
