//! Seeded batch studies: convergence, beampattern, per-target CRB and
//! parameter sweeps.
//!
//! Each `(scheme, seed)` or `(value, scheme, seed)` cell runs the full pipeline
//! on its own scenario copy with `seed` as the scenario seed. Cells run on the
//! rayon pool; results are collected in a fixed order, so the tables do not
//! depend on the number of workers.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::ao::Solution;
use crate::baselines::{run_scheme, SchemeId};
use crate::beamform::beampattern_gain;
use crate::error::{Error, Result};
use crate::geometry::aod;
use crate::output::{num, CsvTable};
use crate::scenario::{validate, Scenario};

/// Angle grid size used for beampatterns by default.
pub const BEAMPATTERN_POINTS: usize = 721;

/// `count` consecutive seeds starting at `first`.
pub fn seed_list(first: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| first.wrapping_add(i)).collect()
}

fn with_seed(scenario: &Scenario, seed: u64) -> Scenario {
    let mut s = scenario.clone();
    s.seed = seed;
    s
}

/// Per-iteration objective and average CRB of every scheme and seed.
/// Columns: `scheme, seed, iteration, objective_rad_inv2, avg_crb_rad2`.
pub fn exp_convergence(scenario: &Scenario, schemes: &[SchemeId], seeds: &[u64]) -> Result<CsvTable> {
    let cells: Vec<(SchemeId, u64)> = schemes
        .iter()
        .flat_map(|&s| seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let runs: Vec<Solution> = cells
        .par_iter()
        .map(|&(scheme, seed)| run_scheme(scheme, &with_seed(scenario, seed)))
        .collect::<Result<_>>()?;
    let mut table = CsvTable::new(&["scheme", "seed", "iteration", "objective_rad_inv2", "avg_crb_rad2"]);
    for ((scheme, seed), sol) in cells.iter().zip(&runs) {
        for r in &sol.trace {
            table.push(vec![
                scheme.to_string(),
                seed.to_string(),
                r.iteration.to_string(),
                num(r.objective),
                num(r.avg_crb),
            ]);
        }
    }
    Ok(table)
}

/// Gain over an angle grid at one slot, plus each target's angle.
#[derive(Debug, Clone, PartialEq)]
pub struct Beampattern {
    /// `(θ, gain)` pairs, rad and W.
    pub gains: Vec<(f64, f64)>,
    /// `(target, θ_k, gain at θ_k)`, 1-based targets.
    pub targets: Vec<(usize, f64, f64)>,
}

impl Beampattern {
    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["theta_rad", "gain_w"]);
        for &(theta, g) in &self.gains {
            t.push(vec![num(theta), num(g)]);
        }
        t
    }

    pub fn target_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["target", "theta_rad", "gain_w"]);
        for &(k, theta, g) in &self.targets {
            t.push(vec![k.to_string(), num(theta), num(g)]);
        }
        t
    }
}

/// `a(θ)ᴴ R a(θ)` on `points` angles evenly covering `[0, π/2]` at the 1-based `slot`.
pub fn exp_beampattern(solution: &Solution, scenario: &Scenario, slot: usize, points: usize) -> Result<Beampattern> {
    let n = solution.path.points.len();
    if slot == 0 || slot > n {
        return Err(Error::SlotOutOfRange { slot, slots: n });
    }
    if points < 2 {
        return Err(Error::InvalidArgument(format!("beampattern needs at least 2 angles, got {points}")));
    }
    let r = &solution.covariances[slot - 1].matrix;
    let tx = &solution.layouts[slot - 1].tx;
    let q = solution.path.points[slot - 1];
    let gain = |theta: f64| beampattern_gain(r, tx, theta, scenario.wavelength);
    let gains = (0..points)
        .map(|i| {
            let theta = FRAC_PI_2 * i as f64 / (points - 1) as f64;
            (theta, gain(theta))
        })
        .collect();
    let targets = scenario
        .targets
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let theta = aod(q, t.position, scenario.altitude);
            (k + 1, theta, gain(theta))
        })
        .collect();
    Ok(Beampattern { gains, targets })
}

/// Per-slot CRB of the chosen 1-based targets. Columns: `slot, target, crb_rad2`.
pub fn exp_target_crb(solution: &Solution, targets: &[usize]) -> Result<CsvTable> {
    let k = solution.report.per_slot_per_target.first().map_or(0, Vec::len);
    if let Some(&bad) = targets.iter().find(|&&t| t == 0 || t > k) {
        return Err(Error::InvalidArgument(format!("target {bad} out of range (1..={k})")));
    }
    let mut table = CsvTable::new(&["slot", "target", "crb_rad2"]);
    for &t in targets {
        for (n, row) in solution.report.per_slot_per_target.iter().enumerate() {
            table.push(vec![(n + 1).to_string(), t.to_string(), num(row[t - 1])]);
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Maximum transmit power, dBm.
    PowerDbm,
    /// Movable-region size in wavelengths.
    RegionWavelengths,
    /// Number of targets, redrawn per seed.
    Targets,
}

impl SweepVariable {
    pub fn column(self) -> &'static str {
        match self {
            SweepVariable::PowerDbm => "p_max_dbm",
            SweepVariable::RegionWavelengths => "region_lambda",
            SweepVariable::Targets => "targets",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepVariable::PowerDbm => vec![20.0, 25.0, 30.0, 35.0, 40.0],
            // 5λ cannot hold 12 antennas at λ/2 spacing; 6λ is the smallest feasible size on the grid.
            SweepVariable::RegionWavelengths => vec![6.0, 10.0, 15.0, 20.0, 25.0],
            SweepVariable::Targets => vec![2.0, 4.0, 6.0, 8.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub schemes: Vec<SchemeId>,
    pub seeds: Vec<u64>,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, schemes: Vec<SchemeId>, seeds: Vec<u64>) -> Self {
        Self {
            variable,
            values: variable.default_values(),
            schemes,
            seeds,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.values.is_empty() || self.schemes.is_empty() || self.seeds.is_empty() {
            return Err(Error::InvalidArgument("sweep needs values, schemes and seeds".into()));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("sweep values must be strictly increasing".into()));
        }
        if self.variable == SweepVariable::Targets && self.values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
            return Err(Error::InvalidArgument("target counts must be positive integers".into()));
        }
        Ok(())
    }
}

/// Scenario for one sweep cell.
pub fn sweep_scenario(base: &Scenario, variable: SweepVariable, value: f64, seed: u64) -> Result<Scenario> {
    let s = with_seed(base, seed);
    match variable {
        SweepVariable::PowerDbm => Ok(s.with_max_power_dbm(value)),
        SweepVariable::RegionWavelengths => {
            let mut raw = s.to_raw();
            raw.array.aperture = value * s.wavelength;
            Ok(validate(&raw)?)
        }
        SweepVariable::Targets => Ok(s.with_random_targets(value as usize, seed)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub value: f64,
    pub scheme: SchemeId,
    pub seed: u64,
    pub avg_crb: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub variable: SweepVariable,
    pub cells: Vec<SweepCell>,
    /// `(value, scheme, median avg CRB)` in value-major order.
    pub medians: Vec<(f64, SchemeId, f64)>,
}

impl SweepResult {
    /// Median avg CRB per value for one scheme.
    pub fn curve(&self, scheme: SchemeId) -> Vec<(f64, f64)> {
        self.medians
            .iter()
            .filter(|m| m.1 == scheme)
            .map(|m| (m.0, m.2))
            .collect()
    }

    pub fn cell_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&[self.variable.column(), "scheme", "seed", "avg_crb_rad2", "objective_rad_inv2"]);
        for c in &self.cells {
            t.push(vec![num(c.value), c.scheme.to_string(), c.seed.to_string(), num(c.avg_crb), num(c.objective)]);
        }
        t
    }

    pub fn median_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&[self.variable.column(), "scheme", "median_avg_crb_rad2"]);
        for (v, s, m) in &self.medians {
            t.push(vec![num(*v), s.to_string(), num(*m)]);
        }
        t
    }
}

/// Median with the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Runs every `(value, scheme, seed)` cell and aggregates medians over seeds.
pub fn exp_sweep(spec: &SweepSpec, base: &Scenario) -> Result<SweepResult> {
    spec.check()?;
    let mut jobs = Vec::new();
    for &value in &spec.values {
        for &scheme in &spec.schemes {
            for &seed in &spec.seeds {
                jobs.push((value, scheme, seed));
            }
        }
    }
    let cells: Vec<SweepCell> = jobs
        .par_iter()
        .map(|&(value, scheme, seed)| {
            let s = sweep_scenario(base, spec.variable, value, seed)?;
            let sol = run_scheme(scheme, &s)?;
            Ok(SweepCell {
                value,
                scheme,
                seed,
                avg_crb: sol.report.avg_crb,
                objective: sol.report.reciprocal_objective,
            })
        })
        .collect::<Result<_>>()?;
    let mut medians = Vec::new();
    for &value in &spec.values {
        for &scheme in &spec.schemes {
            let v: Vec<f64> = cells
                .iter()
                .filter(|c| c.value == value && c.scheme == scheme)
                .map(|c| c.avg_crb)
                .collect();
            medians.push((value, scheme, median(&v)));
        }
    }
    Ok(SweepResult {
        variable: spec.variable,
        cells,
        medians,
    })
}
