//! Alternating optimization over trajectory, transmit covariances and antenna
//! positions.
//!
//! Each sweep updates the trajectory first, then, slot by slot, the covariance
//! and the antenna layout. Every block update is safeguarded so the reciprocal
//! objective `(1/NK) Σ_{n,k} 1/C̃_k[n]` never decreases:
//!
//! - the trajectory candidate is accepted only if the objective does not drop;
//!   otherwise it is backtracked towards the previous path,
//! - a new covariance or layout replaces the incumbent only when strictly better.
//!
//! All comparisons go through [`SlotGeometry::reciprocal_sum`], the same code
//! that computes the reported objective.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamform::{optimize_beamforming_slot, slot_weight, BeamCovariance};
use crate::crb::{report_unchecked, CrbReport, SlotGeometry};
use crate::error::{Error, Result};
use crate::fa_pso::{optimize_positions_slot, ArrayLayout, SearchSpace, SlotContext};
use crate::linalg::{check_psd, trace_re};
use crate::scenario::Scenario;
use crate::trajectory::{freeze_steering, optimize_trajectory, trajectory_weights, Path};

const PATH_BACKTRACKS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayoutPolicy {
    /// Both arrays are searched by the swarm.
    Optimize,
    /// Only transmit coordinates are searched.
    TransmitOnly,
    /// Layouts never change.
    Frozen,
}

/// Starting layout and how layouts may change.
#[derive(Debug, Clone, PartialEq)]
pub struct AoPlan {
    pub initial_layout: ArrayLayout,
    pub policy: LayoutPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 0 is the initial point.
    pub iteration: usize,
    /// Reciprocal objective, rad⁻².
    pub objective: f64,
    /// Average finite CRB, rad².
    pub avg_crb: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub path: Path,
    pub covariances: Vec<BeamCovariance>,
    pub layouts: Vec<ArrayLayout>,
    pub report: CrbReport,
    pub trace: Vec<IterationRecord>,
    pub iterations_used: usize,
    pub converged: bool,
}

impl Solution {
    pub fn objectives(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.objective).collect()
    }
}

/// Runs the proposed scheme: straight-line path, isotropic covariances and
/// half-wavelength arrays as the starting point, every block optimized.
pub fn run_ao(scenario: &Scenario) -> Result<Solution> {
    run_ao_with(
        scenario,
        &AoPlan {
            initial_layout: ArrayLayout::dula(scenario)?,
            policy: LayoutPolicy::Optimize,
        },
    )
}

fn slot_sums(scenario: &Scenario, points: &[[f64; 2]], covs: &[BeamCovariance], layouts: &[ArrayLayout]) -> Vec<f64> {
    points
        .iter()
        .zip(covs)
        .zip(layouts)
        .map(|((&q, c), l)| SlotGeometry::new(scenario, q).reciprocal_sum(&l.tx, &l.rx, &c.matrix))
        .collect()
}

fn total(sums: &[f64]) -> f64 {
    sums.iter().sum()
}

/// Accepts `candidate` if it does not lower the objective, otherwise the
/// best point found by halving the step from `current` towards it.
fn safeguard_path(
    scenario: &Scenario,
    current: &Path,
    candidate: Path,
    covs: &[BeamCovariance],
    layouts: &[ArrayLayout],
) -> Path {
    let base = total(&slot_sums(scenario, &current.points, covs, layouts));
    let mut t = 1.0;
    for _ in 0..=PATH_BACKTRACKS {
        let points: Vec<[f64; 2]> = if t == 1.0 {
            candidate.points.clone()
        } else {
            current
                .points
                .iter()
                .zip(&candidate.points)
                .map(|(a, b)| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])
                .collect()
        };
        let trial = Path {
            points,
            ..current.clone()
        };
        if trial.check_feasible(1e-6).is_ok() && total(&slot_sums(scenario, &trial.points, covs, layouts)) >= base {
            return trial;
        }
        t *= 0.5;
    }
    current.clone()
}

fn update_slot(
    scenario: &Scenario,
    plan: &AoPlan,
    iteration: usize,
    slot: usize,
    point: [f64; 2],
    cov: &BeamCovariance,
    layout: &ArrayLayout,
) -> Result<(BeamCovariance, ArrayLayout)> {
    let geom = SlotGeometry::new(scenario, point);
    let k = geom.target_count();

    let steering: Vec<_> = (0..k).map(|t| geom.steering(t, &layout.tx)).collect();
    let weights: Vec<f64> = (0..k).map(|t| slot_weight(&geom, t, &layout.rx)).collect();
    let candidate = optimize_beamforming_slot(&steering, &weights, scenario.max_power_w);
    let old = geom.reciprocal_sum(&layout.tx, &layout.rx, &cov.matrix);
    let new = geom.reciprocal_sum(&layout.tx, &layout.rx, &candidate.matrix);
    let cov = if new > old { candidate } else { cov.clone() };

    let space = match plan.policy {
        LayoutPolicy::Frozen => return Ok((cov, layout.clone())),
        LayoutPolicy::Optimize => SearchSpace::Full,
        LayoutPolicy::TransmitOnly => SearchSpace::TransmitOnly { rx: layout.rx.clone() },
    };
    let ctx = SlotContext {
        geometry: &geom,
        covariance: &cov.matrix,
        tx_count: scenario.tx_antennas,
        aperture: scenario.aperture,
        min_spacing: scenario.min_spacing,
        space,
    };
    let outcome = optimize_positions_slot(&ctx, layout, &scenario.pso, scenario.seed, &[iteration as u64, slot as u64])?;
    let old = geom.reciprocal_sum(&layout.tx, &layout.rx, &cov.matrix);
    let new = geom.reciprocal_sum(&outcome.layout.tx, &outcome.layout.rx, &cov.matrix);
    let layout = if new > old { outcome.layout } else { layout.clone() };
    Ok((cov, layout))
}

/// Runs the alternating optimization from the given plan.
pub fn run_ao_with(scenario: &Scenario, plan: &AoPlan) -> Result<Solution> {
    let n = scenario.slots;
    let mut path = Path::straight_line(scenario);
    let mut covs = vec![BeamCovariance::isotropic(scenario.tx_antennas, scenario.max_power_w); n];
    let mut layouts = vec![plan.initial_layout.clone(); n];
    check_feasible(scenario, &path, &covs, &layouts)?;

    let report = report_unchecked(scenario, &path.points, &covs, &layouts);
    let mut objective = report.reciprocal_objective;
    let mut trace = vec![IterationRecord {
        iteration: 0,
        objective,
        avg_crb: report.avg_crb,
    }];
    let mut converged = false;
    let mut iterations_used = 0;

    for l in 1..=scenario.ao.l_max {
        let frozen = freeze_steering(&path, scenario, &layouts);
        let weights = trajectory_weights(&frozen, &covs, &layouts, scenario);
        let candidate = optimize_trajectory(&path, &weights, scenario)?;
        path = safeguard_path(scenario, &path, candidate, &covs, &layouts);

        let updated: Vec<(BeamCovariance, ArrayLayout)> = (0..n)
            .into_par_iter()
            .map(|slot| update_slot(scenario, plan, l, slot, path.points[slot], &covs[slot], &layouts[slot]))
            .collect::<Result<_>>()?;
        (covs, layouts) = updated.into_iter().unzip();
        check_feasible(scenario, &path, &covs, &layouts)?;

        let report = report_unchecked(scenario, &path.points, &covs, &layouts);
        trace.push(IterationRecord {
            iteration: l,
            objective: report.reciprocal_objective,
            avg_crb: report.avg_crb,
        });
        iterations_used = l;
        let improvement = report.reciprocal_objective - objective;
        objective = report.reciprocal_objective;
        if improvement < scenario.ao.epsilon * objective.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    let report = report_unchecked(scenario, &path.points, &covs, &layouts);
    Ok(Solution {
        path,
        covariances: covs,
        layouts,
        report,
        trace,
        iterations_used,
        converged,
    })
}

/// Checks every path, power, PSD and layout constraint.
pub fn check_feasible(
    scenario: &Scenario,
    path: &Path,
    covariances: &[BeamCovariance],
    layouts: &[ArrayLayout],
) -> Result<()> {
    path.check_feasible(1e-6)?;
    for (slot, (cov, layout)) in covariances.iter().zip(layouts).enumerate() {
        if cov.matrix.nrows() != scenario.tx_antennas || cov.matrix.ncols() != scenario.tx_antennas {
            return Err(Error::DimensionMismatch(format!(
                "slot {}: covariance is {}x{}, expected {}x{}",
                slot + 1,
                cov.matrix.nrows(),
                cov.matrix.ncols(),
                scenario.tx_antennas,
                scenario.tx_antennas
            )));
        }
        check_psd(&cov.matrix)?;
        let tr = trace_re(&cov.matrix);
        if tr > scenario.max_power_w + 1e-9 {
            return Err(Error::InfeasibleCovariance(format!(
                "slot {}: trace {tr} exceeds {}",
                slot + 1,
                scenario.max_power_w
            )));
        }
        layout.check(scenario).map_err(|e| match e {
            Error::InfeasibleLayout(m) => Error::InfeasibleLayout(format!("slot {}: {m}", slot + 1)),
            other => other,
        })?;
    }
    Ok(())
}

/// Index of the first entry that drops more than `tol` below its predecessor.
pub fn check_monotone(trace: &[f64], tol: f64) -> std::result::Result<(), usize> {
    match trace.windows(2).position(|w| w[1] < w[0] - tol) {
        Some(i) => Err(i + 1),
        None => Ok(()),
    }
}

/// Worst-case operation count
/// `l_max·[(2N)^3.5 + (N·M_t²)^3.5]·ln(1/ε) + N·T_max·P·(M_t + M_r)`.
pub fn complexity_estimate(scenario: &Scenario) -> Result<f64> {
    let eps = scenario.ao.epsilon;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1) for the complexity estimate, got {eps}"
        )));
    }
    let n = scenario.slots as f64;
    let mt = scenario.tx_antennas as f64;
    let mr = scenario.rx_antennas as f64;
    let convex = (2.0 * n).powf(3.5) + (n * mt * mt).powf(3.5);
    let swarm = n * scenario.pso.iterations as f64 * scenario.pso.particles as f64 * (mt + mr);
    Ok(scenario.ao.l_max as f64 * convex * (1.0 / eps).ln() + swarm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::default_scenario;

    fn small() -> Scenario {
        let mut s = default_scenario();
        s.pso.iterations = 8;
        s.pso.particles = 10;
        s.ao.l_max = 4;
        s
    }

    #[test]
    fn monotone_examples() {
        assert_eq!(check_monotone(&[1.0, 1.0, 1.0], 1e-9), Ok(()));
        assert_eq!(check_monotone(&[1.0, 2.0, 3.0], 1e-9), Ok(()));
        assert_eq!(check_monotone(&[1.0, 2.0, 1.0, 4.0], 1e-9), Err(2));
    }

    #[test]
    fn single_sweep_has_two_records() {
        let mut s = small();
        s.ao.l_max = 1;
        let sol = run_ao(&s).unwrap();
        assert_eq!(sol.trace.len(), 2);
        assert_eq!(sol.iterations_used, 1);
    }

    #[test]
    fn infinite_tolerance_stops_after_one_sweep() {
        let mut s = small();
        s.ao.epsilon = f64::INFINITY;
        let sol = run_ao(&s).unwrap();
        assert_eq!(sol.trace.len(), 2);
        assert!(sol.converged);
    }

    #[test]
    fn objective_is_monotone_and_iterates_feasible() {
        let s = small();
        let sol = run_ao(&s).unwrap();
        assert_eq!(check_monotone(&sol.objectives(), 1e-9), Ok(()));
        check_feasible(&s, &sol.path, &sol.covariances, &sol.layouts).unwrap();
        assert!(sol.trace.last().unwrap().objective > sol.trace[0].objective);
        assert_eq!(sol.report.reciprocal_objective, sol.trace.last().unwrap().objective);
    }

    #[test]
    fn runs_are_reproducible() {
        let s = small();
        assert_eq!(run_ao(&s).unwrap(), run_ao(&s).unwrap());
    }

    #[test]
    fn complexity_examples() {
        let mut s = default_scenario();
        s.ao.l_max = 10;
        s.ao.epsilon = 1e-3;
        s.pso.iterations = 50;
        s.pso.particles = 50;
        let value = complexity_estimate(&s).unwrap();
        // Independent evaluation of the same expression.
        let expected = 10.0 * (40f64.powf(3.5) + 2880f64.powf(3.5)) * 1000f64.ln() + 20.0 * 50.0 * 50.0 * 24.0;
        assert!(((value - expected) / expected).abs() < 1e-12);

        let mut no_swarm = s.clone();
        no_swarm.pso.iterations = 0;
        let doubled = {
            let mut d = s.clone();
            d.pso.particles = 100;
            complexity_estimate(&d).unwrap()
        };
        let swarm_term = value - complexity_estimate(&no_swarm).unwrap();
        assert!(((doubled - value) / swarm_term - 1.0).abs() < 1e-6);

        s.ao.epsilon = 1.0;
        assert!(complexity_estimate(&s).is_err());
    }
}
