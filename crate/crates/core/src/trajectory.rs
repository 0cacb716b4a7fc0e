//! UAV trajectory: feasibility, projection, and the frozen-angle SCA step.
//!
//! With the angles of departure frozen at the previous path, each reciprocal
//! bound becomes `w_{k,n} / (‖q[n] − q_k‖² + H²)`. Since `1/(u + H²)` is convex
//! in `u = ‖q − q_k‖²`, its tangent in `u` is a global lower bound and a
//! concave quadratic in `q`:
//!
//! `g(q; q⁰) = f⁰ − (‖q − q_k‖² − ‖q⁰ − q_k‖²)·(f⁰)²`, with `f⁰ = 1/(‖q⁰ − q_k‖² + H²)`.
//!
//! The surrogate sum is maximized by projected gradient ascent under the
//! endpoint and per-step speed constraints.

use serde::{Deserialize, Serialize};

use crate::beamform::BeamCovariance;
use crate::error::{Error, Result};
use crate::fa_pso::ArrayLayout;
use crate::geometry::{aod, aperture_term, cos_aod, steering, wavenumber};
use crate::linalg::{quad_form, CVector};
use crate::scenario::Scenario;

const PROJECTION_SWEEPS: usize = 500;
const PROJECTION_TOL: f64 = 1e-9;
const ASCENT_ITERATIONS: usize = 200;
const STATIONARITY_TOL: f64 = 1e-6;
const ARMIJO_C: f64 = 1e-4;
const ARMIJO_BETA: f64 = 0.5;
const MAX_BACKTRACKS: usize = 40;

/// Horizontal waypoints of the UAV, one per slot, plus the constraints they obey.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub points: Vec<[f64; 2]>,
    pub altitude: f64,
    pub max_speed: f64,
    pub slot_duration: f64,
    pub start: [f64; 2],
    pub end: [f64; 2],
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

fn dist_sq(p: [f64; 2], q: [f64; 2]) -> f64 {
    let dx = p[0] - q[0];
    let dy = p[1] - q[1];
    dx * dx + dy * dy
}

impl Path {
    /// `N` equally spaced points from `q_I` to `q_F`.
    pub fn straight_line(scenario: &Scenario) -> Self {
        let n = scenario.slots;
        let (s, e) = (scenario.start, scenario.end);
        let points = (0..n)
            .map(|i| {
                if i + 1 == n {
                    e
                } else {
                    let t = i as f64 / (n - 1).max(1) as f64;
                    [s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1])]
                }
            })
            .collect();
        Self::with_points(scenario, points)
    }

    pub fn with_points(scenario: &Scenario, points: Vec<[f64; 2]>) -> Self {
        Self {
            points,
            altitude: scenario.altitude,
            max_speed: scenario.max_speed,
            slot_duration: scenario.slot_duration,
            start: scenario.start,
            end: scenario.end,
        }
    }

    pub fn max_step(&self) -> f64 {
        self.max_speed * self.slot_duration
    }

    /// Largest per-slot displacement.
    pub fn longest_step(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| dist(w[0], w[1]))
            .fold(0.0, f64::max)
    }

    /// Endpoints must match exactly; steps may exceed `V_max τ` by at most `tol`.
    pub fn check_feasible(&self, tol: f64) -> Result<()> {
        let (first, last) = match (self.points.first(), self.points.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return Err(Error::InfeasiblePath("path has no points".into())),
        };
        if first != self.start || last != self.end {
            return Err(Error::InfeasiblePath(format!(
                "endpoints {first:?} -> {last:?} differ from {:?} -> {:?}",
                self.start, self.end
            )));
        }
        if let Some(bad) = self.points.iter().flatten().find(|v| !v.is_finite()) {
            return Err(Error::InfeasiblePath(format!("non-finite coordinate {bad}")));
        }
        let limit = self.max_step();
        for (i, w) in self.points.windows(2).enumerate() {
            let step = dist(w[0], w[1]);
            if step > limit + tol {
                return Err(Error::InfeasiblePath(format!(
                    "step {} -> {} covers {step:.6} m, limit {limit:.6} m",
                    i + 1,
                    i + 2
                )));
            }
        }
        Ok(())
    }
}

/// Clamps the endpoints and restores the speed limit by cyclic projection.
pub fn project_path(
    raw: &[[f64; 2]],
    start: [f64; 2],
    end: [f64; 2],
    max_speed: f64,
    slot_duration: f64,
) -> Result<Vec<[f64; 2]>> {
    let n = raw.len();
    let r = max_speed * slot_duration;
    let reach = n.saturating_sub(1) as f64 * r;
    let gap = dist(start, end);
    if gap > reach * (1.0 + 1e-12) || (n == 1 && start != end) {
        return Err(Error::EndpointsUnreachable {
            distance: gap,
            reach,
        });
    }
    let mut q = raw.to_vec();
    if n == 0 {
        return Ok(q);
    }
    q[0] = start;
    q[n - 1] = end;
    let sweep = |q: &mut Vec<[f64; 2]>, i: usize| -> f64 {
        let d = dist(q[i - 1], q[i]);
        let excess = d - r;
        if excess <= 0.0 {
            return 0.0;
        }
        let u = [(q[i][0] - q[i - 1][0]) / d, (q[i][1] - q[i - 1][1]) / d];
        let (back, fwd) = match (i - 1 == 0, i == n - 1) {
            (true, true) => (0.0, 0.0),
            (true, false) => (0.0, excess),
            (false, true) => (excess, 0.0),
            (false, false) => (excess / 2.0, excess / 2.0),
        };
        q[i - 1] = [q[i - 1][0] + back * u[0], q[i - 1][1] + back * u[1]];
        q[i] = [q[i][0] - fwd * u[0], q[i][1] - fwd * u[1]];
        excess
    };
    let violation = |q: &[[f64; 2]]| q.windows(2).map(|w| dist(w[0], w[1]) - r).fold(0.0, f64::max);
    for _ in 0..PROJECTION_SWEEPS {
        for i in 1..n {
            sweep(&mut q, i);
        }
        for i in (1..n).rev() {
            sweep(&mut q, i);
        }
        if violation(&q) < PROJECTION_TOL {
            return Ok(q);
        }
    }
    // Cyclic projection converges slowly when the endpoints are nearly at full
    // reach. Fall back to the closest feasible blend with the straight line.
    let line: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            if i + 1 == n {
                end
            } else {
                let t = i as f64 / (n - 1) as f64;
                [start[0] + t * (end[0] - start[0]), start[1] + t * (end[1] - start[1])]
            }
        })
        .collect();
    let blend = |t: f64| -> Vec<[f64; 2]> {
        q.iter()
            .zip(&line)
            .enumerate()
            .map(|(i, (a, b))| {
                if i == 0 || i + 1 == n {
                    *b
                } else {
                    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
                }
            })
            .collect()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if violation(&blend(mid)) < PROJECTION_TOL {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let out = blend(hi);
    if violation(&out) < PROJECTION_TOL {
        Ok(out)
    } else {
        Err(Error::InfeasiblePath(format!(
            "could not restore the speed limit (violation {:e} m)",
            violation(&out)
        )))
    }
}

/// Angle and transmit steering vector of one target, frozen at the previous path.
#[derive(Debug, Clone)]
pub struct FrozenTarget {
    pub theta: f64,
    pub a: CVector,
}

/// `frozen[n][k]` at `path_prev` with the slot's transmit layout.
pub fn freeze_steering(path_prev: &Path, scenario: &Scenario, layouts: &[ArrayLayout]) -> Vec<Vec<FrozenTarget>> {
    path_prev
        .points
        .iter()
        .zip(layouts)
        .map(|(&q, layout)| {
            scenario
                .targets
                .iter()
                .map(|t| {
                    let theta = aod(q, t.position, scenario.altitude);
                    FrozenTarget {
                        theta,
                        a: steering(&layout.tx, theta, scenario.wavelength),
                    }
                })
                .collect()
        })
        .collect()
}

/// `w[n][k]` such that the frozen reciprocal bound is `w / (‖q[n] − q_k‖² + H²)`.
pub fn trajectory_weights(
    frozen: &[Vec<FrozenTarget>],
    covariances: &[BeamCovariance],
    layouts: &[ArrayLayout],
    scenario: &Scenario,
) -> Vec<Vec<f64>> {
    let k0 = wavenumber(scenario.wavelength);
    frozen
        .iter()
        .zip(covariances)
        .zip(layouts)
        .map(|((slot, cov), layout)| {
            let omega = scenario.frames as f64 * aperture_term(&layout.rx);
            slot.iter()
                .zip(&scenario.targets)
                .map(|(f, target)| {
                    let g = k0 * cos_aod(f.theta);
                    let lambda = target.alpha().norm_sqr() * g * g * quad_form(&f.a, &cov.matrix);
                    (lambda * omega / (2.0 * scenario.noise_w)).max(0.0)
                })
                .collect()
        })
        .collect()
}

/// `Σ_{n,k} w[n][k] / (‖q[n] − q_k‖² + H²)`.
pub fn p3_objective(points: &[[f64; 2]], weights: &[Vec<f64>], scenario: &Scenario) -> f64 {
    let h2 = scenario.altitude * scenario.altitude;
    points
        .iter()
        .zip(weights)
        .map(|(&q, w)| {
            w.iter()
                .zip(&scenario.targets)
                .map(|(&wk, t)| wk / (dist_sq(q, t.position) + h2))
                .sum::<f64>()
        })
        .sum()
}

/// Concave minorant of `1/(‖q − target‖² + H²)` that is tight at `q0`.
pub fn surrogate(q: [f64; 2], q0: [f64; 2], target: [f64; 2], altitude: f64) -> f64 {
    let u0 = dist_sq(q0, target);
    let f0 = 1.0 / (u0 + altitude * altitude);
    f0 - (dist_sq(q, target) - u0) * f0 * f0
}

/// The surrogate sum around a fixed expansion point, as a separable quadratic.
struct Surrogate {
    targets: Vec<[f64; 2]>,
    /// `w f0²` per slot and target.
    curvature: Vec<Vec<f64>>,
    /// Constant part per slot: `Σ_k w (f0 + u0 f0²)`.
    offset: Vec<f64>,
}

impl Surrogate {
    fn new(expansion: &[[f64; 2]], weights: &[Vec<f64>], scenario: &Scenario) -> Self {
        let h2 = scenario.altitude * scenario.altitude;
        let targets: Vec<[f64; 2]> = scenario.targets.iter().map(|t| t.position).collect();
        let mut curvature = Vec::with_capacity(expansion.len());
        let mut offset = Vec::with_capacity(expansion.len());
        for (&q0, w) in expansion.iter().zip(weights) {
            let mut c = Vec::with_capacity(targets.len());
            let mut o = 0.0;
            for (&wk, &t) in w.iter().zip(&targets) {
                let u0 = dist_sq(q0, t);
                let f0 = 1.0 / (u0 + h2);
                c.push(wk * f0 * f0);
                o += wk * (f0 + u0 * f0 * f0);
            }
            curvature.push(c);
            offset.push(o);
        }
        Self {
            targets,
            curvature,
            offset,
        }
    }

    fn value(&self, q: &[[f64; 2]]) -> f64 {
        q.iter()
            .zip(&self.curvature)
            .zip(&self.offset)
            .map(|((&p, c), &o)| {
                o - c
                    .iter()
                    .zip(&self.targets)
                    .map(|(&ck, &t)| ck * dist_sq(p, t))
                    .sum::<f64>()
            })
            .sum()
    }

    /// Gradient per slot and the slot's curvature `2 Σ_k w f0²`.
    fn gradient(&self, q: &[[f64; 2]]) -> Vec<([f64; 2], f64)> {
        q.iter()
            .zip(&self.curvature)
            .map(|(&p, c)| {
                let mut g = [0.0; 2];
                let mut l = 0.0;
                for (&ck, &t) in c.iter().zip(&self.targets) {
                    g[0] -= 2.0 * ck * (p[0] - t[0]);
                    g[1] -= 2.0 * ck * (p[1] - t[1]);
                    l += 2.0 * ck;
                }
                (g, l)
            })
            .collect()
    }
}

/// One SCA step: maximizes the surrogate around `path_prev` and returns a
/// feasible path whose true frozen objective is no smaller than at `path_prev`.
pub fn optimize_trajectory(path_prev: &Path, weights: &[Vec<f64>], scenario: &Scenario) -> Result<Path> {
    path_prev.check_feasible(1e-6)?;
    if weights.len() != path_prev.points.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weight rows for {} slots",
            weights.len(),
            path_prev.points.len()
        )));
    }
    if weights.iter().flatten().all(|&w| w <= 0.0) {
        return Ok(path_prev.clone());
    }
    let n = path_prev.points.len();
    let sur = Surrogate::new(&path_prev.points, weights, scenario);
    let project = |raw: &[[f64; 2]]| {
        project_path(raw, path_prev.start, path_prev.end, path_prev.max_speed, path_prev.slot_duration)
    };

    let mut q = path_prev.points.clone();
    let mut value = sur.value(&q);
    for _ in 0..ASCENT_ITERATIONS {
        let grad = sur.gradient(&q);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let raw: Vec<[f64; 2]> = q
                .iter()
                .zip(&grad)
                .enumerate()
                .map(|(i, (&p, &(g, l)))| {
                    if i == 0 || i + 1 == n || l <= 0.0 {
                        p
                    } else {
                        [p[0] + step * g[0] / l, p[1] + step * g[1] / l]
                    }
                })
                .collect();
            if let Ok(cand) = project(&raw) {
                let cand_value = sur.value(&cand);
                let ascent: f64 = cand
                    .iter()
                    .zip(&q)
                    .zip(&grad)
                    .map(|((c, p), (g, _))| g[0] * (c[0] - p[0]) + g[1] * (c[1] - p[1]))
                    .sum();
                if cand_value >= value + ARMIJO_C * ascent && cand_value >= value {
                    accepted = Some((cand, cand_value, step));
                    break;
                }
            }
            step *= ARMIJO_BETA;
        }
        let Some((cand, cand_value, step)) = accepted else {
            break;
        };
        let moved = cand.iter().zip(&q).map(|(c, p)| dist(*c, *p)).fold(0.0, f64::max);
        q = cand;
        value = cand_value;
        if moved / step < STATIONARITY_TOL {
            break;
        }
    }

    let result = Path {
        points: q,
        ..path_prev.clone()
    };
    if result.check_feasible(1e-6).is_err()
        || p3_objective(&result.points, weights, scenario) < p3_objective(&path_prev.points, weights, scenario)
    {
        return Ok(path_prev.clone());
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fa_pso::ArrayLayout;
    use crate::rng::stream;
    use crate::scenario::{default_scenario, Target};
    use proptest::prelude::*;
    use rand::Rng;

    fn layouts(s: &Scenario) -> Vec<ArrayLayout> {
        vec![ArrayLayout::dula(s).unwrap(); s.slots]
    }

    #[test]
    fn straight_line_is_feasible_and_fixed_by_projection() {
        let s = default_scenario();
        let path = Path::straight_line(&s);
        path.check_feasible(0.0).unwrap();
        assert_eq!(path.points.len(), s.slots);
        let projected = project_path(&path.points, s.start, s.end, s.max_speed, s.slot_duration).unwrap();
        for (a, b) in projected.iter().zip(&path.points) {
            assert!(dist(*a, *b) < 1e-12);
        }
    }

    #[test]
    fn displaced_point_is_pulled_back() {
        let s = default_scenario();
        let mut pts = Path::straight_line(&s).points;
        pts[7] = [pts[7][0], pts[7][1] + 300.0];
        let projected = project_path(&pts, s.start, s.end, s.max_speed, s.slot_duration).unwrap();
        let path = Path::with_points(&s, projected);
        path.check_feasible(1e-6).unwrap();
        assert!(path.points[7][1] > 400.0);
    }

    #[test]
    fn unreachable_endpoints_are_rejected() {
        let err = project_path(&[[0.0, 0.0]; 3], [0.0, 0.0], [100.0, 0.0], 10.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::EndpointsUnreachable { .. }));
    }

    #[test]
    fn frozen_angles_match_live_angles() {
        let s = default_scenario();
        let path = Path::straight_line(&s);
        let frozen = freeze_steering(&path, &s, &layouts(&s));
        for (n, slot) in frozen.iter().enumerate() {
            for (k, f) in slot.iter().enumerate() {
                assert_eq!(f.theta, aod(path.points[n], s.targets[k].position, s.altitude));
            }
        }
        let mut overhead = path.clone();
        overhead.points[3] = s.targets[0].position;
        let frozen = freeze_steering(&overhead, &s, &layouts(&s));
        assert_eq!(frozen[3][0].theta, std::f64::consts::FRAC_PI_2);
        let covs = vec![BeamCovariance::isotropic(s.tx_antennas, s.max_power_w); s.slots];
        assert_eq!(trajectory_weights(&frozen, &covs, &layouts(&s), &s)[3][0], 0.0);
    }

    #[test]
    fn weights_reproduce_the_reciprocal_bound() {
        let s = default_scenario();
        let path = Path::straight_line(&s);
        let mut lay = layouts(&s);
        for l in &mut lay {
            l.rx = crate::baselines::sula_layout(s.rx_antennas, s.aperture, s.min_spacing).unwrap();
        }
        let covs = vec![BeamCovariance::isotropic(s.tx_antennas, s.max_power_w); s.slots];
        let w = trajectory_weights(&freeze_steering(&path, &s, &lay), &covs, &lay, &s);
        let h2 = s.altitude * s.altitude;
        for n in 0..s.slots {
            let geom = crate::crb::SlotGeometry::new(&s, path.points[n]);
            for k in 0..s.target_count() {
                let direct = geom.reciprocal(k, &lay[n].tx, aperture_term(&lay[n].rx), &covs[n].matrix);
                let via = w[n][k] / (dist_sq(path.points[n], s.targets[k].position) + h2);
                assert!((direct - via).abs() <= 1e-10 * direct.abs().max(1e-300));
            }
        }

        let zero_cov = vec![BeamCovariance::isotropic(s.tx_antennas, 0.0); s.slots];
        let w0 = trajectory_weights(&freeze_steering(&path, &s, &lay), &zero_cov, &lay, &s);
        assert!(w0.iter().flatten().all(|&v| v == 0.0));
        let mut doubled = s.clone();
        doubled.frames *= 2;
        let w2 = trajectory_weights(&freeze_steering(&path, &s, &lay), &covs, &lay, &doubled);
        assert!(((w2[4][2] / w[4][2]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_weights_leave_path_unchanged() {
        let s = default_scenario();
        let path = Path::straight_line(&s);
        let w = vec![vec![0.0; s.target_count()]; s.slots];
        assert_eq!(optimize_trajectory(&path, &w, &s).unwrap(), path);
    }

    #[test]
    fn single_target_at_both_endpoints_pins_the_path() {
        let mut s = default_scenario();
        let spot = [300.0, 500.0];
        s.targets = vec![Target {
            position: spot,
            rcs_m2: 1.0,
        }];
        s.start = spot;
        s.end = spot;
        let mut path = Path::straight_line(&s);
        for (i, p) in path.points.iter_mut().enumerate().skip(1).take(s.slots - 2) {
            *p = [spot[0] + 20.0 * (i as f64 / 3.0).sin(), spot[1] + 15.0];
        }
        path.points = project_path(&path.points, spot, spot, s.max_speed, s.slot_duration).unwrap();
        let w = vec![vec![5.0]; s.slots];
        let out = optimize_trajectory(&path, &w, &s).unwrap();
        for p in &out.points {
            assert!(dist(*p, spot) < 1e-6, "{p:?}");
        }
        let per_slot = 5.0 / (s.altitude * s.altitude);
        assert!((p3_objective(&out.points, &w, &s) - per_slot * s.slots as f64).abs() < 1e-9 * per_slot);
    }

    #[test]
    fn random_instances_are_monotone_and_feasible() {
        let s = default_scenario();
        let mut rng = stream(21, &[]);
        let mut path = Path::straight_line(&s);
        for _ in 0..20 {
            let w: Vec<Vec<f64>> = (0..s.slots)
                .map(|_| (0..s.target_count()).map(|_| rng.gen::<f64>() * 1e6).collect())
                .collect();
            let out = optimize_trajectory(&path, &w, &s).unwrap();
            out.check_feasible(1e-6).unwrap();
            assert!(p3_objective(&out.points, &w, &s) >= p3_objective(&path.points, &w, &s) - 1e-12);
            path = out;
        }
    }

    #[test]
    fn mirrored_scenario_gives_mirrored_path() {
        let mut s = default_scenario();
        let axis = 400.0;
        let half = [[150.0, 250.0], [420.0, 130.0], [650.0, 320.0]];
        s.targets = half
            .iter()
            .flat_map(|&[x, y]| {
                [
                    Target { position: [x, y], rcs_m2: 1.0 },
                    Target { position: [x, 2.0 * axis - y], rcs_m2: 1.0 },
                ]
            })
            .collect();
        let path = Path::straight_line(&s);
        let w: Vec<Vec<f64>> = (0..s.slots)
            .map(|n| (0..6).map(|k| 1.0 + (n + k / 2) as f64).collect())
            .collect();
        let mut current = path;
        for _ in 0..3 {
            current = optimize_trajectory(&current, &w, &s).unwrap();
        }
        for p in &current.points {
            assert!((p[1] - axis).abs() < 1e-6, "{p:?}");
        }

        let mut asym = s.clone();
        asym.targets.truncate(1);
        let w1: Vec<Vec<f64>> = vec![vec![1.0]; s.slots];
        let up = optimize_trajectory(&Path::straight_line(&asym), &w1, &asym).unwrap();
        let mut mirrored = asym.clone();
        mirrored.targets[0].position[1] = 2.0 * axis - asym.targets[0].position[1];
        let down = optimize_trajectory(&Path::straight_line(&mirrored), &w1, &mirrored).unwrap();
        for (a, b) in up.points.iter().zip(&down.points) {
            assert!((a[0] - b[0]).abs() < 1e-6 && (a[1] - (2.0 * axis - b[1])).abs() < 1e-6);
        }
    }

    #[test]
    fn surrogate_minorizes_on_ten_thousand_pairs() {
        let mut rng = stream(22, &[]);
        let target = [400.0, 400.0];
        for _ in 0..10_000 {
            let q = [rng.gen_range(-200.0..1000.0), rng.gen_range(-200.0..1000.0)];
            let q0 = [rng.gen_range(-200.0..1000.0), rng.gen_range(-200.0..1000.0)];
            let h: f64 = rng.gen_range(10.0..300.0);
            let f = 1.0 / (dist_sq(q, target) + h * h);
            assert!(surrogate(q, q0, target, h) <= f * (1.0 + 1e-12));
            let f0 = 1.0 / (dist_sq(q0, target) + h * h);
            assert!((surrogate(q0, q0, target, h) - f0).abs() <= 1e-12 * f0);
        }
    }

    proptest! {
        #[test]
        fn projection_is_feasible(
            offsets in prop::collection::vec((-400.0..400.0f64, -400.0..400.0f64), 20),
        ) {
            let s = default_scenario();
            let base = Path::straight_line(&s);
            let raw: Vec<[f64; 2]> = base.points.iter().zip(&offsets).map(|(p, o)| [p[0] + o.0, p[1] + o.1]).collect();
            let projected = project_path(&raw, s.start, s.end, s.max_speed, s.slot_duration).unwrap();
            prop_assert!(Path::with_points(&s, projected).check_feasible(1e-6).is_ok());
        }
    }
}
