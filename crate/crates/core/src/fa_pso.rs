//! Antenna-position search by penalized particle swarm optimization.
//!
//! A particle is the concatenation of the transmit coordinates and (when the
//! receive array is also movable) the receive coordinates. Positions are
//! clamped to `[0, D]` and sorted per sub-array after every move; minimum
//! spacing is enforced only through the penalty term of the fitness. The
//! global best only ever admits zero-violation positions, so the returned
//! layout is always feasible.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::crb::SlotGeometry;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::rng::{self, tags};
use crate::scenario::{CoefficientDraws, PsoParams, Scenario};

/// Slack on the `[0, D]` bounds and the spacing constraint.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Sorted transmit and receive coordinates, meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayLayout {
    pub tx: Vec<f64>,
    pub rx: Vec<f64>,
}

impl ArrayLayout {
    /// Half-wavelength arrays anchored at zero on both sides.
    pub fn dula(scenario: &Scenario) -> Result<Self> {
        Ok(Self {
            tx: crate::baselines::dula_layout(scenario.tx_antennas, scenario.wavelength, scenario.aperture)?,
            rx: crate::baselines::dula_layout(scenario.rx_antennas, scenario.wavelength, scenario.aperture)?,
        })
    }

    /// Arrays spread uniformly over the whole region.
    pub fn sula(scenario: &Scenario) -> Result<Self> {
        Ok(Self {
            tx: crate::baselines::sula_layout(scenario.tx_antennas, scenario.aperture, scenario.min_spacing)?,
            rx: crate::baselines::sula_layout(scenario.rx_antennas, scenario.aperture, scenario.min_spacing)?,
        })
    }

    /// Checks counts, ordering, bounds and spacing.
    pub fn check(&self, scenario: &Scenario) -> Result<()> {
        for (name, coords, expected) in [
            ("transmit", &self.tx, scenario.tx_antennas),
            ("receive", &self.rx, scenario.rx_antennas),
        ] {
            if coords.len() != expected {
                return Err(Error::InfeasibleLayout(format!(
                    "{name} array has {} coordinates, expected {expected}",
                    coords.len()
                )));
            }
            if coords.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InfeasibleLayout(format!("{name} coordinates are not sorted")));
            }
            let bad = sub_array_violations(coords, scenario.aperture, scenario.min_spacing);
            if bad > 0 {
                return Err(Error::InfeasibleLayout(format!(
                    "{name} array has {bad} bound or spacing violations"
                )));
            }
        }
        Ok(())
    }
}

fn sub_array_violations(coords: &[f64], aperture: f64, min_spacing: f64) -> usize {
    let outside = coords
        .iter()
        .filter(|&&c| !(c >= -FEASIBILITY_TOL && c <= aperture + FEASIBILITY_TOL))
        .count();
    let mut sorted = coords.to_vec();
    sorted.sort_by(f64::total_cmp);
    let close = sorted
        .windows(2)
        .filter(|w| w[1] - w[0] < min_spacing - FEASIBILITY_TOL)
        .count();
    outside + close
}

/// Out-of-region coordinates plus too-close adjacent pairs, counted per sub-array.
/// The first `tx_count` entries form the transmit array, the rest the receive array.
pub fn violation_count(position: &[f64], tx_count: usize, aperture: f64, min_spacing: f64) -> usize {
    let (tx, rx) = position.split_at(tx_count.min(position.len()));
    sub_array_violations(tx, aperture, min_spacing) + sub_array_violations(rx, aperture, min_spacing)
}

/// Which coordinates the swarm moves.
#[derive(Debug, Clone, PartialEq)]
pub enum SearchSpace {
    /// Transmit and receive coordinates.
    Full,
    /// Transmit coordinates only; the receive array stays fixed.
    TransmitOnly { rx: Vec<f64> },
}

/// Frozen per-slot context for the swarm.
#[derive(Debug, Clone)]
pub struct SlotContext<'a> {
    pub geometry: &'a SlotGeometry,
    pub covariance: &'a CMatrix,
    pub tx_count: usize,
    pub aperture: f64,
    pub min_spacing: f64,
    pub space: SearchSpace,
}

impl SlotContext<'_> {
    pub fn dimension(&self, rx_count: usize) -> usize {
        match self.space {
            SearchSpace::Full => self.tx_count + rx_count,
            SearchSpace::TransmitOnly { .. } => self.tx_count,
        }
    }

    /// Transmit and receive coordinates encoded by a particle position.
    pub fn split<'p>(&'p self, position: &'p [f64]) -> (&'p [f64], &'p [f64]) {
        match &self.space {
            SearchSpace::Full => position.split_at(self.tx_count),
            SearchSpace::TransmitOnly { rx } => (position, rx),
        }
    }

    /// Mean reciprocal bound over targets, without penalty.
    pub fn objective(&self, position: &[f64]) -> f64 {
        let (tx, rx) = self.split(position);
        let k = self.geometry.target_count().max(1) as f64;
        self.geometry.reciprocal_sum(tx, rx, self.covariance) / k
    }

    pub fn violations(&self, position: &[f64]) -> usize {
        violation_count(position, self.tx_count, self.aperture, self.min_spacing)
    }

    pub fn layout(&self, position: &[f64]) -> ArrayLayout {
        let (tx, rx) = self.split(position);
        ArrayLayout {
            tx: tx.to_vec(),
            rx: rx.to_vec(),
        }
    }

    pub fn encode(&self, layout: &ArrayLayout) -> Vec<f64> {
        match self.space {
            SearchSpace::Full => layout.tx.iter().chain(&layout.rx).copied().collect(),
            SearchSpace::TransmitOnly { .. } => layout.tx.clone(),
        }
    }
}

/// Objective minus `eta` per violation.
pub fn fitness(position: &[f64], ctx: &SlotContext, eta: f64) -> f64 {
    ctx.objective(position) - eta * ctx.violations(position) as f64
}

/// Linearly decreasing inertia weight.
pub fn inertia(t: usize, t_max: usize, omega_max: f64, omega_min: f64) -> f64 {
    if t_max == 0 {
        return omega_max;
    }
    omega_max - (omega_max - omega_min) * t as f64 / t_max as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
}

impl Particle {
    /// A particle whose personal best is its current position.
    pub fn at(position: Vec<f64>, velocity: Vec<f64>, ctx: &SlotContext, eta: f64) -> Self {
        let best_fitness = fitness(&position, ctx, eta);
        Self {
            best_position: position.clone(),
            position,
            velocity,
            best_fitness,
        }
    }
}

/// `ω v + c1 r1 (p_best − p) + c2 r2 (g − p)`.
pub fn step_velocity<R: Rng + ?Sized>(
    particle: &Particle,
    global_best: &[f64],
    omega: f64,
    c1: f64,
    c2: f64,
    draws: CoefficientDraws,
    rng: &mut R,
) -> Vec<f64> {
    let (mut r1, mut r2) = match draws {
        CoefficientDraws::Scalar => (rng.gen::<f64>(), rng.gen::<f64>()),
        CoefficientDraws::PerCoordinate => (0.0, 0.0),
    };
    (0..particle.position.len())
        .map(|i| {
            if draws == CoefficientDraws::PerCoordinate {
                r1 = rng.gen();
                r2 = rng.gen();
            }
            let p = particle.position[i];
            omega * particle.velocity[i]
                + c1 * r1 * (particle.best_position[i] - p)
                + c2 * r2 * (global_best[i] - p)
        })
        .collect()
}

/// Clamps `p + v` into `[0, D]` and sorts each sub-array.
pub fn step_position(position: &[f64], velocity: &[f64], aperture: f64, tx_count: usize) -> Vec<f64> {
    let mut next: Vec<f64> = position
        .iter()
        .zip(velocity)
        .map(|(p, v)| (p + v).clamp(0.0, aperture))
        .collect();
    let split = tx_count.min(next.len());
    let (tx, rx) = next.split_at_mut(split);
    tx.sort_by(f64::total_cmp);
    rx.sort_by(f64::total_cmp);
    next
}

/// Best feasible position found by a swarm run.
#[derive(Debug, Clone)]
pub struct SwarmResult {
    pub best_position: Option<Vec<f64>>,
    /// Unpenalized objective of `best_position`, `-∞` if none was feasible.
    pub best_value: f64,
    /// Global-best objective after initialization and after every iteration.
    pub history: Vec<f64>,
    /// Absolute penalty per violation used in the run.
    pub penalty: f64,
}

/// Runs the swarm from the given particles. `stream_tags` identify the run so
/// each particle gets its own reproducible random stream.
pub fn optimize_swarm(
    ctx: &SlotContext,
    mut swarm: Vec<Particle>,
    params: &PsoParams,
    seed: u64,
    stream_tags: &[u64],
) -> SwarmResult {
    let initial_best = swarm
        .iter()
        .filter(|p| ctx.violations(&p.position) == 0)
        .map(|p| ctx.objective(&p.position))
        .fold(f64::NEG_INFINITY, f64::max);
    let penalty = params.eta * (1.0 + initial_best.max(0.0));
    for p in &mut swarm {
        p.best_position = p.position.clone();
        p.best_fitness = fitness(&p.position, ctx, penalty);
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut fallback: Option<(Vec<f64>, f64)> = None;
    let offer = |slot: &mut Option<(Vec<f64>, f64)>, position: &[f64], value: f64| {
        if slot.as_ref().is_none_or(|(_, v)| value > *v) {
            *slot = Some((position.to_vec(), value));
        }
    };
    for p in &swarm {
        let slot = if ctx.violations(&p.position) == 0 { &mut best } else { &mut fallback };
        offer(slot, &p.position, p.best_fitness);
    }

    let mut rngs: Vec<_> = (0..swarm.len())
        .map(|i| {
            let mut t = vec![tags::PSO];
            t.extend_from_slice(stream_tags);
            t.push(i as u64);
            rng::stream(seed, &t)
        })
        .collect();

    let mut history = vec![best.as_ref().map_or(f64::NEG_INFINITY, |b| b.1)];
    for t in 1..=params.iterations {
        let omega = inertia(t, params.iterations, params.omega_max, params.omega_min);
        let guide = best
            .as_ref()
            .or(fallback.as_ref())
            .map(|b| b.0.clone())
            .expect("swarm is not empty");
        for (p, rng) in swarm.iter_mut().zip(&mut rngs) {
            let mut v = step_velocity(p, &guide, omega, params.c1, params.c2, params.coefficient_draws, rng);
            v.iter_mut().for_each(|vi| *vi = vi.clamp(-ctx.aperture, ctx.aperture));
            p.position = step_position(&p.position, &v, ctx.aperture, ctx.tx_count);
            p.velocity = v;
            let f = fitness(&p.position, ctx, penalty);
            if f > p.best_fitness {
                p.best_fitness = f;
                p.best_position = p.position.clone();
            }
        }
        for p in &swarm {
            let slot = if ctx.violations(&p.position) == 0 { &mut best } else { &mut fallback };
            offer(slot, &p.position, fitness(&p.position, ctx, penalty));
        }
        history.push(best.as_ref().map_or(f64::NEG_INFINITY, |b| b.1));
    }

    let (best_position, best_value) = match best {
        Some((pos, _)) => {
            let v = ctx.objective(&pos);
            (Some(pos), v)
        }
        None => (None, f64::NEG_INFINITY),
    };
    SwarmResult {
        best_position,
        best_value,
        history,
        penalty,
    }
}

/// Sorted coordinates with gaps of at least `min_spacing`, drawn as sorted
/// uniform slack plus the mandatory spacing.
pub fn random_feasible<R: Rng + ?Sized>(count: usize, aperture: f64, min_spacing: f64, rng: &mut R) -> Vec<f64> {
    let slack = (aperture - count.saturating_sub(1) as f64 * min_spacing).max(0.0);
    let mut u: Vec<f64> = (0..count).map(|_| rng.gen::<f64>() * slack).collect();
    u.sort_by(f64::total_cmp);
    u.iter()
        .enumerate()
        .map(|(i, v)| (v + i as f64 * min_spacing).min(aperture))
        .collect()
}

/// Warm start, max-spread layout, then random feasible layouts.
pub fn initial_swarm(
    ctx: &SlotContext,
    incumbent: &ArrayLayout,
    params: &PsoParams,
    seed: u64,
    stream_tags: &[u64],
) -> Result<Vec<Particle>> {
    let mut t = vec![tags::PSO_INIT];
    t.extend_from_slice(stream_tags);
    let mut rng = rng::stream(seed, &t);
    let rx_count = incumbent.rx.len();
    let sula_tx = crate::baselines::sula_layout(ctx.tx_count, ctx.aperture, ctx.min_spacing)?;
    let sula_rx = crate::baselines::sula_layout(rx_count, ctx.aperture, ctx.min_spacing)?;
    let spread = ArrayLayout {
        tx: sula_tx,
        rx: match &ctx.space {
            SearchSpace::Full => sula_rx,
            SearchSpace::TransmitOnly { rx } => rx.clone(),
        },
    };
    let dim = ctx.dimension(rx_count);
    let vmax = 0.1 * ctx.aperture;
    let mut swarm = Vec::with_capacity(params.particles);
    for i in 0..params.particles {
        let position = match i {
            0 => ctx.encode(incumbent),
            1 => ctx.encode(&spread),
            _ => {
                let tx = random_feasible(ctx.tx_count, ctx.aperture, ctx.min_spacing, &mut rng);
                let rx = random_feasible(rx_count, ctx.aperture, ctx.min_spacing, &mut rng);
                ctx.encode(&ArrayLayout { tx, rx })
            }
        };
        let velocity: Vec<f64> = (0..dim).map(|_| rng.gen_range(-vmax..=vmax)).collect();
        swarm.push(Particle::at(position, velocity, ctx, 0.0));
    }
    Ok(swarm)
}

/// Layout and objective returned for one slot.
#[derive(Debug, Clone)]
pub struct PsoOutcome {
    pub layout: ArrayLayout,
    /// Mean reciprocal bound of `layout`.
    pub best_value: f64,
    pub history: Vec<f64>,
}

/// Runs the swarm for one slot starting from `incumbent`.
pub fn optimize_positions_slot(
    ctx: &SlotContext,
    incumbent: &ArrayLayout,
    params: &PsoParams,
    seed: u64,
    stream_tags: &[u64],
) -> Result<PsoOutcome> {
    let swarm = initial_swarm(ctx, incumbent, params, seed, stream_tags)?;
    let result = optimize_swarm(ctx, swarm, params, seed, stream_tags);
    match result.best_position {
        Some(pos) => Ok(PsoOutcome {
            layout: ctx.layout(&pos),
            best_value: result.best_value,
            history: result.history,
        }),
        None => Err(Error::InfeasibleLayout("swarm found no feasible layout".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamform::optimize_beamforming_slot;
    use crate::rng::stream;
    use crate::scenario::default_scenario;
    use proptest::prelude::*;

    fn setup() -> (Scenario, SlotGeometry, CMatrix) {
        let s = default_scenario();
        let geom = SlotGeometry::new(&s, [320.0, 380.0]);
        let dula = ArrayLayout::dula(&s).unwrap();
        let a: Vec<_> = (0..s.target_count()).map(|k| geom.steering(k, &dula.tx)).collect();
        let r = optimize_beamforming_slot(&a, &[1.0; 6], s.max_power_w).matrix;
        (s, geom, r)
    }

    fn ctx<'a>(s: &Scenario, geom: &'a SlotGeometry, r: &'a CMatrix, space: SearchSpace) -> SlotContext<'a> {
        SlotContext {
            geometry: geom,
            covariance: r,
            tx_count: s.tx_antennas,
            aperture: s.aperture,
            min_spacing: s.min_spacing,
            space,
        }
    }

    #[test]
    fn violation_examples() {
        let s = default_scenario();
        let dula = ArrayLayout::dula(&s).unwrap();
        let pos: Vec<f64> = dula.tx.iter().chain(&dula.rx).copied().collect();
        assert_eq!(violation_count(&pos, 12, s.aperture, s.min_spacing), 0);
        let mut coincident = pos.clone();
        coincident[1] = coincident[0];
        assert!(violation_count(&coincident, 12, s.aperture, s.min_spacing) >= 1);
        let mut outside = pos.clone();
        outside[0] = -0.1;
        assert!(violation_count(&outside, 12, s.aperture, s.min_spacing) >= 1);
    }

    #[test]
    fn fitness_penalty_is_linear() {
        let (s, geom, r) = setup();
        let c = ctx(&s, &geom, &r, SearchSpace::Full);
        let sula = c.encode(&ArrayLayout::sula(&s).unwrap());
        let eta = 1e6;
        assert_eq!(fitness(&sula, &c, eta), c.objective(&sula));
        let mut bad = sula.clone();
        bad[0] = -0.5;
        assert_eq!(c.violations(&bad), 1);
        assert_eq!(fitness(&bad, &c, eta), c.objective(&bad) - eta);

        let mut flat = sula.clone();
        flat[12..].iter_mut().for_each(|v| *v = 0.1);
        assert_eq!(c.objective(&flat), 0.0);
        assert_eq!(fitness(&flat, &c, eta), -eta * c.violations(&flat) as f64);
    }

    #[test]
    fn inertia_examples() {
        assert_eq!(inertia(0, 50, 0.9, 0.4), 0.9);
        assert!((inertia(50, 50, 0.9, 0.4) - 0.4).abs() < 1e-15);
        assert!((inertia(25, 50, 0.9, 0.4) - 0.65).abs() < 1e-15);
    }

    #[test]
    fn velocity_and_position_examples() {
        let p = Particle {
            position: vec![0.1, 0.2],
            velocity: vec![0.0, 0.0],
            best_position: vec![0.1, 0.2],
            best_fitness: 0.0,
        };
        let mut rng = stream(1, &[]);
        let v = step_velocity(&p, &[0.1, 0.2], 0.7, 2.0, 2.0, CoefficientDraws::Scalar, &mut rng);
        assert_eq!(v, vec![0.0, 0.0]);
        let q = Particle {
            velocity: vec![0.3, -0.1],
            ..p.clone()
        };
        let v = step_velocity(&q, &[0.5, 0.0], 0.5, 0.0, 0.0, CoefficientDraws::Scalar, &mut rng);
        assert_eq!(v, vec![0.15, -0.05]);

        let a = step_velocity(&q, &[0.5, 0.0], 0.5, 2.0, 2.0, CoefficientDraws::Scalar, &mut stream(5, &[]));
        let b = step_velocity(&q, &[0.5, 0.0], 0.5, 2.0, 2.0, CoefficientDraws::Scalar, &mut stream(5, &[]));
        assert_eq!(a, b);

        assert_eq!(step_position(&[0.1, 0.2], &[0.05, 0.05], 1.0, 2), vec![0.15000000000000002, 0.25]);
        assert_eq!(step_position(&[0.1, 0.2], &[0.0, 1.3], 1.0, 1), vec![0.1, 1.0]);
        assert_eq!(step_position(&[0.3, 0.2, 0.9, 0.1], &[0.0; 4], 1.0, 2), vec![0.2, 0.3, 0.1, 0.9]);
    }

    #[test]
    fn frozen_swarm_stays_put() {
        let (s, geom, r) = setup();
        let c = ctx(&s, &geom, &r, SearchSpace::Full);
        let start = c.encode(&ArrayLayout::dula(&s).unwrap());
        let swarm: Vec<Particle> = (0..5)
            .map(|_| Particle::at(start.clone(), vec![0.0; start.len()], &c, 0.0))
            .collect();
        let params = PsoParams {
            c1: 0.0,
            c2: 0.0,
            iterations: 10,
            ..s.pso.clone()
        };
        let out = optimize_swarm(&c, swarm, &params, 3, &[0, 0]);
        assert_eq!(out.best_position.unwrap(), start);
    }

    #[test]
    fn swarm_output_is_feasible_and_monotone() {
        let (s, geom, r) = setup();
        let params = PsoParams {
            iterations: 20,
            particles: 12,
            ..s.pso.clone()
        };
        for space in [SearchSpace::Full, SearchSpace::TransmitOnly { rx: ArrayLayout::dula(&s).unwrap().rx }] {
            let c = ctx(&s, &geom, &r, space);
            let inc = ArrayLayout::dula(&s).unwrap();
            let out = optimize_positions_slot(&c, &inc, &params, 7, &[1, 4]).unwrap();
            out.layout.check(&s).unwrap();
            assert!(out.history.windows(2).all(|w| w[1] >= w[0]));
            assert!(out.best_value >= c.objective(&c.encode(&inc)));
            assert_eq!(out.history.len(), 21);
            let again = optimize_positions_slot(&c, &inc, &params, 7, &[1, 4]).unwrap();
            assert_eq!(again.layout, out.layout);
        }
    }

    #[test]
    fn transmit_only_particles_have_transmit_dimension() {
        let (s, geom, r) = setup();
        let rx = ArrayLayout::dula(&s).unwrap().rx;
        let c = ctx(&s, &geom, &r, SearchSpace::TransmitOnly { rx: rx.clone() });
        let swarm = initial_swarm(&c, &ArrayLayout::dula(&s).unwrap(), &s.pso, 1, &[0, 0]).unwrap();
        assert!(swarm.iter().all(|p| p.position.len() == s.tx_antennas));
        let out = optimize_positions_slot(&c, &ArrayLayout::dula(&s).unwrap(), &PsoParams { iterations: 3, ..s.pso.clone() }, 1, &[0, 0]).unwrap();
        assert_eq!(out.layout.rx, rx);
    }

    #[test]
    fn initial_swarm_is_feasible() {
        let (s, geom, r) = setup();
        let c = ctx(&s, &geom, &r, SearchSpace::Full);
        let swarm = initial_swarm(&c, &ArrayLayout::dula(&s).unwrap(), &s.pso, 9, &[2, 3]).unwrap();
        assert_eq!(swarm.len(), s.pso.particles);
        for p in &swarm {
            assert_eq!(c.violations(&p.position), 0);
            assert!(p.velocity.iter().all(|v| v.abs() <= 0.1 * s.aperture));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fitness_ignores_receive_order_and_consistent_transmit_relabeling(seed in 0u64..1000) {
            let (s, geom, r) = setup();
            let mut rng = stream(seed, &[]);
            let tx = random_feasible(12, s.aperture, s.min_spacing, &mut rng);
            let rx = random_feasible(12, s.aperture, s.min_spacing, &mut rng);
            let c = ctx(&s, &geom, &r, SearchSpace::Full);
            let sorted: Vec<f64> = tx.iter().chain(&rx).copied().collect();
            let a = fitness(&sorted, &c, 1e6);
            prop_assert_eq!(c.violations(&sorted), 0);

            // Receive coordinates enter only through their spread.
            let mut rx_perm = rx.clone();
            rx_perm.rotate_left(5);
            let shuffled: Vec<f64> = tx.iter().chain(&rx_perm).copied().collect();
            prop_assert!((fitness(&shuffled, &c, 1e6) - a).abs() <= 1e-9 * a.abs());

            // Transmit antennas are labelled by the covariance rows, so relabel both.
            let perm: Vec<usize> = (0..12).rev().collect();
            let tx_perm: Vec<f64> = perm.iter().map(|&i| tx[i]).collect();
            let r_perm = CMatrix::from_fn(12, 12, |i, j| r[(perm[i], perm[j])]);
            let c2 = ctx(&s, &geom, &r_perm, SearchSpace::Full);
            let relabeled: Vec<f64> = tx_perm.iter().chain(&rx).copied().collect();
            prop_assert!((fitness(&relabeled, &c2, 1e6) - a).abs() <= 1e-9 * a.abs());
        }
    }
}
