//! Brute-force certificates for the solvers.
//!
//! Everything here recomputes what it checks from scratch: steering vectors,
//! distances, angles and bounds are evaluated with separate code rather than
//! through [`crate::geometry`] or [`crate::crb`], so a shared bug cannot
//! certify itself.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::beamform::optimize_beamforming_slot;
use crate::crb::SlotGeometry;
use crate::error::{Error, Result};
use crate::fa_pso::{optimize_positions_slot, ArrayLayout, SearchSpace, SlotContext};
use crate::linalg::{CMatrix, CVector};
use crate::rng::{self, StreamRng};
use crate::signal::{sample_covariance, sample_waveform};
use crate::scenario::{default_scenario, validate, Scenario};
use crate::trajectory::Path;

/// Largest exhaustive layout grid accepted.
pub const MAX_GRID_CELLS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub seed: u64,
    pub equivalence_cases: usize,
    /// Configurations with `cos θ` below this are excluded from the equivalence check.
    pub min_cos_theta: f64,
    pub beamforming_instances: usize,
    pub beamforming_samples: usize,
    pub derivative_cases: usize,
    /// Grid step of the layout search in wavelengths.
    pub grid_step_wavelengths: f64,
    pub equivalence_tol: f64,
    pub beamforming_margin: f64,
    pub swarm_ratio: f64,
    pub derivative_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            equivalence_cases: 1000,
            min_cos_theta: 0.05,
            beamforming_instances: 100,
            beamforming_samples: 10_000,
            derivative_cases: 1000,
            grid_step_wavelengths: 1.0 / 50.0,
            equivalence_tol: 1e-8,
            beamforming_margin: 1e-9,
            swarm_ratio: 0.98,
            derivative_tol: 1e-6,
        }
    }
}

impl OracleConfig {
    pub fn check(&self) -> Result<()> {
        let counts = [
            self.equivalence_cases,
            self.beamforming_instances,
            self.beamforming_samples,
            self.derivative_cases,
        ];
        let tols = [
            self.equivalence_tol,
            self.beamforming_margin,
            self.swarm_ratio,
            self.derivative_tol,
            self.grid_step_wavelengths,
        ];
        if counts.contains(&0) || tols.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::InvalidArgument("oracle counts must be >= 1 and tolerances > 0".into()));
        }
        Ok(())
    }
}

fn phasors(positions: &[f64], theta: f64, wavelength: f64) -> Vec<Complex64> {
    let k = 2.0 * PI / wavelength;
    positions
        .iter()
        .map(|&p| {
            let phi = k * p * theta.sin();
            Complex64::new(phi.cos(), phi.sin())
        })
        .collect()
}

fn normal(rng: &mut StreamRng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `Σ_k c_k a_kᴴ R a_k`, element by element.
pub fn oracle_objective(steering: &[CVector], weights: &[f64], r: &CMatrix) -> f64 {
    let mut total = 0.0;
    for (a, &c) in steering.iter().zip(weights) {
        let m = a.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                acc += a[i].conj() * r[(i, j)] * a[j];
            }
        }
        total += c * acc.re;
    }
    total
}

/// Best objective over `samples` random Gram matrices `G Gᴴ` rescaled to trace `p_max`.
pub fn oracle_beamforming(steering: &[CVector], weights: &[f64], p_max: f64, samples: usize, rng: &mut StreamRng) -> f64 {
    let m = steering.first().map_or(0, |a| a.len());
    let mut best = f64::NEG_INFINITY;
    let mut g = vec![Complex64::new(0.0, 0.0); m * m];
    for _ in 0..samples {
        g.iter_mut().for_each(|z| *z = normal(rng));
        let fro: f64 = g.iter().map(|z| z.norm_sqr()).sum();
        // aᴴ G Gᴴ a = ‖Gᴴ a‖², so the Gram matrix never needs forming.
        let value: f64 = steering
            .iter()
            .zip(weights)
            .map(|(a, &c)| {
                let energy: f64 = (0..m)
                    .map(|col| {
                        let v: Complex64 = (0..m).map(|row| g[row * m + col].conj() * a[row]).sum();
                        v.norm_sqr()
                    })
                    .sum();
                c * energy
            })
            .sum::<f64>()
            * p_max
            / fro;
        best = best.max(value);
    }
    best
}

/// Independent per-slot evaluation of the mean reciprocal bound.
#[derive(Debug, Clone)]
pub struct OracleSlot {
    /// `(θ_k, |α_k|² N̄ (2π/λ cos θ_k)² / (2 d_k² σ²))` per target.
    pub targets: Vec<(f64, f64)>,
    pub wavelength: f64,
    pub covariance: CMatrix,
}

impl OracleSlot {
    pub fn new(scenario: &Scenario, uav: [f64; 2], covariance: CMatrix) -> Self {
        let targets = scenario
            .targets
            .iter()
            .map(|t| {
                let dx = uav[0] - t.position[0];
                let dy = uav[1] - t.position[1];
                let d2 = dx * dx + dy * dy + scenario.altitude * scenario.altitude;
                let theta = (scenario.altitude / d2.sqrt()).min(1.0).asin();
                let g = 2.0 * PI / scenario.wavelength * theta.cos();
                let amp = t.rcs_m2 * scenario.frames as f64 * g * g / (2.0 * d2 * scenario.noise_w);
                (theta, amp)
            })
            .collect();
        Self {
            targets,
            wavelength: scenario.wavelength,
            covariance,
        }
    }

    /// `Σ_k amp_k · a_kᴴ R a_k`, the transmit half of the objective.
    pub fn transmit_score(&self, tx: &[f64]) -> f64 {
        let steering: Vec<CVector> = self
            .targets
            .iter()
            .map(|&(theta, _)| CVector::from_vec(phasors(tx, theta, self.wavelength)))
            .collect();
        let weights: Vec<f64> = self.targets.iter().map(|t| t.1).collect();
        oracle_objective(&steering, &weights, &self.covariance)
    }

    /// Mean over targets of the reciprocal bound.
    pub fn fitness(&self, tx: &[f64], rx: &[f64]) -> f64 {
        self.transmit_score(tx) * spread(rx) / self.targets.len() as f64
    }
}

/// `Σ (y − ȳ)²` via `Σy² − (Σy)²/M`, a different route than the solver's.
fn spread(y: &[f64]) -> f64 {
    let m = y.len() as f64;
    let s1: f64 = y.iter().sum();
    let s2: f64 = y.iter().map(|v| v * v).sum();
    (s2 - s1 * s1 / m).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum {
    pub tx: [f64; 2],
    pub rx: [f64; 2],
    pub fitness: f64,
    pub cells: u64,
}

fn grid_pairs(aperture: f64, min_spacing: f64, step: f64) -> Vec<[f64; 2]> {
    let count = (aperture / step + 1e-9).floor() as usize + 1;
    let coords: Vec<f64> = (0..count).map(|i| (i as f64 * step).min(aperture)).collect();
    let mut pairs = Vec::new();
    for (i, &a) in coords.iter().enumerate() {
        for &b in &coords[i + 1..] {
            if b - a >= min_spacing - 1e-12 {
                pairs.push([a, b]);
            }
        }
    }
    pairs
}

/// Exhaustive search over two transmit and two receive coordinates on a grid.
///
/// The objective factors as `transmit_score(x) · spread(y)` with both factors
/// non-negative, so the maximum over all `(x, y)` cells is the product of the
/// two separate maxima; every cell is still implicitly covered.
pub fn oracle_layout_grid(slot: &OracleSlot, aperture: f64, min_spacing: f64, step: f64) -> Result<GridOptimum> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("grid step must be positive, got {step}")));
    }
    let coords = (aperture / step).floor() as u64 + 1;
    if coords.saturating_mul(coords).saturating_mul(coords).saturating_mul(coords) > MAX_GRID_CELLS * 1000 {
        return Err(Error::GridTooFine {
            cells: coords.saturating_pow(4),
            limit: MAX_GRID_CELLS,
        });
    }
    let pairs = grid_pairs(aperture, min_spacing, step);
    let cells = (pairs.len() as u64).pow(2);
    if cells > MAX_GRID_CELLS {
        return Err(Error::GridTooFine {
            cells,
            limit: MAX_GRID_CELLS,
        });
    }
    if pairs.is_empty() {
        return Err(Error::InfeasibleLayout("no grid layout satisfies the spacing".into()));
    }
    let argmax = |f: &dyn Fn(&[f64; 2]) -> f64| {
        pairs
            .iter()
            .map(|p| (*p, f(p)))
            .fold(([0.0; 2], f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
    };
    let (tx, tx_score) = argmax(&|p| slot.transmit_score(p));
    let (rx, rx_score) = argmax(&|p| spread(p));
    Ok(GridOptimum {
        tx,
        rx,
        fitness: tx_score * rx_score / slot.targets.len() as f64,
        cells,
    })
}

/// Which covariances the equivalence oracle draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceDraw {
    /// Random full-rank Gram matrices with trace in `(0, P]`.
    FullRank,
    /// Random rank-one matrices with trace in `(0, P]`.
    RankOne,
}

fn random_sorted(rng: &mut StreamRng, count: usize, aperture: f64, min_spacing: f64) -> Vec<f64> {
    let slack = aperture - (count - 1) as f64 * min_spacing;
    let mut u: Vec<f64> = (0..count).map(|_| rng.gen::<f64>() * slack).collect();
    u.sort_by(f64::total_cmp);
    u.iter().enumerate().map(|(i, v)| v + i as f64 * min_spacing).collect()
}

/// Full trace form and reduced closed form for one configuration, both from scratch.
pub fn oracle_crb_pair(tx: &[f64], rx: &[f64], theta: f64, r: &CMatrix, distance: f64, wavelength: f64) -> (f64, f64) {
    let k = 2.0 * PI / wavelength;
    let cos = theta.cos();
    let a = phasors(tx, theta, wavelength);
    let b = phasors(rx, theta, wavelength);
    let deriv = |v: &[Complex64], pos: &[f64]| -> Vec<Complex64> {
        v.iter().zip(pos).map(|(z, p)| z * Complex64::new(0.0, k * p * cos)).collect()
    };
    let (ad, bd) = (deriv(&a, tx), deriv(&b, rx));
    let (mt, mr) = (tx.len(), rx.len());
    let psi = DMatrix::from_fn(mr, mt, |i, j| b[i] * a[j].conj());
    let dpsi = DMatrix::from_fn(mr, mt, |i, j| bd[i] * a[j].conj() + b[i] * ad[j].conj());
    let tr = |m: DMatrix<Complex64>| -> Complex64 { m.diagonal().iter().sum() };
    let t1 = tr(psi.adjoint() * &psi * r).re;
    let t2 = tr(dpsi.adjoint() * &psi * r);
    let t3 = tr(dpsi.adjoint() * &dpsi * r).re;
    let (frames, noise) = (200.0, 1e-12);
    let numer = 2.0 * distance * distance * noise;
    let full = numer * t1 / (frames * (t3 * t1 - t2.norm_sqr()));

    let gain: f64 = (0..mt)
        .flat_map(|i| (0..mt).map(move |j| (i, j)))
        .map(|(i, j)| (a[i].conj() * r[(i, j)] * a[j]).re)
        .sum();
    let reduced = numer / (frames * (k * cos).powi(2) * gain * spread(rx));
    (full, reduced)
}

/// Worst relative gap between the full and reduced bounds over random configurations.
pub fn oracle_crb_equivalence(seed: u64, cases: usize, min_cos_theta: f64, draw: CovarianceDraw) -> f64 {
    let wavelength = 0.0107;
    let (m, aperture, spacing) = (12, 20.0 * wavelength, wavelength / 2.0);
    let theta_max = min_cos_theta.acos();
    (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, &[0x45_51, i as u64]);
            let tx = random_sorted(&mut rng, m, aperture, spacing);
            let rx = random_sorted(&mut rng, m, aperture, spacing);
            let theta = rng.gen_range(0.05..theta_max);
            let distance = rng.gen_range(100.0..1200.0);
            let power = rng.gen_range(0.0..1.0f64).max(1e-3);
            let cols = match draw {
                CovarianceDraw::FullRank => m,
                CovarianceDraw::RankOne => 1,
            };
            let g = DMatrix::from_fn(m, cols, |_, _| normal(&mut rng));
            let mut r = &g * g.adjoint();
            let tr: f64 = r.diagonal().iter().map(|z| z.re).sum();
            r *= Complex64::new(power / tr, 0.0);
            let (full, reduced) = oracle_crb_pair(&tx, &rx, theta, &r, distance, wavelength);
            ((full - reduced) / reduced).abs()
        })
        .reduce(|| 0.0, f64::max)
}

/// Worst relative error of the analytic steering derivative against central differences.
pub fn oracle_derivative(seed: u64, cases: usize) -> f64 {
    let wavelength = 0.0107;
    let h = 1e-6;
    (0..cases)
        .map(|i| {
            let mut rng = rng::stream(seed, &[0xD1_FF, i as u64]);
            let m = rng.gen_range(1..=16);
            let pos: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..0.25)).collect();
            let theta = rng.gen_range(0.05..FRAC_PI_2 - 0.05);
            let plus = phasors(&pos, theta + h, wavelength);
            let minus = phasors(&pos, theta - h, wavelength);
            let exact = crate::geometry::steering_derivative(&pos, theta, wavelength);
            let (mut err, mut norm) = (0.0, 0.0);
            for j in 0..m {
                let fd = (plus[j] - minus[j]) / (2.0 * h);
                err += (fd - exact[j]).norm_sqr();
                norm += exact[j].norm_sqr();
            }
            (err / norm).sqrt()
        })
        .fold(0.0, f64::max)
}

/// Number of trials in which the sample covariance of `large` frames is closer
/// (Frobenius norm) to the true covariance than that of `small` frames.
pub fn covariance_convergence(seed: u64, trials: usize, small: usize, large: usize) -> Result<usize> {
    let m = 12;
    let mut wins = 0;
    for i in 0..trials {
        let mut rng = rng::stream(seed, &[0xC0_7A, i as u64]);
        let g = DMatrix::from_fn(m, m, |_, _| normal(&mut rng));
        let mut r = &g * g.adjoint();
        let tr: f64 = r.diagonal().iter().map(|z| z.re).sum();
        r *= Complex64::new(0.1 / tr, 0.0);
        let err = |frames: usize, rng: &mut StreamRng| -> Result<f64> {
            let x = sample_waveform(&r, frames, rng)?;
            Ok((sample_covariance(&x.frames) - &r).norm())
        };
        let coarse = err(small, &mut rng)?;
        let fine = err(large, &mut rng)?;
        if fine < coarse {
            wins += 1;
        }
    }
    Ok(wins)
}

/// Worst `oracle best − analytic` margin (positive means the oracle won).
pub fn beamforming_certificate(config: &OracleConfig) -> (f64, bool) {
    let wavelength = 0.0107;
    let results: Vec<(f64, bool)> = (0..config.beamforming_instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(config.seed, &[0xBEA3, i as u64]);
            let m = 12;
            let k = rng.gen_range(1..=8);
            let tx = random_sorted(&mut rng, m, 20.0 * wavelength, wavelength / 2.0);
            let steering: Vec<CVector> = (0..k)
                .map(|_| CVector::from_vec(phasors(&tx, rng.gen_range(0.05..FRAC_PI_2), wavelength)))
                .collect();
            let weights: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
            let p = rng.gen_range(0.1..2.0);
            let cov = optimize_beamforming_slot(&steering, &weights, p);
            let analytic = oracle_objective(&steering, &weights, &cov.matrix);
            let sampled = oracle_beamforming(&steering, &weights, p, config.beamforming_samples, &mut rng);
            let r = &cov.matrix;
            let hermitian = (r - r.adjoint()).norm() <= 1e-12 * r.norm().max(1.0);
            let eig = r.clone().symmetric_eigen().eigenvalues;
            let mut e: Vec<f64> = eig.iter().copied().collect();
            e.sort_by(f64::total_cmp);
            let psd = e[0] >= -1e-10 * p;
            let rank_one = e[m - 2] <= 1e-10 * p;
            let trace: f64 = r.diagonal().iter().map(|z| z.re).sum();
            let structure = hermitian && psd && rank_one && (trace - p).abs() <= 1e-9 * p;
            (sampled - analytic, structure)
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    (worst, results.iter().all(|r| r.1))
}

/// Small instance for the swarm-versus-grid comparison: two transmit and two
/// receive antennas over a `2λ` region, otherwise the reference scenario.
pub fn grid_scenario(base: &Scenario) -> Result<Scenario> {
    let mut raw = base.to_raw();
    raw.array.tx_antennas = 2;
    raw.array.rx_antennas = 2;
    raw.array.aperture = 2.0 * raw.array.wavelength;
    Ok(validate(&raw)?)
}

/// Swarm best and grid best at slot 10 of the straight-line path, with the
/// covariance beamformed for the half-wavelength layout.
pub fn swarm_versus_grid(scenario: &Scenario, step: f64) -> Result<(f64, GridOptimum)> {
    let path = Path::straight_line(scenario);
    let slot = (scenario.slots / 2).saturating_sub(1).min(scenario.slots - 1);
    let uav = path.points[slot];
    let geom = SlotGeometry::new(scenario, uav);
    let dula = ArrayLayout::dula(scenario)?;
    let steering: Vec<_> = (0..geom.target_count()).map(|k| geom.steering(k, &dula.tx)).collect();
    let weights: Vec<f64> = (0..geom.target_count())
        .map(|k| crate::beamform::slot_weight(&geom, k, &dula.rx))
        .collect();
    let cov = optimize_beamforming_slot(&steering, &weights, scenario.max_power_w);
    let ctx = SlotContext {
        geometry: &geom,
        covariance: &cov.matrix,
        tx_count: scenario.tx_antennas,
        aperture: scenario.aperture,
        min_spacing: scenario.min_spacing,
        space: SearchSpace::Full,
    };
    let pso = optimize_positions_slot(&ctx, &dula, &scenario.pso, scenario.seed, &[0, slot as u64])?;
    let grid = oracle_layout_grid(
        &OracleSlot::new(scenario, uav, cov.matrix.clone()),
        scenario.aperture,
        scenario.min_spacing,
        step,
    )?;
    Ok((pso.best_value, grid))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub name: &'static str,
    pub value: f64,
    pub threshold: String,
    pub passed: bool,
}

/// Runs every certificate and returns one line per check.
pub fn run_certificates(config: &OracleConfig) -> Result<Vec<Certificate>> {
    config.check()?;
    let mut out = Vec::new();

    let full = oracle_crb_equivalence(config.seed, config.equivalence_cases, config.min_cos_theta, CovarianceDraw::FullRank);
    out.push(Certificate {
        name: "full vs reduced bound, random PSD covariances",
        value: full,
        threshold: format!("< {:e}", config.equivalence_tol),
        passed: full < config.equivalence_tol,
    });
    let rank_one = oracle_crb_equivalence(config.seed, config.equivalence_cases, config.min_cos_theta, CovarianceDraw::RankOne);
    out.push(Certificate {
        name: "full vs reduced bound, rank-one covariances",
        value: rank_one,
        threshold: format!("< {:e}", config.equivalence_tol),
        passed: rank_one < config.equivalence_tol,
    });

    let (margin, structure) = beamforming_certificate(config);
    out.push(Certificate {
        name: "beamforming optimum vs random covariances (oracle - analytic)",
        value: margin,
        threshold: format!("<= {:e}", config.beamforming_margin),
        passed: margin <= config.beamforming_margin,
    });
    out.push(Certificate {
        name: "beamforming output Hermitian, PSD, rank one, full power",
        value: if structure { 1.0 } else { 0.0 },
        threshold: "= 1".into(),
        passed: structure,
    });

    let small = grid_scenario(&default_scenario())?;
    let (swarm, grid) = swarm_versus_grid(&small, config.grid_step_wavelengths * small.wavelength)?;
    let ratio = swarm / grid.fitness;
    out.push(Certificate {
        name: "swarm best / exhaustive grid best (2+2 antennas)",
        value: ratio,
        threshold: format!(">= {}", config.swarm_ratio),
        passed: ratio >= config.swarm_ratio,
    });

    let fd = oracle_derivative(config.seed, config.derivative_cases);
    out.push(Certificate {
        name: "steering derivative vs central differences",
        value: fd,
        threshold: format!("< {:e}", config.derivative_tol),
        passed: fd < config.derivative_tol,
    });

    let wins = covariance_convergence(config.seed, 10, 100, 10_000)?;
    out.push(Certificate {
        name: "sample covariance error shrinks from 100 to 10000 frames (of 10 trials)",
        value: wins as f64,
        threshold: ">= 9".into(),
        passed: wins >= 9,
    });
    Ok(out)
}

/// Renders certificates as one `PASS`/`FAIL` line each.
pub fn format_report(certs: &[Certificate]) -> String {
    certs
        .iter()
        .map(|c| {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            format!("{verdict}  {}: {:e} (want {})\n", c.name, c.value, c.threshold)
        })
        .collect()
}
