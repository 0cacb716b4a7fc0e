//! Cramér–Rao bound on the vertical angle of departure.
//!
//! Two evaluation routes are provided:
//!
//! - [`crb_full`] builds `Ψ = b aᴴ` and `Ψ̃ = ∂Ψ/∂θ` and evaluates the Schur
//!   complement form of the Fisher information directly from matrix traces.
//! - [`crb_reduced`] uses the closed form
//!   `2d²σ² / (|α|² N̄ (2π/λ · cos θ)² · aᴴRa · Σ(y_i − ȳ)²)`.
//!
//! The reduced form equals the full one whenever `R^{1/2}a` and `R^{1/2}ȧ`
//! are parallel, in particular for every rank-one covariance, which is what
//! the beamforming step produces. For a general covariance the full form is
//! smaller: its Fisher information carries the extra non-negative term
//! `M_r (A·C − |B|²) / A` with `A = aᴴRa`, `B = aᴴRȧ`, `C = ȧᴴRȧ`.
//!
//! The optimizer works on reciprocals (`1/C̃`), which are linear in `R` and
//! stay finite where the bound is singular.

use num_complex::Complex64;

use crate::beamform::BeamCovariance;
use crate::error::{Error, Result};
use crate::fa_pso::ArrayLayout;
use crate::geometry::{self, aperture_term, cos_aod, steering, wavenumber, SteeringContext};
use crate::linalg::{bilinear, quad_form, CMatrix, CVector};
use crate::scenario::Scenario;
use crate::trajectory::Path;

/// Denominators at or below this (SI units) make the bound infinite.
pub const SINGULAR_DENOMINATOR: f64 = 1e-30;

/// In the full form, a Schur complement below this fraction of
/// `tr(Ψ̃ᴴΨ̃R)·tr(ΨᴴΨR)` is indistinguishable from rounding and treated as zero.
pub const CANCELLATION_FLOOR: f64 = 1e-12;

/// The four trace quantities entering the full bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceIdentities {
    /// `tr(ΨᴴΨR)`
    pub psi_psi: f64,
    /// `tr(Ψ̃ᴴΨR)`
    pub dpsi_psi: Complex64,
    /// `tr(Ψ̃ᴴΨ̃R)`
    pub dpsi_dpsi: f64,
    /// `|tr(Ψ̃ᴴΨR)|²`
    pub dpsi_psi_sq: f64,
}

/// Both evaluation routes of [`TraceIdentities`] and their worst relative gap.
#[derive(Debug, Clone, Copy)]
pub struct TraceIdentityCheck {
    pub direct: TraceIdentities,
    pub closed: TraceIdentities,
    pub max_rel_diff: f64,
}

fn check_dims(ctx: &SteeringContext, r: &CMatrix) -> Result<()> {
    let mt = ctx.a.len();
    let mr = ctx.b.len();
    if r.nrows() != mt || r.ncols() != mt || ctx.a_dot.len() != mt || ctx.b_dot.len() != mr {
        return Err(Error::DimensionMismatch(format!(
            "a: {mt}, a_dot: {}, b: {mr}, b_dot: {}, R: {}x{}",
            ctx.a_dot.len(),
            ctx.b_dot.len(),
            r.nrows(),
            r.ncols()
        )));
    }
    Ok(())
}

/// Traces computed from the explicit `Ψ` and `Ψ̃` matrices.
pub fn trace_identities_direct(ctx: &SteeringContext, r: &CMatrix) -> Result<TraceIdentities> {
    check_dims(ctx, r)?;
    let psi = &ctx.b * ctx.a.adjoint();
    let dpsi = &ctx.b_dot * ctx.a.adjoint() + &ctx.b * ctx.a_dot.adjoint();
    let trace = |m: CMatrix| -> Complex64 { (0..m.nrows()).map(|i| m[(i, i)]).sum() };
    let psi_psi = trace(psi.adjoint() * &psi * r).re;
    let dpsi_psi = trace(dpsi.adjoint() * &psi * r);
    let dpsi_dpsi = trace(dpsi.adjoint() * &dpsi * r).re;
    Ok(TraceIdentities {
        psi_psi,
        dpsi_psi,
        dpsi_dpsi,
        dpsi_psi_sq: dpsi_psi.norm_sqr(),
    })
}

/// Traces from the closed-form identities in `A = aᴴRa`, `κ = −j(2π/λ)cos θ`,
/// `Ã = aᴴRȧ − ȧᴴRa` and the receive coordinate sums.
pub fn trace_identities_closed(ctx: &SteeringContext, r: &CMatrix) -> Result<TraceIdentities> {
    check_dims(ctx, r)?;
    let mr = ctx.b.len() as f64;
    let y = &ctx.rx_positions;
    let s1: f64 = y.iter().sum();
    let s2: f64 = y.iter().map(|v| v * v).sum();
    let kappa = Complex64::new(0.0, -wavenumber(ctx.wavelength) * cos_aod(ctx.theta));

    let a_gain = Complex64::new(quad_form(&ctx.a, r), 0.0);
    let a_r_adot = bilinear(&ctx.a, r, &ctx.a_dot);
    let adot_r_a = bilinear(&ctx.a_dot, r, &ctx.a);
    let adot_gain = quad_form(&ctx.a_dot, r);
    let a_tilde = a_r_adot - adot_r_a;

    let psi_psi = mr * a_gain.re;
    let dpsi_psi = kappa * a_gain * s1 + a_r_adot * mr;
    let dpsi_dpsi = (-kappa * kappa * a_gain * s2 + mr * adot_gain - kappa * a_tilde * s1).re;
    let ka = kappa * a_gain;
    let dpsi_psi_sq =
        (-ka * ka * s1 * s1 + a_r_adot * adot_r_a * (mr * mr) - kappa * a_gain * a_tilde * (mr * s1)).re;
    Ok(TraceIdentities {
        psi_psi,
        dpsi_psi,
        dpsi_dpsi,
        dpsi_psi_sq,
    })
}

/// Evaluates the traces both ways and reports the largest relative discrepancy.
pub fn trace_identities(ctx: &SteeringContext, r: &CMatrix) -> Result<TraceIdentityCheck> {
    let direct = trace_identities_direct(ctx, r)?;
    let closed = trace_identities_closed(ctx, r)?;
    let scale_cross = (direct.psi_psi.abs() * direct.dpsi_dpsi.abs()).sqrt();
    let rel = |d: f64, c: f64, scale: f64| {
        let den = d.abs().max(c.abs()).max(1e-12 * scale);
        if den == 0.0 {
            0.0
        } else {
            (d - c).abs() / den
        }
    };
    let cross = {
        let den = direct
            .dpsi_psi
            .norm()
            .max(closed.dpsi_psi.norm())
            .max(1e-12 * scale_cross);
        if den == 0.0 {
            0.0
        } else {
            (direct.dpsi_psi - closed.dpsi_psi).norm() / den
        }
    };
    let max_rel_diff = [
        rel(direct.psi_psi, closed.psi_psi, direct.psi_psi.abs()),
        cross,
        rel(direct.dpsi_dpsi, closed.dpsi_dpsi, direct.dpsi_dpsi.abs()),
        rel(direct.dpsi_psi_sq, closed.dpsi_psi_sq, scale_cross * scale_cross),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(TraceIdentityCheck {
        direct,
        closed,
        max_rel_diff,
    })
}

/// Full trace-form bound, rad². Returns `+∞` when the Fisher information vanishes.
pub fn crb_full(
    ctx: &SteeringContext,
    r: &CMatrix,
    alpha: Complex64,
    distance: f64,
    frames: usize,
    noise_w: f64,
) -> Result<f64> {
    let t = trace_identities_direct(ctx, r)?;
    let product = t.dpsi_dpsi * t.psi_psi;
    let schur = product - t.dpsi_psi_sq;
    let denominator = alpha.norm_sqr() * frames as f64 * schur;
    if denominator <= SINGULAR_DENOMINATOR || schur <= CANCELLATION_FLOOR * product.abs() {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 * distance * distance * noise_w * t.psi_psi / denominator)
}

/// Numerator and denominator of the reduced bound.
fn reduced_parts(
    beam_gain: f64,
    aperture: f64,
    cos_theta: f64,
    alpha: Complex64,
    distance: f64,
    frames: usize,
    noise_w: f64,
    wavelength: f64,
) -> (f64, f64) {
    let g = wavenumber(wavelength) * cos_theta;
    let denominator = alpha.norm_sqr() * frames as f64 * g * g * beam_gain * aperture;
    let numerator = 2.0 * distance * distance * noise_w;
    (numerator, denominator)
}

/// Reduced closed-form bound, rad².
#[allow(clippy::too_many_arguments)]
pub fn crb_reduced(
    a: &CVector,
    y: &[f64],
    theta: f64,
    r: &CMatrix,
    alpha: Complex64,
    distance: f64,
    frames: usize,
    noise_w: f64,
    wavelength: f64,
) -> f64 {
    let (num, den) = reduced_parts(
        quad_form(a, r),
        aperture_term(y),
        cos_aod(theta),
        alpha,
        distance,
        frames,
        noise_w,
        wavelength,
    );
    if den <= SINGULAR_DENOMINATOR {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Per-target view of one slot's geometry.
#[derive(Debug, Clone, Copy)]
pub struct TargetView {
    pub theta: f64,
    pub cos_theta: f64,
    pub distance: f64,
    pub alpha: Complex64,
}

/// Frozen geometry of one slot: the UAV position and every target's angle and range.
///
/// All reciprocal-objective evaluations in the crate go through
/// [`SlotGeometry::reciprocal_sum`], so the AO safeguards, the PSO fitness
/// and the reported objective agree bit for bit.
#[derive(Debug, Clone)]
pub struct SlotGeometry {
    pub uav: [f64; 2],
    pub targets: Vec<TargetView>,
    pub wavelength: f64,
    pub frames: usize,
    pub noise_w: f64,
}

impl SlotGeometry {
    pub fn new(scenario: &Scenario, uav: [f64; 2]) -> Self {
        let targets = scenario
            .targets
            .iter()
            .map(|t| {
                let theta = geometry::aod(uav, t.position, scenario.altitude);
                TargetView {
                    theta,
                    cos_theta: cos_aod(theta),
                    distance: geometry::distance(uav, t.position, scenario.altitude),
                    alpha: t.alpha(),
                }
            })
            .collect();
        Self {
            uav,
            targets,
            wavelength: scenario.wavelength,
            frames: scenario.frames,
            noise_w: scenario.noise_w,
        }
    }

    pub fn target_count(&self) -> usize {
        self.targets.len()
    }

    pub fn steering(&self, k: usize, tx: &[f64]) -> CVector {
        steering(tx, self.targets[k].theta, self.wavelength)
    }

    fn parts(&self, k: usize, tx: &[f64], aperture: f64, r: &CMatrix) -> (f64, f64) {
        let t = &self.targets[k];
        let gain = quad_form(&self.steering(k, tx), r);
        reduced_parts(
            gain,
            aperture,
            t.cos_theta,
            t.alpha,
            t.distance,
            self.frames,
            self.noise_w,
            self.wavelength,
        )
    }

    /// `1/C̃_k`, zero where the bound is singular.
    pub fn reciprocal(&self, k: usize, tx: &[f64], aperture: f64, r: &CMatrix) -> f64 {
        let (num, den) = self.parts(k, tx, aperture, r);
        if den <= SINGULAR_DENOMINATOR {
            0.0
        } else {
            den / num
        }
    }

    pub fn crb(&self, k: usize, tx: &[f64], rx: &[f64], r: &CMatrix) -> f64 {
        let (num, den) = self.parts(k, tx, aperture_term(rx), r);
        if den <= SINGULAR_DENOMINATOR {
            f64::INFINITY
        } else {
            num / den
        }
    }

    /// `Σ_k 1/C̃_k` for a candidate layout and covariance.
    pub fn reciprocal_sum(&self, tx: &[f64], rx: &[f64], r: &CMatrix) -> f64 {
        let aperture = aperture_term(rx);
        (0..self.targets.len())
            .map(|k| self.reciprocal(k, tx, aperture, r))
            .sum()
    }
}

/// CRB values for every (slot, target) plus the two objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct CrbReport {
    /// `N x K`, rad², possibly `+∞`.
    pub per_slot_per_target: Vec<Vec<f64>>,
    /// Mean over finite entries, rad². `+∞` if every entry is infinite.
    pub avg_crb: f64,
    pub infinite_count: usize,
    /// `(1/NK) Σ 1/C̃`, rad⁻².
    pub reciprocal_objective: f64,
}

/// Reciprocal objective `(1/NK) Σ_n Σ_k 1/C̃_k[n]` without feasibility checks.
pub fn reciprocal_objective(
    scenario: &Scenario,
    points: &[[f64; 2]],
    covariances: &[BeamCovariance],
    layouts: &[ArrayLayout],
) -> f64 {
    let total: f64 = points
        .iter()
        .zip(covariances)
        .zip(layouts)
        .map(|((&q, cov), layout)| {
            SlotGeometry::new(scenario, q).reciprocal_sum(&layout.tx, &layout.rx, &cov.matrix)
        })
        .sum();
    total / (points.len() * scenario.target_count()) as f64
}

/// Checks constraints on every slot, then fills the CRB report.
pub fn evaluate(
    scenario: &Scenario,
    path: &Path,
    covariances: &[BeamCovariance],
    layouts: &[ArrayLayout],
) -> Result<CrbReport> {
    let n = scenario.slots;
    if path.points.len() != n || covariances.len() != n || layouts.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "expected {n} slots, got path {}, covariances {}, layouts {}",
            path.points.len(),
            covariances.len(),
            layouts.len()
        )));
    }
    crate::ao::check_feasible(scenario, path, covariances, layouts)?;
    Ok(report_unchecked(scenario, &path.points, covariances, layouts))
}

pub(crate) fn report_unchecked(
    scenario: &Scenario,
    points: &[[f64; 2]],
    covariances: &[BeamCovariance],
    layouts: &[ArrayLayout],
) -> CrbReport {
    let k = scenario.target_count();
    let per_slot_per_target: Vec<Vec<f64>> = points
        .iter()
        .zip(covariances)
        .zip(layouts)
        .map(|((&q, cov), layout)| {
            let geom = SlotGeometry::new(scenario, q);
            (0..k)
                .map(|t| geom.crb(t, &layout.tx, &layout.rx, &cov.matrix))
                .collect()
        })
        .collect();
    let finite: Vec<f64> = per_slot_per_target
        .iter()
        .flatten()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    let infinite_count = per_slot_per_target.len() * k - finite.len();
    let avg_crb = if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    CrbReport {
        per_slot_per_target,
        avg_crb,
        infinite_count,
        reciprocal_objective: reciprocal_objective(scenario, points, covariances, layouts),
    }
}
