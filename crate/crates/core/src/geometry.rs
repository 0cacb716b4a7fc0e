//! Distances, vertical angles of departure, and linear-array steering vectors.
//!
//! Angles are radians. `θ` is measured so that `θ = π/2` means the target is
//! directly below the UAV.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::linalg::CVector;

/// UAV-to-target range for a UAV at horizontal position `uav` and altitude `altitude`.
pub fn distance(uav: [f64; 2], target: [f64; 2], altitude: f64) -> f64 {
    let horizontal = (uav[0] - target[0]).hypot(uav[1] - target[1]);
    horizontal.hypot(altitude)
}

/// Vertical angle of departure, `asin(H / d)`, in `(0, π/2]`.
pub fn aod(uav: [f64; 2], target: [f64; 2], altitude: f64) -> f64 {
    (altitude / distance(uav, target, altitude)).min(1.0).asin()
}

/// `cos θ` evaluated as `sin(π/2 - θ)`, which is exactly zero at `θ = π/2`
/// and accurate close to it.
pub fn cos_aod(theta: f64) -> f64 {
    (FRAC_PI_2 - theta).sin()
}

pub fn wavenumber(wavelength: f64) -> f64 {
    2.0 * PI / wavelength
}

/// Entries `exp(j 2π/λ · p_i · sin θ)`.
pub fn steering(positions: &[f64], theta: f64, wavelength: f64) -> CVector {
    let phase = wavenumber(wavelength) * theta.sin();
    CVector::from_iterator(
        positions.len(),
        positions.iter().map(|&p| Complex64::from_polar(1.0, phase * p)),
    )
}

/// `∂/∂θ` of [`steering`]: `j 2π/λ · p_i · cos θ · a_i`.
pub fn steering_derivative(positions: &[f64], theta: f64, wavelength: f64) -> CVector {
    let k = wavenumber(wavelength);
    let cos = cos_aod(theta);
    let a = steering(positions, theta, wavelength);
    CVector::from_iterator(
        positions.len(),
        positions
            .iter()
            .zip(a.iter())
            .map(|(&p, &ai)| Complex64::new(0.0, k * p * cos) * ai),
    )
}

/// Centered second moment `yᵀ(I − 11ᵀ/M)y = Σ (y_i − ȳ)²`.
pub fn aperture_term(positions: &[f64]) -> f64 {
    if positions.is_empty() {
        return 0.0;
    }
    // Shifting by the first coordinate keeps identical positions exactly zero.
    let origin = positions[0];
    let mean = positions.iter().map(|&p| p - origin).sum::<f64>() / positions.len() as f64;
    positions
        .iter()
        .map(|&p| {
            let c = p - origin - mean;
            c * c
        })
        .sum()
}

/// Steering quantities for one (slot, target) pair.
#[derive(Debug, Clone)]
pub struct SteeringContext {
    pub theta: f64,
    pub distance: f64,
    pub tx_positions: Vec<f64>,
    pub rx_positions: Vec<f64>,
    pub wavelength: f64,
    pub a: CVector,
    pub b: CVector,
    pub a_dot: CVector,
    pub b_dot: CVector,
}

impl SteeringContext {
    pub fn new(
        uav: [f64; 2],
        target: [f64; 2],
        altitude: f64,
        tx_positions: &[f64],
        rx_positions: &[f64],
        wavelength: f64,
    ) -> Self {
        let theta = aod(uav, target, altitude);
        let mut ctx = Self::from_angle(theta, tx_positions, rx_positions, wavelength);
        ctx.distance = distance(uav, target, altitude);
        ctx
    }

    /// Context for a given angle. `distance` is left at zero.
    pub fn from_angle(theta: f64, tx_positions: &[f64], rx_positions: &[f64], wavelength: f64) -> Self {
        Self {
            theta,
            distance: 0.0,
            tx_positions: tx_positions.to_vec(),
            rx_positions: rx_positions.to_vec(),
            wavelength,
            a: steering(tx_positions, theta, wavelength),
            b: steering(rx_positions, theta, wavelength),
            a_dot: steering_derivative(tx_positions, theta, wavelength),
            b_dot: steering_derivative(rx_positions, theta, wavelength),
        }
    }
}
