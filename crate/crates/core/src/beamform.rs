//! Per-slot transmit covariance design.
//!
//! With the trajectory and layouts fixed, the slot objective
//! `Σ_k c_k a_kᴴ R a_k` is linear in `R`, so over `{R ⪰ 0, tr R ≤ P}` the
//! maximum sits at the extreme point `P u uᴴ`, with `u` the top eigenvector of
//! `Σ_k c_k a_k a_kᴴ`.

use serde::{Deserialize, Serialize};

use crate::crb::SlotGeometry;
use crate::geometry::{aperture_term, steering, wavenumber};
use crate::linalg::{outer_scaled, quad_form, top_eigenpair, CMatrix, CVector};

/// Transmit covariance of one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamCovariance {
    #[serde(with = "complex_matrix")]
    pub matrix: CMatrix,
    /// Power budget the matrix was designed for, watts.
    pub trace_budget: f64,
    /// Set when every weight was zero, so any feasible covariance was optimal.
    pub degenerate: bool,
}

impl BeamCovariance {
    /// Isotropic `(P/M)·I`.
    pub fn isotropic(tx_antennas: usize, power_w: f64) -> Self {
        Self {
            matrix: CMatrix::identity(tx_antennas, tx_antennas).scale(power_w / tx_antennas as f64),
            trace_budget: power_w,
            degenerate: false,
        }
    }
}

/// `c_k` such that `1/C̃_k = c_k · a_kᴴ R a_k`.
pub fn slot_weight(geometry: &SlotGeometry, k: usize, rx: &[f64]) -> f64 {
    let t = &geometry.targets[k];
    let g = wavenumber(geometry.wavelength) * t.cos_theta;
    t.alpha.norm_sqr() * geometry.frames as f64 * g * g * aperture_term(rx)
        / (2.0 * t.distance * t.distance * geometry.noise_w)
}

/// Maximizes `Σ_k c_k a_kᴴ R a_k` subject to `tr R ≤ p_max`, `R ⪰ 0`.
pub fn optimize_beamforming_slot(steering: &[CVector], weights: &[f64], p_max: f64) -> BeamCovariance {
    let m = steering.first().map_or(0, |a| a.len());
    if weights.iter().all(|&c| c <= 0.0) || m == 0 {
        let mut cov = BeamCovariance::isotropic(m, p_max);
        cov.degenerate = true;
        return cov;
    }
    let mut gram = CMatrix::zeros(m, m);
    for (a, &c) in steering.iter().zip(weights) {
        if c > 0.0 {
            gram += outer_scaled(a, c);
        }
    }
    let (_, u) = top_eigenpair(&gram);
    BeamCovariance {
        matrix: outer_scaled(&u, p_max),
        trace_budget: p_max,
        degenerate: false,
    }
}

/// Slot objective `Σ_k c_k a_kᴴ R a_k`.
pub fn slot_objective(steering: &[CVector], weights: &[f64], r: &CMatrix) -> f64 {
    steering.iter().zip(weights).map(|(a, &c)| c * quad_form(a, r)).sum()
}

/// Beampattern gain `a(θ)ᴴ R a(θ)`, watts.
pub fn beampattern_gain(r: &CMatrix, tx: &[f64], theta: f64, wavelength: f64) -> f64 {
    quad_form(&steering(tx, theta, wavelength), r).max(0.0)
}

/// Serializes a complex matrix as rows of `[re, im]` pairs.
pub(crate) mod complex_matrix {
    use super::CMatrix;
    use num_complex::Complex64;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(D::Error::custom("ragged matrix"));
        }
        Ok(CMatrix::from_fn(n, m, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
    }
}
