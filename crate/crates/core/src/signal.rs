//! Waveform and echo simulation.
//!
//! The optimization pipeline works with covariances analytically and never
//! samples waveforms; this module exists to check the statistical model
//! (sample covariance convergence, echo structure) against simulation.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{check_psd, hermitian_sqrt, CMatrix, CVector};

/// One slot of transmitted frames, `M_t x N̄`, one frame per column.
#[derive(Debug, Clone)]
pub struct FrameBlock {
    pub frames: CMatrix,
}

impl FrameBlock {
    pub fn frame_count(&self) -> usize {
        self.frames.ncols()
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// Draws `frames` i.i.d. circularly-symmetric Gaussian columns with covariance `r`.
pub fn sample_waveform<R: Rng + ?Sized>(r: &CMatrix, frames: usize, rng: &mut R) -> Result<FrameBlock> {
    check_psd(r)?;
    let m = r.nrows();
    if frames <= m {
        return Err(Error::InvalidArgument(format!(
            "frame count {frames} must exceed the antenna count {m}"
        )));
    }
    let root = hermitian_sqrt(r);
    let white = CMatrix::from_fn(m, frames, |_, _| complex_normal(rng, 1.0));
    Ok(FrameBlock {
        frames: root * white,
    })
}

/// `(1/N̄) X Xᴴ`.
pub fn sample_covariance(x: &CMatrix) -> CMatrix {
    let n = x.ncols().max(1) as f64;
    (x * x.adjoint()).unscale(n)
}

/// Target response `(α / 2d) b aᴴ`.
pub fn response_matrix(alpha: Complex64, distance: f64, b: &CVector, a: &CVector) -> CMatrix {
    let scale = alpha / (2.0 * distance);
    CMatrix::from_fn(b.len(), a.len(), |i, j| scale * b[i] * a[j].conj())
}

/// Echo `W X + N` with i.i.d. `CN(0, σ²)` noise entries.
pub fn simulate_echo<R: Rng + ?Sized>(
    response: &CMatrix,
    x: &CMatrix,
    noise_w: f64,
    rng: &mut R,
) -> Result<CMatrix> {
    if response.ncols() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "response is {}x{}, frames are {}x{}",
            response.nrows(),
            response.ncols(),
            x.nrows(),
            x.ncols()
        )));
    }
    let mut y = response * x;
    if noise_w > 0.0 {
        y.iter_mut().for_each(|v| *v += complex_normal(rng, noise_w));
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{min_eigenvalue, trace_re};
    use crate::rng::stream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_covariance_gives_zero_frames() {
        let mut rng = stream(1, &[]);
        let block = sample_waveform(&CMatrix::zeros(3, 3), 10, &mut rng).unwrap();
        assert!(block.frames.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let r = CMatrix::identity(4, 4);
        let a = sample_waveform(&r, 20, &mut stream(9, &[1])).unwrap();
        let b = sample_waveform(&r, 20, &mut stream(9, &[1])).unwrap();
        assert_eq!(a.frames, b.frames);
    }

    #[test]
    fn identity_covariance_is_recovered() {
        let r = CMatrix::identity(4, 4);
        let block = sample_waveform(&r, 40_000, &mut stream(3, &[])).unwrap();
        let est = sample_covariance(&block.frames);
        assert!((est - r).norm() < 0.05);
    }

    #[test]
    fn non_psd_is_rejected() {
        let mut r = CMatrix::identity(3, 3);
        r[(0, 0)] = c(-2.0, 0.0);
        assert!(sample_waveform(&r, 10, &mut stream(0, &[])).is_err());
    }

    #[test]
    fn single_column_covariance_is_outer_product() {
        let v = CMatrix::from_column_slice(2, 1, &[c(1.0, 1.0), c(0.0, -2.0)]);
        let s = sample_covariance(&v);
        let expected = &v * v.adjoint();
        assert!((s - expected).norm() < 1e-15);
        assert_eq!(sample_covariance(&CMatrix::zeros(3, 5)), CMatrix::zeros(3, 3));
    }

    #[test]
    fn sample_covariance_is_psd() {
        let x = CMatrix::from_fn(5, 7, |i, j| c((i * j) as f64 - 3.0, i as f64 - j as f64));
        let s = sample_covariance(&x);
        assert!(min_eigenvalue(&s) >= -1e-10 * trace_re(&s));
    }

    #[test]
    fn response_examples() {
        let ones = CVector::from_element(3, c(1.0, 0.0));
        let w = response_matrix(c(1.0, 0.0), 0.5, &ones, &ones);
        assert!(w.iter().all(|z| (*z - c(1.0, 0.0)).norm() < 1e-15));

        let a = crate::geometry::steering(&[0.0, 0.003, 0.011], 0.8, 0.0107);
        let b = crate::geometry::steering(&[0.0, 0.02], 0.8, 0.0107);
        let w1 = response_matrix(c(0.3, 0.4), 120.0, &b, &a);
        let w2 = response_matrix(c(0.3, 0.4), 240.0, &b, &a);
        assert!((w1.unscale(2.0) - &w2).norm() < 1e-15);
        let sv = w1.svd(false, false).singular_values;
        assert!(sv[1] < 1e-10 * sv[0]);
    }

    #[test]
    fn noiseless_echo_is_exact() {
        let w = CMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64));
        let x = CMatrix::from_fn(3, 4, |i, j| c(1.0 + i as f64, -(j as f64)));
        let y = simulate_echo(&w, &x, 0.0, &mut stream(0, &[])).unwrap();
        assert_eq!(y, &w * &x);
    }

    #[test]
    fn pure_noise_has_configured_variance() {
        let sigma2 = 1e-12;
        let x = CMatrix::zeros(4, 30_000);
        let w = CMatrix::zeros(4, 4);
        let y = simulate_echo(&w, &x, sigma2, &mut stream(5, &[])).unwrap();
        let var = y.iter().map(|z| z.norm_sqr()).sum::<f64>() / y.len() as f64;
        assert!((var / sigma2 - 1.0).abs() < 0.05, "{var}");
    }
}
