//! Sample covariance of simulated waveforms approaches the design covariance.

use fluidsense::beamform::BeamCovariance;
use fluidsense::rng;
use fluidsense::signal::{sample_covariance, sample_waveform};

fn main() -> fluidsense::Result<()> {
    let r = BeamCovariance::isotropic(12, 0.1).matrix;
    let mut g = rng::stream(42, &[1]);
    for frames in [50, 200, 1000, 5000, 20_000] {
        let x = sample_waveform(&r, frames, &mut g)?;
        let err = (sample_covariance(&x.frames) - &r).norm() / r.norm();
        println!("{frames:>6} frames: relative Frobenius error {err:.4}");
    }
    Ok(())
}
