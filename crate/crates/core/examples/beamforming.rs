//! Closed-form transmit covariance for one slot and its beampattern.

use std::f64::consts::FRAC_PI_2;

use fluidsense::beamform::{beampattern_gain, optimize_beamforming_slot, slot_objective, slot_weight, BeamCovariance};
use fluidsense::crb::SlotGeometry;
use fluidsense::fa_pso::ArrayLayout;
use fluidsense::scenario::default_scenario;
use fluidsense::trajectory::Path;

fn main() -> fluidsense::Result<()> {
    let s = default_scenario();
    let uav = Path::straight_line(&s).points[9];
    let layout = ArrayLayout::sula(&s)?;
    let geom = SlotGeometry::new(&s, uav);

    let steering: Vec<_> = (0..geom.target_count()).map(|k| geom.steering(k, &layout.tx)).collect();
    let weights: Vec<f64> = (0..geom.target_count()).map(|k| slot_weight(&geom, k, &layout.rx)).collect();
    let best = optimize_beamforming_slot(&steering, &weights, s.max_power_w);
    let iso = BeamCovariance::isotropic(s.tx_antennas, s.max_power_w);

    println!("UAV at ({:.1}, {:.1}) m", uav[0], uav[1]);
    println!("objective, isotropic: {:.4e}", slot_objective(&steering, &weights, &iso.matrix));
    println!("objective, optimized: {:.4e}", slot_objective(&steering, &weights, &best.matrix));
    let eig = best.matrix.clone().symmetric_eigen().eigenvalues;
    let top = eig.iter().fold(0.0f64, |m, v| m.max(*v));
    println!("largest eigenvalue {top:.4} W of trace {:.4} W (rank one)", best.trace_budget);

    for (k, t) in geom.targets.iter().enumerate() {
        let gain = beampattern_gain(&best.matrix, &layout.tx, t.theta, s.wavelength);
        println!("target {}: theta {:.3} rad, weight {:.3e}, gain {gain:.3} W", k + 1, t.theta, weights[k]);
    }
    let peak = (0..=180)
        .map(|i| FRAC_PI_2 * i as f64 / 180.0)
        .map(|th| (th, beampattern_gain(&best.matrix, &layout.tx, th, s.wavelength)))
        .fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    println!("beampattern peak {:.3} W at {:.3} rad", peak.1, peak.0);
    Ok(())
}
