//! Particle-swarm antenna placement for one slot, starting from the uniform arrays.

use fluidsense::beamform::BeamCovariance;
use fluidsense::crb::SlotGeometry;
use fluidsense::fa_pso::{optimize_positions_slot, ArrayLayout, SearchSpace, SlotContext};
use fluidsense::scenario::default_scenario;
use fluidsense::trajectory::Path;

fn main() -> fluidsense::Result<()> {
    let s = default_scenario();
    let uav = Path::straight_line(&s).points[4];
    let geom = SlotGeometry::new(&s, uav);
    let cov = BeamCovariance::isotropic(s.tx_antennas, s.max_power_w);
    let ctx = SlotContext {
        geometry: &geom,
        covariance: &cov.matrix,
        tx_count: s.tx_antennas,
        aperture: s.aperture,
        min_spacing: s.min_spacing,
        space: SearchSpace::Full,
    };
    let start = ArrayLayout::sula(&s)?;
    let out = optimize_positions_slot(&ctx, &start, &s.pso, s.seed, &[0, 4])?;

    println!("mean reciprocal CRB: {:.4e} -> {:.4e}", ctx.objective(&ctx.encode(&start)), out.best_value);
    for (t, v) in out.history.iter().enumerate().step_by(10) {
        println!("  swarm iteration {t:>3}: {v:.4e}");
    }
    let lambda = s.wavelength;
    let fmt = |p: &[f64]| p.iter().map(|x| format!("{:.2}", x / lambda)).collect::<Vec<_>>().join(" ");
    println!("tx (in wavelengths): {}", fmt(&out.layout.tx));
    println!("rx (in wavelengths): {}", fmt(&out.layout.rx));
    out.layout.check(&s)?;
    Ok(())
}
