//! One trajectory update from the straight-line flight with fixed beams and arrays.

use fluidsense::beamform::BeamCovariance;
use fluidsense::crb::evaluate;
use fluidsense::fa_pso::ArrayLayout;
use fluidsense::scenario::default_scenario;
use fluidsense::trajectory::{freeze_steering, optimize_trajectory, p3_objective, trajectory_weights, Path};

fn main() -> fluidsense::Result<()> {
    let s = default_scenario();
    let path = Path::straight_line(&s);
    let layouts = vec![ArrayLayout::sula(&s)?; s.slots];
    let covs = vec![BeamCovariance::isotropic(s.tx_antennas, s.max_power_w); s.slots];

    let frozen = freeze_steering(&path, &s, &layouts);
    let weights = trajectory_weights(&frozen, &covs, &layouts, &s);
    let next = optimize_trajectory(&path, &weights, &s)?;

    println!("trajectory objective {:.4e} -> {:.4e}", p3_objective(&path.points, &weights, &s), p3_objective(&next.points, &weights, &s));
    println!(
        "average CRB {:.4e} -> {:.4e} rad^2",
        evaluate(&s, &path, &covs, &layouts)?.avg_crb,
        evaluate(&s, &next, &covs, &layouts)?.avg_crb
    );
    println!("longest step {:.2} m (limit {:.2} m)", next.longest_step(), next.max_step());
    for (n, q) in next.points.iter().enumerate() {
        println!("{:>3}  {:>8.2}  {:>8.2}", n + 1, q[0], q[1]);
    }
    Ok(())
}
