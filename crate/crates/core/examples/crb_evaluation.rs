//! Evaluates the angle CRB of every target along the straight-line flight
//! with uniform arrays and isotropic transmission, and checks the closed-form
//! trace identities at one configuration.

use fluidsense::beamform::BeamCovariance;
use fluidsense::crb::{evaluate, trace_identities};
use fluidsense::fa_pso::ArrayLayout;
use fluidsense::geometry::{aod, SteeringContext};
use fluidsense::scenario::default_scenario;
use fluidsense::trajectory::Path;

fn main() -> fluidsense::Result<()> {
    let s = default_scenario();
    let path = Path::straight_line(&s);
    let layout = ArrayLayout::sula(&s)?;
    let covs = vec![BeamCovariance::isotropic(s.tx_antennas, s.max_power_w); s.slots];
    let layouts = vec![layout.clone(); s.slots];
    let report = evaluate(&s, &path, &covs, &layouts)?;

    print!("slot");
    for k in 1..=s.target_count() {
        print!("  target {k:<4}");
    }
    println!();
    for (n, row) in report.per_slot_per_target.iter().enumerate() {
        print!("{:>4}", n + 1);
        for v in row {
            print!("  {v:>11.3e}");
        }
        println!();
    }
    println!("average CRB {:.4e} rad^2", report.avg_crb);

    let theta = aod(path.points[0], s.targets[0].position, s.altitude);
    let ctx = SteeringContext::from_angle(theta, &layout.tx, &layout.rx, s.wavelength);
    let check = trace_identities(&ctx, &covs[0].matrix)?;
    println!("trace identities: direct vs closed form, max relative gap {:.2e}", check.max_rel_diff);
    Ok(())
}
