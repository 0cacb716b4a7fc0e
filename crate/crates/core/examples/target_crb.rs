//! Per-slot CRB of two targets over the optimized flight.

use fluidsense::ao::run_ao;
use fluidsense::experiments::exp_target_crb;
use fluidsense::geometry::distance;
use fluidsense::scenario::default_scenario;

fn main() -> fluidsense::Result<()> {
    let s = default_scenario();
    let sol = run_ao(&s)?;
    let table = exp_target_crb(&sol, &[1, 2])?;
    println!("{}", table.to_csv());
    for k in 0..2 {
        let row = |n: usize| sol.report.per_slot_per_target[n][k];
        let best = (0..s.slots).min_by(|&a, &b| row(a).total_cmp(&row(b))).unwrap_or(0);
        let d = distance(sol.path.points[best], s.targets[k].position, s.altitude);
        println!("target {}: lowest CRB {:.3e} at slot {} ({d:.1} m away)", k + 1, row(best), best + 1);
    }
    Ok(())
}
