//! Runs the proposed design and the three fixed-array baselines on one seed.

use std::time::Instant;

use fluidsense::baselines::{run_scheme, SchemeId};
use fluidsense::scenario::default_scenario;

fn main() -> fluidsense::Result<()> {
    let mut scenario = default_scenario();
    if let Some(seed) = std::env::args().nth(1).and_then(|s| s.parse().ok()) {
        scenario.seed = seed;
    }
    println!("{:<10} {:>14} {:>14} {:>6} {:>9}", "scheme", "initial CRB", "final CRB", "iters", "time");
    for scheme in SchemeId::ALL {
        let t = Instant::now();
        let sol = run_scheme(scheme, &scenario)?;
        println!(
            "{:<10} {:>14.4e} {:>14.4e} {:>6} {:>8.1?}",
            scheme.name(),
            sol.trace[0].avg_crb,
            sol.report.avg_crb,
            sol.iterations_used,
            t.elapsed()
        );
    }
    Ok(())
}
