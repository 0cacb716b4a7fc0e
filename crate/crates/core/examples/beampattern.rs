//! Beampattern of the optimized design at one slot, written as CSV.
//!
//!     cargo run --release --example beampattern -- [slot]

use fluidsense::ao::run_ao;
use fluidsense::experiments::{exp_beampattern, BEAMPATTERN_POINTS};
use fluidsense::scenario::default_scenario;

fn main() -> fluidsense::Result<()> {
    let slot: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let s = default_scenario();
    let sol = run_ao(&s)?;
    let bp = exp_beampattern(&sol, &s, slot, BEAMPATTERN_POINTS)?;
    for (k, theta, gain) in &bp.targets {
        println!("target {k}: theta {theta:.4} rad, gain {gain:.4} W");
    }
    std::fs::create_dir_all("results").ok();
    bp.table().write("results/beampattern.csv")?;
    println!("wrote results/beampattern.csv ({} angles)", bp.gains.len());
    Ok(())
}
