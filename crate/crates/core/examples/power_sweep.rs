//! Median average CRB versus transmit power for every scheme.
//!
//!     cargo run --release --example power_sweep -- [seeds]

use fluidsense::baselines::SchemeId;
use fluidsense::experiments::{exp_sweep, seed_list, SweepSpec, SweepVariable};
use fluidsense::plot::{line_chart, Series};
use fluidsense::scenario::default_scenario;

fn main() -> fluidsense::Result<()> {
    let seeds: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let base = default_scenario();
    let spec = SweepSpec::new(SweepVariable::PowerDbm, SchemeId::ALL.to_vec(), seed_list(base.seed, seeds));
    let result = exp_sweep(&spec, &base)?;
    print!("{}", result.median_table().to_csv());

    let series: Vec<Series> = SchemeId::ALL
        .iter()
        .map(|&s| Series { label: s.to_string(), points: result.curve(s) })
        .collect();
    std::fs::create_dir_all("results").ok();
    std::fs::write("results/power_sweep.svg", line_chart("Average CRB vs power", "P_max (dBm)", "CRB (rad^2)", &series, true))
        .expect("write svg");
    Ok(())
}
