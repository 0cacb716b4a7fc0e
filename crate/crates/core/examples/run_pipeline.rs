//! Full joint optimization on the reference scenario; writes the result files.
//!
//!     cargo run --release --example run_pipeline -- [out_dir]

use fluidsense::ao::run_ao;
use fluidsense::output::save_results;
use fluidsense::scenario::default_scenario;

fn main() -> fluidsense::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "results/pipeline".into());
    let scenario = default_scenario();
    let solution = run_ao(&scenario)?;

    for r in &solution.trace {
        println!("iter {:>2}  objective {:.6e}  avg CRB {:.4e} rad^2", r.iteration, r.objective, r.avg_crb);
    }
    println!(
        "{} iterations, converged: {}, {} infinite CRB entries",
        solution.iterations_used, solution.converged, solution.report.infinite_count
    );
    save_results(&solution, &out)?;
    println!("results in {out}/");
    Ok(())
}
