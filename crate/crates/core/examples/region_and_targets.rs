//! Proposed scheme versus movable-region size and versus target count.

use fluidsense::baselines::SchemeId;
use fluidsense::experiments::{exp_sweep, seed_list, SweepSpec, SweepVariable};
use fluidsense::scenario::default_scenario;

fn main() -> fluidsense::Result<()> {
    let base = default_scenario();
    for variable in [SweepVariable::RegionWavelengths, SweepVariable::Targets] {
        let spec = SweepSpec::new(variable, vec![SchemeId::Proposed], seed_list(base.seed, 2));
        let result = exp_sweep(&spec, &base)?;
        println!("{}:", variable.column());
        for (v, crb) in result.curve(SchemeId::Proposed) {
            println!("  {v:>5}  {crb:.4e}");
        }
    }
    Ok(())
}
