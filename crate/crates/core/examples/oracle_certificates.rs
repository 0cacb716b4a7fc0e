//! Runs the brute-force certificate suite with a reduced sample budget.

use fluidsense::oracle::{format_report, run_certificates, OracleConfig};

fn main() -> fluidsense::Result<()> {
    let config = OracleConfig {
        equivalence_cases: 200,
        beamforming_instances: 20,
        beamforming_samples: 2000,
        derivative_cases: 200,
        ..OracleConfig::default()
    };
    print!("{}", format_report(&run_certificates(&config)?));
    Ok(())
}
