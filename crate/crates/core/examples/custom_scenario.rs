//! Builds a scenario from TOML, shows validation errors, and saves it back.

use fluidsense::scenario::{default_scenario, parse_scenario, scenario_to_toml};

const SMALL: &str = r#"
seed = 7

[mission]
region_size = [500.0, 500.0]
H = 80.0
T = 30.0
N = 12
V_max = 20.0
q_I = [0.0, 250.0]
q_F = [500.0, 250.0]

[targets]
K = 3
rcs_m2 = [1.0, 0.5, 2.0]
positions = [[100.0, 200.0], [250.0, 330.0], [420.0, 150.0]]

[array]
M_t = 8
M_r = 8
lambda = 0.0107
D = 0.107
D_min = 0.00535

[radio]
P_max_dBm = 30.0
sigma2_r_dBm = -90.0
N_bar = 200

[pso]
T_max = 20
P = 20
c1 = 1.5
c2 = 1.5
omega_max = 0.9
omega_min = 0.4
eta = 1e6

[ao]
l_max = 5
epsilon = 1e-4
"#;

fn main() -> fluidsense::Result<()> {
    let reference = scenario_to_toml(&default_scenario())?;
    println!("reference scenario:\n{reference}");

    let loaded = parse_scenario(SMALL)?;
    let s = &loaded.scenario;
    println!("small scenario: N = {}, K = {}, M_t = {}, reach per slot {:.2} m", s.slots, s.target_count(), s.tx_antennas, s.max_step());
    let solution = fluidsense::ao::run_ao(s)?;
    println!("avg CRB {:.4e} rad^2 after {} iterations", solution.report.avg_crb, solution.iterations_used);

    match parse_scenario(&SMALL.replace("N = 12", "N = 1").replace("D_min = 0.00535", "D_min = -1.0")) {
        Ok(_) => println!("unexpectedly valid"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
