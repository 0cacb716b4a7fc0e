//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fluidsense::ao::{check_feasible, Solution};
use fluidsense::baselines::{run_scheme, SchemeId};
use fluidsense::experiments::{exp_sweep, median, seed_list, SweepResult, SweepSpec, SweepVariable};
use fluidsense::oracle::{
    beamforming_certificate, covariance_convergence, grid_scenario, oracle_crb_equivalence, oracle_derivative,
    swarm_versus_grid, CovarianceDraw, OracleConfig,
};
use fluidsense::scenario::{default_scenario, Scenario};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn seeds() -> Vec<u64> {
    seed_list(default_scenario().seed, 5)
}

fn with_seed(seed: u64) -> Scenario {
    let mut s = default_scenario();
    s.seed = seed;
    s
}

fn equivalence(config: &OracleConfig) -> Outcome {
    let (worst, t) = timed(|| oracle_crb_equivalence(config.seed, 1000, config.min_cos_theta, CovarianceDraw::FullRank));
    let rank_one = oracle_crb_equivalence(config.seed, 1000, config.min_cos_theta, CovarianceDraw::RankOne);
    outcome(
        worst < 1e-8 && t < Duration::from_secs(10),
        format!("worst rel diff {worst:.3e} over random PSD R (rank-one R: {rank_one:.3e}), {t:.2?}"),
    )
}

fn beamforming(config: &OracleConfig) -> Outcome {
    let ((margin, structure), t) = timed(|| beamforming_certificate(config));
    outcome(
        margin <= 1e-9 && structure && t < Duration::from_secs(30),
        format!("worst oracle-minus-analytic {margin:.3e}, Hermitian/PSD/rank-1/full-power: {structure}, {t:.2?}"),
    )
}

fn monotone_and_feasible(runs: &[(SchemeId, u64, Solution, Duration)]) -> Outcome {
    let s = default_scenario();
    let mut bad = Vec::new();
    let mut slowest = Duration::ZERO;
    for (_, seed, sol, t) in runs.iter().filter(|r| r.0 == SchemeId::Proposed) {
        slowest = slowest.max(*t);
        let obj = sol.objectives();
        if let Some(i) = obj.windows(2).position(|w| w[1] < w[0] - 1e-9 * w[0].abs()) {
            bad.push(format!("seed {seed}: objective drops at iteration {}", i + 1));
        }
        if let Err(e) = check_feasible(&s, &sol.path, &sol.covariances, &sol.layouts) {
            bad.push(format!("seed {seed}: {e}"));
        }
        if *t > Duration::from_secs(300) {
            bad.push(format!("seed {seed}: {t:.1?}"));
        }
    }
    let detail = if bad.is_empty() {
        format!("5 seeds, objective non-decreasing, every iterate feasible, slowest run {slowest:.1?}")
    } else {
        bad.join("; ")
    };
    outcome(bad.is_empty(), detail)
}

fn swarm_vs_grid() -> Outcome {
    let (res, t) = timed(|| {
        let s = grid_scenario(&default_scenario())?;
        swarm_versus_grid(&s, s.wavelength / 50.0)
    });
    match res {
        Ok((swarm, grid)) => {
            let ratio = swarm / grid.fitness;
            outcome(
                ratio >= 0.98 && t < Duration::from_secs(60),
                format!("swarm/grid = {ratio:.6} over {} cells, {t:.2?}", grid.cells),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn ordering(runs: &[(SchemeId, u64, Solution, Duration)]) -> Outcome {
    let med = |scheme: SchemeId| {
        let v: Vec<f64> = runs.iter().filter(|r| r.0 == scheme).map(|r| r.2.report.avg_crb).collect();
        median(&v)
    };
    let [p, t, s, d] = SchemeId::ALL.map(med);
    outcome(
        p <= t && t <= s.min(d),
        format!("median final avg CRB: proposed {p:.3e}, tfao {t:.3e}, sula {s:.3e}, dula {d:.3e}"),
    )
}

fn curve_text(r: &SweepResult, scheme: SchemeId) -> String {
    r.curve(scheme).iter().map(|(v, c)| format!("{v}:{c:.3e}")).collect::<Vec<_>>().join(" ")
}

fn power_sweep() -> Outcome {
    let spec = SweepSpec::new(SweepVariable::PowerDbm, SchemeId::ALL.to_vec(), seeds());
    match exp_sweep(&spec, &default_scenario()) {
        Ok(r) => {
            let mut lines = Vec::new();
            let mut ok = true;
            for scheme in SchemeId::ALL {
                let c = r.curve(scheme);
                ok &= c.windows(2).all(|w| w[1].1 < w[0].1);
                lines.push(format!("{scheme} [{}]", curve_text(&r, scheme)));
            }
            outcome(ok, lines.join("; "))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn proposed_sweep(variable: SweepVariable, increasing: bool) -> Outcome {
    let spec = SweepSpec::new(variable, vec![SchemeId::Proposed], seeds());
    match exp_sweep(&spec, &default_scenario()) {
        Ok(r) => {
            let c = r.curve(SchemeId::Proposed);
            let ok = c.windows(2).all(|w| {
                if increasing {
                    w[1].1 >= w[0].1 * (1.0 - 0.02)
                } else {
                    w[1].1 <= w[0].1 * (1.0 + 0.02)
                }
            });
            outcome(ok, format!("proposed [{}]", curve_text(&r, SchemeId::Proposed)))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn derivative(config: &OracleConfig) -> Outcome {
    let worst = oracle_derivative(config.seed, 1000);
    outcome(worst < 1e-6, format!("worst relative error {worst:.3e}"))
}

fn sample_covariance(config: &OracleConfig) -> Outcome {
    match covariance_convergence(config.seed, 10, 100, 10_000) {
        Ok(wins) => outcome(wins >= 9, format!("{wins}/10 trials improved")),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_fluidsense");
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(format!("w{workers}"));
        let status = Command::new(bin)
            .args(["run", "--seed", "42", "--workers", workers, "--out-dir"])
            .arg(&out)
            .output();
        match status {
            Ok(o) if o.status.success() => outputs.push(out),
            Ok(o) => return outcome(false, String::from_utf8_lossy(&o.stderr).into_owned()),
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    let files = ["convergence.csv", "crb_per_target.csv", "path.csv", "solution.json"];
    let differing: Vec<&str> = files
        .iter()
        .copied()
        .filter(|f| std::fs::read(outputs[0].join(f)).ok() != std::fs::read(outputs[1].join(f)).ok())
        .collect();
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            "byte-identical outputs with 1 and 3 workers".to_string()
        } else {
            format!("differing: {}", differing.join(", "))
        },
    )
}

fn main() -> ExitCode {
    let config = OracleConfig::default();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report = |name, o: Outcome| {
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        results.push((name, o));
    };
    report("1 full vs reduced bound equivalence", equivalence(&config));
    report("2 beamforming optimality", beamforming(&config));

    let runs: Vec<(SchemeId, u64, Solution, Duration)> = SchemeId::ALL
        .iter()
        .flat_map(|&scheme| seeds().into_iter().map(move |seed| (scheme, seed)))
        .map(|(scheme, seed)| {
            let (sol, t) = timed(|| run_scheme(scheme, &with_seed(seed)));
            (scheme, seed, sol.unwrap_or_else(|e| panic!("{scheme} seed {seed}: {e}")), t)
        })
        .collect();
    report("3 monotone objective and feasible iterates", monotone_and_feasible(&runs));
    report("4 swarm vs exhaustive grid", swarm_vs_grid());
    report("5 scheme ordering", ordering(&runs));
    report("6 power sweep decreasing", power_sweep());
    report("7 region sweep non-increasing", proposed_sweep(SweepVariable::RegionWavelengths, false));
    report("8 target-count sweep non-decreasing", proposed_sweep(SweepVariable::Targets, true));
    report("9 steering derivative", derivative(&config));
    report("10 sample covariance convergence", sample_covariance(&config));
    report("11 determinism across worker counts", determinism());

    let failed: Vec<&str> = results.iter().filter(|r| !r.1.passed).map(|r| r.0).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
