use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fluidsense::ao::Solution;
use fluidsense::baselines::{run_scheme, SchemeId};
use fluidsense::experiments::{
    exp_beampattern, exp_convergence, exp_sweep, exp_target_crb, seed_list, SweepSpec, SweepVariable, BEAMPATTERN_POINTS,
};
use fluidsense::oracle::{format_report, run_certificates, OracleConfig};
use fluidsense::output::{save_results, CsvTable};
use fluidsense::plot::{line_chart, Series};
use fluidsense::scenario::{default_scenario, load_scenario, Scenario};
use fluidsense::{Error, Result};

#[derive(Parser)]
#[command(name = "fluidsense", version, about = "UAV fluid-antenna multi-target sensing simulator")]
struct Cli {
    /// Scenario TOML; the reference scenario when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Scenario seed (first seed for multi-seed studies).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of consecutive seeds for multi-seed studies.
    #[arg(long, global = true, default_value_t = 5)]
    seeds: usize,
    /// proposed, tfao, sula or dula; studies default to all four.
    #[arg(long, global = true)]
    scheme: Option<SchemeId>,
    #[arg(long, global = true, default_value = "results")]
    out_dir: PathBuf,
    /// Also write SVG charts next to the CSVs.
    #[arg(long, global = true)]
    plot: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scheme and write the solution, per-target CRB, convergence and path.
    Run,
    /// Objective and average-CRB traces for every scheme and seed.
    Convergence,
    /// Transmit beampattern at one slot.
    Beampattern {
        /// 1-based slot.
        #[arg(long, default_value_t = 1)]
        slot: usize,
    },
    /// Per-slot CRB of selected targets.
    TargetCrb {
        /// Comma-separated 1-based target indices.
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        targets: Vec<usize>,
    },
    /// Average CRB versus maximum transmit power (dBm).
    SweepPower {
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Average CRB versus movable-region size (wavelengths).
    SweepRegion {
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Average CRB versus number of targets.
    SweepTargets {
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Run the brute-force certificate suite.
    Oracle,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error[InvalidArgument]: worker pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::FAILURE
        }
    }
}

fn scenario(cli: &Cli) -> Result<Scenario> {
    let mut s = match &cli.config {
        Some(path) => load_scenario(path)?,
        None => default_scenario(),
    };
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn schemes(cli: &Cli) -> Vec<SchemeId> {
    cli.scheme.map_or_else(|| SchemeId::ALL.to_vec(), |s| vec![s])
}

fn write(table: &CsvTable, dir: &Path, name: &str) -> Result<()> {
    table.write(dir.join(name))?;
    println!("wrote {}", dir.join(name).display());
    Ok(())
}

fn write_svg(dir: &Path, name: &str, svg: String) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, svg).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    println!("wrote {}", path.display());
    Ok(())
}

fn solve(cli: &Cli, s: &Scenario) -> Result<Solution> {
    let scheme = cli.scheme.unwrap_or(SchemeId::Proposed);
    let sol = run_scheme(scheme, s)?;
    println!(
        "{scheme}: avg CRB {:e} rad^2 after {} iterations (converged: {})",
        sol.report.avg_crb, sol.iterations_used, sol.converged
    );
    Ok(sol)
}

fn execute(cli: &Cli) -> Result<ExitCode> {
    let dir = cli.out_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
    if let Command::Oracle = cli.command {
        let mut config = OracleConfig::default();
        if let Some(seed) = cli.seed {
            config.seed = seed;
        }
        let certs = run_certificates(&config)?;
        let report = format_report(&certs);
        print!("{report}");
        let path = dir.join("oracle.txt");
        fs::write(&path, &report).map_err(|e| Error::Io { path, source: e })?;
        return Ok(if certs.iter().all(|c| c.passed) { ExitCode::SUCCESS } else { ExitCode::from(3) });
    }

    let s = scenario(cli)?;
    match &cli.command {
        Command::Run => {
            let sol = solve(cli, &s)?;
            save_results(&sol, dir)?;
            println!("wrote results to {}", dir.display());
            if cli.plot {
                let trace = Series {
                    label: "avg CRB".into(),
                    points: sol.trace.iter().map(|r| (r.iteration as f64, r.avg_crb)).collect(),
                };
                write_svg(dir, "convergence.svg", line_chart("Convergence", "iteration", "avg CRB (rad^2)", &[trace], true))?;
                let path = Series {
                    label: "UAV".into(),
                    points: sol.path.points.iter().map(|p| (p[0], p[1])).collect(),
                };
                write_svg(dir, "path.svg", line_chart("Trajectory", "x (m)", "y (m)", &[path], false))?;
            }
        }
        Command::Convergence => {
            let table = exp_convergence(&s, &schemes(cli), &seed_list(s.seed, cli.seeds))?;
            write(&table, dir, "convergence.csv")?;
            if cli.plot {
                let first = s.seed.to_string();
                let series: Vec<Series> = schemes(cli)
                    .into_iter()
                    .map(|scheme| Series {
                        label: scheme.to_string(),
                        points: table
                            .rows
                            .iter()
                            .filter(|r| r[0] == scheme.name() && r[1] == first)
                            .map(|r| (r[2].parse().unwrap_or(f64::NAN), r[4].parse().unwrap_or(f64::NAN)))
                            .collect(),
                    })
                    .collect();
                let title = format!("Convergence (seed {first})");
                write_svg(dir, "convergence.svg", line_chart(&title, "iteration", "avg CRB (rad^2)", &series, true))?;
            }
        }
        Command::Beampattern { slot } => {
            let sol = solve(cli, &s)?;
            let bp = exp_beampattern(&sol, &s, *slot, BEAMPATTERN_POINTS)?;
            write(&bp.table(), dir, "beampattern.csv")?;
            write(&bp.target_table(), dir, "beampattern_targets.csv")?;
            if cli.plot {
                let series = [
                    Series { label: "gain".into(), points: bp.gains.clone() },
                    Series { label: "targets".into(), points: bp.targets.iter().map(|t| (t.1, t.2)).collect() },
                ];
                let title = format!("Beampattern at slot {slot}");
                write_svg(dir, "beampattern.svg", line_chart(&title, "theta (rad)", "gain (W)", &series, false))?;
            }
        }
        Command::TargetCrb { targets } => {
            let sol = solve(cli, &s)?;
            let table = exp_target_crb(&sol, targets)?;
            write(&table, dir, "target_crb.csv")?;
            if cli.plot {
                let series: Vec<Series> = targets
                    .iter()
                    .map(|&k| Series {
                        label: format!("target {k}"),
                        points: sol.report.per_slot_per_target.iter().enumerate().map(|(n, row)| ((n + 1) as f64, row[k - 1])).collect(),
                    })
                    .collect();
                write_svg(dir, "target_crb.svg", line_chart("Per-target CRB", "slot", "CRB (rad^2)", &series, true))?;
            }
        }
        Command::SweepPower { values } | Command::SweepRegion { values } | Command::SweepTargets { values } => {
            let variable = match cli.command {
                Command::SweepPower { .. } => SweepVariable::PowerDbm,
                Command::SweepRegion { .. } => SweepVariable::RegionWavelengths,
                _ => SweepVariable::Targets,
            };
            let mut spec = SweepSpec::new(variable, schemes(cli), seed_list(s.seed, cli.seeds));
            if let Some(v) = values {
                spec.values = v.clone();
            }
            let result = exp_sweep(&spec, &s)?;
            let stem = format!("sweep_{}", variable.column());
            write(&result.cell_table(), dir, &format!("{stem}_cells.csv"))?;
            write(&result.median_table(), dir, &format!("{stem}.csv"))?;
            if cli.plot {
                let series: Vec<Series> = spec
                    .schemes
                    .iter()
                    .map(|&scheme| Series { label: scheme.to_string(), points: result.curve(scheme) })
                    .collect();
                let svg = line_chart("Median average CRB", variable.column(), "avg CRB (rad^2)", &series, true);
                write_svg(dir, &format!("{stem}.svg"), svg)?;
            }
        }
        Command::Oracle => unreachable!("handled above"),
    }
    Ok(ExitCode::SUCCESS)
}
