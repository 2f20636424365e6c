//! Command-line driver: single runs, simplex sweeps, existence checks, and
//! the price-taking comparison, all writing plot-ready flat files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use edgeworth::compare::walras_compare;
use edgeworth::dynamics::multilateral_fair_solver;
use edgeworth::export;
use edgeworth::integrate::{integrate_to_equilibrium, run_invariant_report};
use edgeworth::scenario::{self, Scenario};
use edgeworth::sweep::run_sweep;
use edgeworth::Error;

/// Exit codes: 0 success, 2 validation, 3 integration failure,
/// 4 partial sweep.
const EXIT_VALIDATION: u8 = 2;
const EXIT_INTEGRATION: u8 = 3;
const EXIT_PARTIAL_SWEEP: u8 = 4;

#[derive(Parser)]
#[command(
    name = "edgeworth",
    about = "Fair-trading barter dynamics on weighted networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file path, or the name of a bundled scenario.
    #[arg(long)]
    scenario: String,
    /// Comma-separated integrator overrides, e.g.
    /// `stop_field_norm=1e-9,max_steps=500000`.
    #[arg(long, value_name = "key=val,...")]
    tolerance_overrides: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario to its equilibrium and write the run files.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Record every STRIDE-th accepted step.
        #[arg(long, default_value_t = 1)]
        stride: u64,
    },
    /// Integrate every network on a simplex grid and write the map dataset.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Simplex grid resolution (subdivisions per edge).
        #[arg(long)]
        resolution: u32,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Report whether a multilateral fair trade exists for a gradient set.
    Existence {
        /// TOML file with `mu = [[...], ...]`, one row per agent.
        gradients: PathBuf,
    },
    /// Compare the fair path with the price-taking equilibrium (2 agents).
    WalrasCompare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Record every STRIDE-th accepted step of the fair path.
        #[arg(long, default_value_t = 1)]
        stride: u64,
    },
    /// Inspect the bundled scenario library.
    Scenarios {
        #[command(subcommand)]
        command: ScenariosCommand,
    },
}

#[derive(Subcommand)]
enum ScenariosCommand {
    /// List bundled scenarios with their descriptions.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify(&e))
        }
    }
}

fn classify(e: &Error) -> u8 {
    match e {
        Error::Integration(_) => EXIT_INTEGRATION,
        _ => EXIT_VALIDATION,
    }
}

fn load_scenario(args: &ScenarioArgs) -> Result<Scenario, Error> {
    let mut scenario = scenario::resolve(&args.scenario)?;
    if let Some(overrides) = &args.tolerance_overrides {
        for pair in overrides.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = pair.split_once('=').ok_or_else(|| {
                Error::Validation(format!("override `{pair}` is not of the form key=value"))
            })?;
            scenario
                .integrator
                .apply_override(key.trim(), value.trim())?;
        }
        if !scenario
            .endowments
            .is_interior(scenario.integrator.boundary_floor)
        {
            return Err(Error::Boundary(
                "endowments are not interior to the overridden boundary floor".into(),
            ));
        }
    }
    Ok(scenario)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Simulate {
            scenario,
            out,
            stride,
        } => {
            let scenario = load_scenario(&scenario)?;
            let (trajectory, record) = integrate_to_equilibrium(&scenario, stride)?;
            let invariants = run_invariant_report(&trajectory);

            export::write_artifact(&out, "trajectory.csv", &export::trajectory_csv(&trajectory))?;
            export::write_artifact(
                &out,
                "record.json",
                &export::json_to_string(&export::record_json(&record)),
            )?;
            export::write_artifact(
                &out,
                "invariants.json",
                &export::json_to_string(&export::invariants_json(&invariants)),
            )?;

            println!(
                "{}: status={} steps={} time={} mrs_residual={:e}",
                scenario.name,
                record.status,
                record.steps,
                record.elapsed_time,
                record.mrs_residual
            );
            for (label, gain) in scenario.labels.iter().zip(&record.utility_gains) {
                println!("  {label}: gain {gain}");
            }
            if record.status.is_success() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_INTEGRATION))
            }
        }
        Command::Sweep {
            scenario,
            resolution,
            out,
            workers,
        } => {
            let scenario = load_scenario(&scenario)?;
            let dataset = run_sweep(&scenario, resolution, workers)?;
            export::write_artifact(&out, "manifold.csv", &export::manifold_csv(&dataset))?;
            export::write_artifact(
                &out,
                "summary.json",
                &export::json_to_string(&export::sweep_summary_json(&dataset)),
            )?;
            println!(
                "{}: {} grid points at resolution {}, {} converged, vertex dominance {}",
                scenario.name,
                dataset.points.len(),
                resolution,
                dataset.points.len() - dataset.non_converged.len(),
                if dataset.vertex_dominance_holds() {
                    "holds"
                } else {
                    "fails"
                },
            );
            if dataset.all_converged() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "warning: {} grid points did not converge: {:?}",
                    dataset.non_converged.len(),
                    dataset.non_converged
                );
                Ok(ExitCode::from(EXIT_PARTIAL_SWEEP))
            }
        }
        Command::Existence { gradients } => {
            let matrix = scenario::load_gradient_file(&gradients)?;
            let solution = multilateral_fair_solver(&matrix)?;
            println!(
                "agents={} goods={} nullspace_dimension={} trade_exists={}",
                matrix.agents(),
                matrix.goods(),
                solution.nullspace_dimension,
                solution.trade_exists
            );
            for (i, basis) in solution.agent_bases.iter().enumerate() {
                println!("  agent {} feasible directions: {}", i + 1, basis.ncols());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::WalrasCompare {
            scenario,
            out,
            stride,
        } => {
            let scenario = load_scenario(&scenario)?;
            let comparison = walras_compare(&scenario, stride)?;
            export::write_artifact(
                &out,
                "fair_trajectory.csv",
                &export::trajectory_csv(&comparison.fair_trajectory),
            )?;
            export::write_artifact(
                &out,
                "walras_path.csv",
                &export::walras_path_csv(&comparison),
            )?;
            export::write_artifact(
                &out,
                "compare_summary.json",
                &export::json_to_string(&export::compare_summary_json(&comparison)),
            )?;
            println!(
                "{}: price_ratio={} equilibrium_distance={} mean_fair_slope={} equal_gains={}",
                scenario.name,
                comparison.walras.price_ratio,
                comparison.equilibrium_distance,
                comparison.mean_fair_slope,
                if comparison.equal_gains.passes {
                    "pass"
                } else {
                    "fail"
                },
            );
            if comparison.fair_record.status.is_success() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_INTEGRATION))
            }
        }
        Command::Scenarios {
            command: ScenariosCommand::List,
        } => {
            for (name, _) in scenario::bundled() {
                let s = scenario::load_bundled(name)?;
                println!(
                    "{name}: {} agents, {} goods — {}",
                    s.agent_count(),
                    s.good_count(),
                    s.description.lines().next().unwrap_or("")
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
