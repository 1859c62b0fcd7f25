use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uavmec::io::{load_scenario, parse_trajectory_csv, run_solve, run_sweep, table_tolerance, write_atomic, SweepTable};
use uavmec::model::validate_solution_with;
use uavmec::planner::n_lower_bound;
use uavmec::{Error, Scenario, Scheme, SolverConfig};

#[derive(Parser)]
#[command(name = "uavmec", version, about = "Minimum mission time for UAV computation offloading")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario with one scheme.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "proposed")]
        scheme: Scheme,
        /// Override the task size from the scenario file.
        #[arg(long)]
        l_bits: Option<f64>,
    },
    /// Minimum mission time against task size for several schemes.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated task sizes in ascending order.
        #[arg(long, value_delimiter = ',', required = true)]
        l_bits: Vec<f64>,
        /// Schemes to run (repeatable); all three by default.
        #[arg(long)]
        scheme: Vec<Scheme>,
    },
    /// Run all three schemes on one scenario.
    BaselineCompare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        l_bits: Option<f64>,
    },
    /// Check a scenario file and, optionally, a solution table against it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        /// `trajectory.csv` written by `solve`.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for result files; results go to stdout only when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    sca_max_iters: Option<usize>,
    /// Relative stopping tolerance of the trajectory and alternation loops.
    #[arg(long)]
    tol: Option<f64>,
    /// Log per-iteration objective and constraint violation to stderr.
    #[arg(long)]
    trace: bool,
}

impl Common {
    fn config(&self) -> SolverConfig {
        let mut config = SolverConfig { trace: self.trace, ..SolverConfig::default() };
        if let Some(n) = self.sca_max_iters {
            config.sca_max_iters = n;
        }
        if let Some(tol) = self.tol {
            config.sca_tol = tol;
            config.alt_tol = tol;
        }
        config
    }
}

fn scenario_with(path: &Path, l_bits: Option<f64>) -> Result<Scenario, Error> {
    let scenario = load_scenario(path)?;
    match l_bits {
        Some(l) => Ok(scenario.with_task_bits(l)?),
        None => Ok(scenario),
    }
}

fn emit_table(table: &SweepTable, scenario: &Scenario, out: Option<&Path>, name: &str) -> Result<(), Error> {
    let csv = table.to_csv();
    print!("{csv}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_atomic(&dir.join(name), &csv)?;
        for row in &table.rows {
            let sub = dir.join(format!("{}_{}", row.scheme, uavmec::io::fmt_sig(row.l_bits)));
            row.bundle.write_to(&scenario.with_task_bits(row.l_bits)?, &sub)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Solve { common, scheme, l_bits } => {
            let scenario = scenario_with(&common.scenario, l_bits)?;
            let bundle = run_solve(&scenario, scheme, &common.config())?;
            print!("{}", bundle.summary_toml());
            if let Some(dir) = &common.out {
                bundle.write_to(&scenario, dir)?;
            }
        }
        Command::Sweep { common, l_bits, scheme } => {
            let scenario = load_scenario(&common.scenario)?;
            let schemes = if scheme.is_empty() { Scheme::ALL.to_vec() } else { scheme };
            let table = run_sweep(&scenario, &l_bits, &schemes, &common.config())?;
            emit_table(&table, &scenario, common.out.as_deref(), "sweep.csv")?;
        }
        Command::BaselineCompare { common, l_bits } => {
            let scenario = scenario_with(&common.scenario, l_bits)?;
            let table = run_sweep(&scenario, &[scenario.task_bits()], &Scheme::ALL, &common.config())?;
            emit_table(&table, &scenario, common.out.as_deref(), "compare.csv")?;
        }
        Command::Validate { scenario, plan } => {
            let scenario = load_scenario(&scenario)?;
            println!(
                "scenario ok: {} GBS, rho = {}, lower bound {} slots",
                scenario.num_gbs(),
                uavmec::io::fmt_sig(scenario.rho()),
                n_lower_bound(&scenario)
            );
            if let Some(path) = plan {
                let text = std::fs::read_to_string(&path)?;
                let (trajectory, allocation) = parse_trajectory_csv(&text, scenario.num_gbs())?;
                let tol = table_tolerance(&trajectory);
                let report =
                    validate_solution_with(&trajectory, &allocation, &scenario, scenario.task_bits(), tol);
                if !report.feasible {
                    let list = report.violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
                    return Err(Error::InvalidInput(format!("plan violates constraints: {list}")));
                }
                println!("plan ok: {} slots, {} bits", trajectory.n_slots(), report.total_bits);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let trace = match &cli.command {
        Command::Solve { common, .. } | Command::Sweep { common, .. } | Command::BaselineCompare { common, .. } => {
            common.trace
        }
        Command::Validate { .. } => false,
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if trace { "info" } else { "warn" }))
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
