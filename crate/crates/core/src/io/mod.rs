//! Scenario ingestion, experiment drivers and result emission.

mod output;
mod run;
mod scenario;

pub use output::{fmt_sig, parse_trajectory_csv, table_tolerance, write_atomic, ResultBundle, Summary};
pub use run::{run_solve, run_sweep, solve_scheme, SweepRow, SweepTable};
pub use scenario::{load_scenario, parse_scenario, GbsSection, RadioSection, ScenarioFile, TaskSection, UavSection};
