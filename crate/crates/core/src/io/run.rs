//! Experiment drivers: single solve, scheme comparison and L-sweeps.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::baselines::{solve_hover_and_fly, solve_straight_flight};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::io::output::{fmt_sig, ResultBundle};
use crate::model::Scenario;
use crate::planner::{finalize_plan, min_completion_time, MissionPlan, Scheme};

/// Minimum-time plan for `scheme`.
pub fn solve_scheme(scenario: &Scenario, scheme: Scheme, config: &SolverConfig) -> Result<MissionPlan> {
    match scheme {
        Scheme::Proposed => min_completion_time(scenario, config),
        Scheme::Straight => solve_straight_flight(scenario, config),
        Scheme::HoverFly => solve_hover_and_fly(scenario, config),
    }
}

/// Solve once and package the result.
pub fn run_solve(scenario: &Scenario, scheme: Scheme, config: &SolverConfig) -> Result<ResultBundle> {
    let start = Instant::now();
    let plan = solve_scheme(scenario, scheme, config)?;
    Ok(ResultBundle { plan, task_bits: scenario.task_bits(), wall_time_s: start.elapsed().as_secs_f64() })
}

/// One `(L, scheme)` cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub l_bits: f64,
    pub scheme: Scheme,
    pub bundle: ResultBundle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Completion times of `scheme` in ascending-L order.
    pub fn times(&self, scheme: Scheme) -> Vec<f64> {
        self.rows.iter().filter(|r| r.scheme == scheme).map(|r| r.bundle.plan.completion_time).collect()
    }

    /// `l_bits,scheme,n_slots,t_s,achieved_bits` with one row per cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("l_bits,scheme,n_slots,t_s,achieved_bits\n");
        for r in &self.rows {
            let p = &r.bundle.plan;
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_sig(r.l_bits),
                r.scheme,
                p.n_slots,
                fmt_sig(p.completion_time),
                fmt_sig(p.achieved_bits)
            ));
        }
        out
    }
}

/// Solve every `(L, scheme)` pair. Cells run on worker threads and are
/// merged in `(L, scheme)` order, so the table does not depend on timing.
///
/// The true optimum is non-decreasing in `L`, since a plan for a larger task
/// also carries any smaller one. If the search returns a longer mission for a
/// smaller `L`, that cell is replaced by the larger task's plan scaled down
/// and a warning is attached.
pub fn run_sweep(scenario: &Scenario, l_values: &[f64], schemes: &[Scheme], config: &SolverConfig) -> Result<SweepTable> {
    if l_values.is_empty() || schemes.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one L value and one scheme".into()));
    }
    if l_values.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidInput("L values must be finite".into()));
    }
    if l_values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput("L values must be ascending".into()));
    }
    config.validate()?;

    let jobs: Vec<(usize, Scheme)> =
        (0..l_values.len()).flat_map(|i| schemes.iter().map(move |&s| (i, s))).collect();
    let results: Mutex<Vec<Option<Result<ResultBundle>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(i, scheme)) = jobs.get(j) else { break };
                let outcome = scenario.with_task_bits(l_values[i]).map_err(Error::from).and_then(|s| run_solve(&s, scheme, config));
                results.lock().expect("no worker panicked")[j] = Some(outcome);
            });
        }
    });

    let mut rows = Vec::with_capacity(jobs.len());
    for (&(i, scheme), outcome) in jobs.iter().zip(results.into_inner().expect("no worker panicked")) {
        let bundle = outcome.expect("every job ran")?;
        rows.push(SweepRow { l_bits: l_values[i], scheme, bundle });
    }

    for &scheme in schemes {
        let idx: Vec<usize> = (0..rows.len()).filter(|&r| rows[r].scheme == scheme).collect();
        for w in idx.windows(2).rev() {
            let (lo, hi) = (w[0], w[1]);
            if rows[lo].bundle.plan.n_slots <= rows[hi].bundle.plan.n_slots {
                continue;
            }
            let donor = rows[hi].bundle.plan.clone();
            let small = scenario.with_task_bits(rows[lo].l_bits)?;
            let mut diagnostics = donor.diagnostics.clone();
            diagnostics.warnings.push(format!(
                "search returned {} slots; reused the {} slot plan for L = {}",
                rows[lo].bundle.plan.n_slots, donor.n_slots, rows[hi].l_bits
            ));
            let plan = finalize_plan(&small, scheme, donor.trajectory, donor.allocation, donor.achieved_bits, diagnostics)?;
            log::warn!("{}", plan.diagnostics.warnings.last().expect("just pushed"));
            rows[lo].bundle.plan = plan;
        }
    }
    Ok(SweepTable { rows })
}
