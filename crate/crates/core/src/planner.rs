//! Mission-time minimization: bisection over the slot count, with each probe
//! answered by maximizing offloaded bits through alternating time-allocation
//! and trajectory updates.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::baselines::{open_path_order, split_hover_slots, tsp_visit_order, HoverFlyPath};
use crate::config::SolverConfig;
use crate::error::{Error, ModelError, Result};
use crate::lp::{solve_time_allocation, AllocationResult};
use crate::model::{bits_per_gbs, Point, Scenario, TimeAllocation, Trajectory};
use crate::sca::optimize_trajectory;

/// Which design produced a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Proposed,
    Straight,
    HoverFly,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Proposed, Scheme::Straight, Scheme::HoverFly];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Straight => "straight",
            Scheme::HoverFly => "hover-fly",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "proposed" => Ok(Scheme::Proposed),
            "straight" => Ok(Scheme::Straight),
            "hover-fly" | "hover_fly" | "hoverfly" => Ok(Scheme::HoverFly),
            other => Err(format!("unknown scheme `{other}` (expected proposed, straight or hover-fly)")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlanDiagnostics {
    /// Achieved bits after each alternation round at the returned slot count.
    pub outer_trace: Vec<f64>,
    /// Exact-rate SCA objective traces, one per alternation round.
    pub sca_traces: Vec<Vec<f64>>,
    /// Total SCA iterations at the returned slot count.
    pub sca_iterations: usize,
    /// Every probed slot count with its feasibility verdict, in probe order.
    pub bisection: Vec<(usize, bool)>,
    pub warnings: Vec<String>,
}

/// A complete, validated solution.
#[derive(Debug, Clone, PartialEq)]
pub struct MissionPlan {
    pub scheme: Scheme,
    pub n_slots: usize,
    /// `N·δ_t` (s).
    pub completion_time: f64,
    pub trajectory: Trajectory,
    pub allocation: TimeAllocation,
    pub achieved_bits: f64,
    /// Exact-rate bits delivered to each GBS.
    pub bits_per_gbs: Vec<f64>,
    pub diagnostics: PlanDiagnostics,
}

/// `ceil(x)` that ignores floating-point noise just above an integer.
pub(crate) fn ceil_tol(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Fewest slots that can cover the chord at full speed.
pub fn travel_bound(scenario: &Scenario) -> usize {
    ceil_tol(scenario.chord_length() / scenario.s_max())
}

/// Uniform subdivision of the chord into `n_slots` steps.
pub fn straight_trajectory(scenario: &Scenario, n_slots: usize) -> Result<Trajectory, ModelError> {
    let (ui, uf) = (scenario.u_init(), scenario.u_final());
    let distance = scenario.chord_length();
    if n_slots == 0 || n_slots < travel_bound(scenario) {
        return Err(ModelError::TooFewSlots { slots: n_slots, distance, step: scenario.s_max() });
    }
    let mut positions: Vec<Point> = (0..=n_slots).map(|n| ui + (uf - ui) * (n as f64 / n_slots as f64)).collect();
    positions[0] = ui;
    positions[n_slots] = uf;
    Trajectory::new(positions)
}

/// Slot count below which no scheme can succeed: travel distance, aggregate
/// execution capacity (the last slot never executes anything), and 1.
pub fn n_lower_bound(scenario: &Scenario) -> usize {
    let capacity = if scenario.task_bits() > 0.0 {
        1 + ceil_tol(scenario.task_bits() / scenario.aggregate_bits_per_slot())
    } else {
        1
    };
    travel_bound(scenario).max(capacity).max(1)
}

/// Output of the alternating bit maximization for a fixed slot count.
#[derive(Debug, Clone, PartialEq)]
pub struct BitsMaximization {
    pub trajectory: Trajectory,
    pub allocation: TimeAllocation,
    pub achieved_bits: f64,
    /// Achieved bits after each time-allocation solve; non-decreasing.
    pub trace: Vec<f64>,
    pub sca_traces: Vec<Vec<f64>>,
    pub sca_iterations: usize,
    pub warnings: Vec<String>,
}

/// Maximize offloaded bits with `n_slots` slots, starting from straight flight.
pub fn maximize_bits(scenario: &Scenario, n_slots: usize, config: &SolverConfig) -> Result<BitsMaximization> {
    let init = straight_trajectory(scenario, n_slots)?;
    maximize_bits_from(scenario, &init, config, None)
}

/// Alternate time allocation and trajectory optimization from `init`.
/// With `target` set, stop as soon as the achieved bits reach it.
pub fn maximize_bits_from(
    scenario: &Scenario,
    init: &Trajectory,
    config: &SolverConfig,
    target: Option<f64>,
) -> Result<BitsMaximization> {
    let mut traj = init.clone();
    let mut best: AllocationResult = solve_time_allocation(scenario, &traj)?;
    let mut trace = vec![best.achieved_bits];
    let mut sca_traces = Vec::new();
    let mut sca_iterations = 0;
    let mut warnings = Vec::new();
    let reached = |bits: f64| target.is_some_and(|t| bits >= t);

    for _ in 0..config.alt_max_iters {
        if best.allocation.is_zero() || reached(best.achieved_bits) {
            break;
        }
        let sca = optimize_trajectory(scenario, &best.allocation, &traj, config);
        sca_iterations += sca.diagnostics.iterations;
        sca_traces.push(sca.diagnostics.objective.clone());
        if let Some(e) = &sca.failure {
            warnings.push(format!("trajectory update stopped early: {e}"));
        }
        if sca.trajectory == traj {
            break;
        }
        let next = solve_time_allocation(scenario, &sca.trajectory)?;
        if next.achieved_bits < best.achieved_bits {
            break;
        }
        let improvement = (next.achieved_bits - best.achieved_bits) / best.achieved_bits.max(1.0);
        traj = sca.trajectory;
        best = next;
        trace.push(best.achieved_bits);
        if improvement < config.alt_tol || sca.failure.is_some() {
            break;
        }
    }

    Ok(BitsMaximization {
        trajectory: traj,
        allocation: best.allocation,
        achieved_bits: best.achieved_bits,
        trace,
        sca_traces,
        sca_iterations,
        warnings,
    })
}

/// Whether `achieved` bits cover the task within the configured relative tolerance.
pub fn covers_task(achieved: f64, task_bits: f64, config: &SolverConfig) -> bool {
    achieved >= task_bits * (1.0 - config.feasibility_tol)
}

/// Turn a maximization result into a plan whose ledger sums to the task size.
pub(crate) fn finalize_plan(
    scenario: &Scenario,
    scheme: Scheme,
    trajectory: Trajectory,
    mut allocation: TimeAllocation,
    achieved_bits: f64,
    diagnostics: PlanDiagnostics,
) -> Result<MissionPlan> {
    let task = scenario.task_bits();
    if task == 0.0 {
        allocation.scale(0.0);
    } else if achieved_bits > 0.0 && achieved_bits != task {
        allocation.scale(task / achieved_bits);
    }
    let ledger = bits_per_gbs(&trajectory, &allocation, scenario)?;
    let n_slots = trajectory.n_slots();
    Ok(MissionPlan {
        scheme,
        n_slots,
        completion_time: n_slots as f64 * scenario.slot_len(),
        achieved_bits: ledger.iter().sum(),
        bits_per_gbs: ledger,
        trajectory,
        allocation,
        diagnostics,
    })
}

/// Outcome of a feasibility probe at a fixed slot count.
#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    /// Best bits found (before rescaling); zero when short-circuited.
    pub achieved_bits: f64,
    pub plan: Option<MissionPlan>,
}

impl Feasibility {
    fn infeasible(achieved_bits: f64) -> Self {
        Self { feasible: false, achieved_bits, plan: None }
    }
}

/// Largest GBS count for which every proper subset gets its own tour start.
const SUBSET_STARTS_MAX_GBS: usize = 6;
/// Alternations run per probe, best starting point first.
const ALTERNATION_STARTS: usize = 3;

/// Starting trajectories for the alternating maximization: straight flight,
/// hover-and-fly over every GBS, and tours over subsets of the GBSs with the
/// spare slots shared equally among the visited ones.
pub(crate) struct Starts {
    tour: Option<HoverFlyPath>,
    partial: Vec<HoverFlyPath>,
}

impl Starts {
    pub(crate) fn new(scenario: &Scenario) -> Self {
        let tour = match tsp_visit_order(scenario) {
            Ok(order) => Some(HoverFlyPath::new(scenario, order.order)),
            Err(e) => {
                log::debug!("no hover-and-fly start: {e}");
                None
            }
        };
        let k = scenario.num_gbs();
        let mut partial = Vec::new();
        if k <= SUBSET_STARTS_MAX_GBS {
            for mask in 1..(1usize << k) - 1 {
                let members: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
                let nodes: Vec<Point> = members.iter().map(|&i| scenario.gbs()[i].position).collect();
                let order = open_path_order(scenario.u_init(), scenario.u_final(), &nodes).expect("small subset");
                partial.push(HoverFlyPath::new(scenario, order.order.iter().map(|&i| members[i]).collect()));
            }
        } else {
            partial.extend((0..k).map(|i| HoverFlyPath::new(scenario, vec![i])));
        }
        Self { tour, partial }
    }

    fn trajectories(&self, scenario: &Scenario, n_slots: usize) -> Result<Vec<Trajectory>> {
        let mut starts = vec![straight_trajectory(scenario, n_slots)?];
        if let Some(path) = self.tour.as_ref().filter(|p| p.flight_slots() <= n_slots) {
            let split = split_hover_slots(scenario, path, n_slots - path.flight_slots(), Some(scenario.task_bits()))?;
            starts.push(path.trajectory(scenario, &split.hovers));
        }
        for path in self.partial.iter().filter(|p| p.flight_slots() <= n_slots) {
            let spare = n_slots - path.flight_slots();
            let m = path.order.len();
            let hovers: Vec<usize> = (0..m).map(|i| spare / m + usize::from(i < spare % m)).collect();
            starts.push(path.trajectory(scenario, &hovers));
        }
        Ok(starts)
    }
}

/// Decide whether `n_slots` slots suffice for the scenario's task.
pub fn check_feasibility(scenario: &Scenario, n_slots: usize, config: &SolverConfig) -> Result<Feasibility> {
    probe_feasibility(scenario, n_slots, config, &Starts::new(scenario))
}

fn probe_feasibility(scenario: &Scenario, n_slots: usize, config: &SolverConfig, starts: &Starts) -> Result<Feasibility> {
    if n_slots < n_lower_bound(scenario) {
        return Ok(Feasibility::infeasible(0.0));
    }
    let task = scenario.task_bits();
    // No slot but the last carries more than δ·R_max, whatever the trajectory.
    let tdma_cap = (n_slots - 1) as f64 * scenario.slot_len() * scenario.overhead_rate();
    if !covers_task(tdma_cap, task, config) {
        return Ok(Feasibility::infeasible(0.0));
    }
    let mut ranked = starts
        .trajectories(scenario, n_slots)?
        .into_iter()
        .map(|t| Ok((solve_time_allocation(scenario, &t)?.achieved_bits, t)))
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut best: Option<BitsMaximization> = None;
    for (_, init) in ranked.into_iter().take(ALTERNATION_STARTS) {
        let out = maximize_bits_from(scenario, &init, config, Some(task))?;
        if best.as_ref().is_none_or(|b| out.achieved_bits > b.achieved_bits) {
            best = Some(out);
        }
        if best.as_ref().is_some_and(|b| covers_task(b.achieved_bits, task, config)) {
            break;
        }
    }
    let out = best.expect("at least the straight start");
    if !covers_task(out.achieved_bits, task, config) {
        return Ok(Feasibility::infeasible(out.achieved_bits));
    }
    let diagnostics = PlanDiagnostics {
        outer_trace: out.trace,
        sca_traces: out.sca_traces,
        sca_iterations: out.sca_iterations,
        bisection: Vec::new(),
        warnings: out.warnings,
    };
    let plan = finalize_plan(scenario, Scheme::Proposed, out.trajectory, out.allocation, out.achieved_bits, diagnostics)?;
    Ok(Feasibility { feasible: true, achieved_bits: out.achieved_bits, plan: Some(plan) })
}

/// Smallest slot count accepted by `probe`, searched by doubling from `lower`
/// and then bisecting. A final downward scan guards against a predicate that
/// is not monotone in practice.
pub(crate) fn search_min_slots(
    lower: usize,
    config: &SolverConfig,
    mut probe: impl FnMut(usize) -> Result<Option<MissionPlan>>,
) -> Result<MissionPlan> {
    let mut cache: BTreeMap<usize, Option<MissionPlan>> = BTreeMap::new();
    let mut order = Vec::new();
    let mut eval = |n: usize, cache: &mut BTreeMap<usize, Option<MissionPlan>>| -> Result<bool> {
        if let Some(v) = cache.get(&n) {
            return Ok(v.is_some());
        }
        let r = probe(n)?;
        let ok = r.is_some();
        order.push((n, ok));
        cache.insert(n, r);
        Ok(ok)
    };

    let lower = lower.max(1);
    if lower > config.max_slots {
        return Err(Error::NoFeasibleSlotCount(config.max_slots));
    }
    let (mut lo, mut hi);
    if eval(lower, &mut cache)? {
        hi = lower;
        lo = lower - 1;
    } else {
        lo = lower;
        hi = lower;
        loop {
            let next = ((hi as f64 * config.growth_factor).ceil() as usize).max(hi + 1).min(config.max_slots);
            if next == hi {
                return Err(Error::NoFeasibleSlotCount(config.max_slots));
            }
            if eval(next, &mut cache)? {
                hi = next;
                break;
            }
            lo = next;
            hi = next;
        }
    }
    // Invariant: lo infeasible (or below the bound), hi feasible.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if eval(mid, &mut cache)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let mut warnings = Vec::new();
    let mut best = hi;
    while best > lower && eval(best - 1, &mut cache)? {
        warnings.push(format!("feasibility not monotone: {} feasible although a larger count failed", best - 1));
        best -= 1;
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    let mut plan = cache.remove(&best).flatten().expect("feasible probe stored a plan");
    plan.diagnostics.bisection = order;
    plan.diagnostics.warnings.extend(warnings);
    Ok(plan)
}

/// Minimum mission time for the proposed joint design.
pub fn min_completion_time(scenario: &Scenario, config: &SolverConfig) -> Result<MissionPlan> {
    config.validate()?;
    let starts = Starts::new(scenario);
    search_min_slots(n_lower_bound(scenario), config, |n| Ok(probe_feasibility(scenario, n, config, &starts)?.plan))
}
