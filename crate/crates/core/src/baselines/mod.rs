//! Reference designs: straight flight with optimized time allocation, and
//! successive hover-and-fly along the shortest visiting path.

mod tsp;

pub use tsp::{open_path_order, path_length, tsp_visit_order, VisitOrder, MAX_EXACT_NODES};

use crate::config::SolverConfig;
use crate::error::Result;
use crate::lp::solve_time_allocation;
use crate::model::{Point, Scenario, Trajectory};
use crate::planner::{
    ceil_tol, covers_task, finalize_plan, n_lower_bound, search_min_slots, straight_trajectory, MissionPlan,
    PlanDiagnostics, Scheme,
};

/// Straight flight at constant speed; only the time allocation is optimized.
pub fn solve_straight_flight(scenario: &Scenario, config: &SolverConfig) -> Result<MissionPlan> {
    config.validate()?;
    search_min_slots(n_lower_bound(scenario), config, |n| {
        let traj = straight_trajectory(scenario, n)?;
        let alloc = solve_time_allocation(scenario, &traj)?;
        if !covers_task(alloc.achieved_bits, scenario.task_bits(), config) {
            return Ok(None);
        }
        let diagnostics = PlanDiagnostics { outer_trace: vec![alloc.achieved_bits], ..Default::default() };
        Ok(Some(finalize_plan(scenario, Scheme::Straight, traj, alloc.allocation, alloc.achieved_bits, diagnostics)?))
    })
}

/// Full-speed flight along `u_I → ν_order… → u_F`, sampled once per slot,
/// with the places where hover slots over each GBS get inserted.
#[derive(Debug, Clone, PartialEq)]
pub struct HoverFlyPath {
    pub order: Vec<usize>,
    /// Flight samples `p_0 = u_I, …, p_M = u_F`, spaced `S_max` apart in arc length.
    pub samples: Vec<Point>,
    /// For each entry of `order`, the sample index after which its hover slots go.
    pub insert_after: Vec<usize>,
    pub path_length: f64,
}

impl HoverFlyPath {
    pub fn new(scenario: &Scenario, order: Vec<usize>) -> Self {
        let step = scenario.s_max();
        let mut waypoints = vec![scenario.u_init()];
        waypoints.extend(order.iter().map(|&k| scenario.gbs()[k].position));
        waypoints.push(scenario.u_final());

        let mut cumulative = vec![0.0];
        for w in waypoints.windows(2) {
            cumulative.push(cumulative.last().unwrap() + (w[1] - w[0]).norm());
        }
        let total = *cumulative.last().unwrap();
        let flight_slots = ceil_tol(total / step).max(1);

        let at_arc = |s: f64| -> Point {
            let seg = cumulative.partition_point(|&c| c <= s).clamp(1, waypoints.len() - 1);
            let (a, b) = (waypoints[seg - 1], waypoints[seg]);
            let len = cumulative[seg] - cumulative[seg - 1];
            if len <= 0.0 {
                b
            } else {
                a + (b - a) * ((s - cumulative[seg - 1]) / len).clamp(0.0, 1.0)
            }
        };
        let mut samples: Vec<Point> = (0..=flight_slots).map(|n| at_arc((n as f64 * step).min(total))).collect();
        samples[0] = scenario.u_init();
        samples[flight_slots] = scenario.u_final();

        let insert_after = cumulative[1..=order.len()]
            .iter()
            .map(|&s| ((s / step + 1e-9).floor() as usize).min(flight_slots - 1))
            .collect();
        Self { order, samples, insert_after, path_length: total }
    }

    /// Slots spent flying.
    pub fn flight_slots(&self) -> usize {
        self.samples.len() - 1
    }

    /// Trajectory with `hovers[i]` slots spent over GBS `order[i]`.
    pub fn trajectory(&self, scenario: &Scenario, hovers: &[usize]) -> Trajectory {
        let total: usize = hovers.iter().sum();
        let mut positions = Vec::with_capacity(self.samples.len() + total);
        let mut next = 0;
        for (i, p) in self.samples.iter().enumerate() {
            positions.push(*p);
            while next < self.order.len() && self.insert_after[next] == i {
                let at = scenario.gbs()[self.order[next]].position;
                positions.extend(std::iter::repeat_n(at, hovers[next]));
                next += 1;
            }
        }
        Trajectory::new(positions).expect("path has at least two samples")
    }
}

/// Best hover split found for a fixed total of hover slots.
#[derive(Debug, Clone, PartialEq)]
pub struct HoverSplit {
    pub hovers: Vec<usize>,
    pub achieved_bits: f64,
}

/// Distribute `hover_slots` among the GBSs to maximize offloaded bits:
/// greedy chunked assignment followed by single-slot moves. Stops as soon as
/// `target` bits are reached. All `hover_slots` are always assigned.
pub fn split_hover_slots(
    scenario: &Scenario,
    path: &HoverFlyPath,
    hover_slots: usize,
    target: Option<f64>,
) -> Result<HoverSplit> {
    let k = path.order.len();
    let evaluate = |h: &[usize]| -> Result<f64> {
        Ok(solve_time_allocation(scenario, &path.trajectory(scenario, h))?.achieved_bits)
    };
    let reached = |bits: f64| target.is_some_and(|t| bits >= t);
    let mut hovers = vec![0; k];
    if k == 0 {
        let achieved_bits = evaluate(&hovers)?;
        return Ok(HoverSplit { hovers, achieved_bits });
    }
    hovers[0] = hover_slots;
    let padded = evaluate(&hovers)?;
    hovers[0] = 0;
    let mut value = evaluate(&hovers)?;
    if hover_slots == 0 || reached(padded) {
        hovers[0] = hover_slots;
        return Ok(HoverSplit { hovers, achieved_bits: padded });
    }

    let mut remaining = hover_slots;
    while remaining > 0 {
        let chunk = (remaining / (2 * k)).max(1);
        let mut best: Option<(usize, f64)> = None;
        for i in 0..k {
            hovers[i] += chunk;
            let v = evaluate(&hovers)?;
            hovers[i] -= chunk;
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        let (i, v) = best.expect("at least one GBS");
        hovers[i] += chunk;
        remaining -= chunk;
        value = v;
        if reached(value) {
            // Extra slots never lower the optimum, so park the rest where the
            // last chunk went and keep the slot count exact.
            hovers[i] += remaining;
            let achieved_bits = evaluate(&hovers)?;
            return Ok(HoverSplit { hovers, achieved_bits });
        }
    }

    for _ in 0..4 * k {
        let mut best: Option<(usize, usize, f64)> = None;
        for from in 0..k {
            if hovers[from] == 0 {
                continue;
            }
            for to in (0..k).filter(|&j| j != from) {
                hovers[from] -= 1;
                hovers[to] += 1;
                let v = evaluate(&hovers)?;
                hovers[to] -= 1;
                hovers[from] += 1;
                if v > best.map_or(value, |b| b.2) {
                    best = Some((from, to, v));
                }
            }
        }
        let Some((from, to, v)) = best else { break };
        hovers[from] -= 1;
        hovers[to] += 1;
        value = v;
        if reached(value) {
            break;
        }
    }
    Ok(HoverSplit { hovers, achieved_bits: value })
}

/// Hover over each GBS in shortest-path order, flying at full speed between them.
pub fn solve_hover_and_fly(scenario: &Scenario, config: &SolverConfig) -> Result<MissionPlan> {
    config.validate()?;
    let order = tsp_visit_order(scenario)?;
    let path = HoverFlyPath::new(scenario, order.order);
    let lower = n_lower_bound(scenario).max(path.flight_slots());
    let task = scenario.task_bits();
    search_min_slots(lower, config, |n| {
        let split = split_hover_slots(scenario, &path, n - path.flight_slots(), Some(task))?;
        if !covers_task(split.achieved_bits, task, config) {
            return Ok(None);
        }
        let traj = path.trajectory(scenario, &split.hovers);
        let alloc = solve_time_allocation(scenario, &traj)?;
        let diagnostics = PlanDiagnostics { outer_trace: vec![alloc.achieved_bits], ..Default::default() };
        Ok(Some(finalize_plan(scenario, Scheme::HoverFly, traj, alloc.allocation, alloc.achieved_bits, diagnostics)?))
    })
}
