//! Time allocation under a fixed trajectory.
//!
//! Variables are `τ_k[n]` for slots `1..N-1`; the last slot carries no
//! offloading because nothing sent there could be executed in time, so it is
//! eliminated up front. Rates enter in Mbit/s and capacities in Mbit.

use crate::config::BITS_SCALE;
use crate::error::{Error, ModelError, Result};
use crate::lp::simplex::{LinearProgram, LpStatus, Sense};
use crate::model::{total_offloaded_bits, Scenario, TimeAllocation, Trajectory};

/// Relative slack allowed when checking the LP optimum against the closed-form bounds.
const BOUND_CHECK_REL: f64 = 1e-7;

/// Optimal allocation for a fixed trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub allocation: TimeAllocation,
    /// Bits offloaded under `allocation`, evaluated with the exact rate.
    pub achieved_bits: f64,
    /// LP optimum (bits).
    pub lp_objective: f64,
    pub pivots: usize,
}

/// Per-slot rate matrix `rates[n-1][k]` (bits/s) for slots `1..=N`.
pub fn rate_table(scenario: &Scenario, traj: &Trajectory) -> Vec<Vec<f64>> {
    traj.positions()[1..]
        .iter()
        .map(|u| (0..scenario.num_gbs()).map(|k| scenario.rate(u, k)).collect())
        .collect()
}

/// Upper bound from the aggregate execution capacity: `Σ_k (N−1)·f_k·δ_t/c_k`.
pub fn capacity_bound(scenario: &Scenario, n_slots: usize) -> f64 {
    n_slots.saturating_sub(1) as f64 * scenario.aggregate_bits_per_slot()
}

/// Upper bound from TDMA: `δ_t·Σ_{n<N} max_k R_k(u[n])`.
pub fn tdma_bound(scenario: &Scenario, traj: &Trajectory) -> f64 {
    let rates = rate_table(scenario, traj);
    let n_slots = traj.n_slots();
    rates[..n_slots - 1].iter().map(|r| r.iter().cloned().fold(0.0, f64::max)).sum::<f64>() * scenario.slot_len()
}

/// Build the allocation LP for an explicit rate table (bits/s, one row per slot `1..=N`).
pub fn allocation_program(scenario: &Scenario, rates: &[Vec<f64>]) -> LinearProgram {
    let n_slots = rates.len();
    let k_gbs = scenario.num_gbs();
    let usable = n_slots.saturating_sub(1);
    let var = |n: usize, k: usize| (n - 1) * k_gbs + k;
    let dt = scenario.slot_len();

    let objective = (1..=usable)
        .flat_map(|n| (0..k_gbs).map(move |k| (n, k)))
        .map(|(n, k)| rates[n - 1][k] / BITS_SCALE)
        .collect();
    let mut lp = LinearProgram::maximize(objective);

    for n in 1..=usable {
        let row = (0..k_gbs).map(|k| (var(n, k), 1.0)).collect();
        lp.add_sparse_constraint(row, Sense::Le, dt).expect("indices in range");
    }
    for (k, g) in scenario.gbs().iter().enumerate() {
        let per_slot = g.bits_per_slot(dt) / BITS_SCALE;
        for n in 1..=usable {
            let row = (n..=usable).map(|j| (var(j, k), rates[j - 1][k] / BITS_SCALE)).collect();
            lp.add_sparse_constraint(row, Sense::Le, (n_slots - n) as f64 * per_slot).expect("indices in range");
        }
    }
    lp
}

/// Maximize offloaded bits over `τ` for the given trajectory.
pub fn solve_time_allocation(scenario: &Scenario, traj: &Trajectory) -> Result<AllocationResult> {
    let n_slots = traj.n_slots();
    let k_gbs = scenario.num_gbs();
    let p = traj.positions();
    if p[0] != scenario.u_init() || p[n_slots] != scenario.u_final() {
        return Err(ModelError::DimensionMismatch("trajectory endpoints differ from the scenario".into()).into());
    }
    let rates = rate_table(scenario, traj);
    solve_with_rates(scenario, traj, &rates, k_gbs)
}

fn solve_with_rates(scenario: &Scenario, traj: &Trajectory, rates: &[Vec<f64>], k_gbs: usize) -> Result<AllocationResult> {
    let n_slots = rates.len();
    let mut allocation = TimeAllocation::zeros(n_slots, k_gbs);
    if n_slots < 2 {
        return Ok(AllocationResult { allocation, achieved_bits: 0.0, lp_objective: 0.0, pivots: 0 });
    }

    let lp = allocation_program(scenario, rates);
    let sol = lp.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::AllocationStatus(format!("{:?}", sol.status)));
    }
    for n in 1..n_slots {
        for k in 0..k_gbs {
            allocation.set(n, k, sol.x[(n - 1) * k_gbs + k].max(0.0));
        }
    }
    let lp_objective = sol.objective * BITS_SCALE;
    let achieved_bits = total_offloaded_bits(traj, &allocation, scenario)?;

    let cap = capacity_bound(scenario, n_slots);
    let tdma: f64 =
        rates[..n_slots - 1].iter().map(|r| r.iter().cloned().fold(0.0, f64::max)).sum::<f64>() * scenario.slot_len();
    let bound = cap.min(tdma);
    if achieved_bits > bound * (1.0 + BOUND_CHECK_REL) + 1.0 {
        return Err(Error::AllocationStatus(format!(
            "allocation delivers {achieved_bits} bits, above the analytic bound {bound}"
        )));
    }
    Ok(AllocationResult { allocation, achieved_bits, lp_objective, pivots: sol.pivots })
}
