//! Trajectory optimization under a fixed time allocation by successive
//! convex approximation.
//!
//! At each local trajectory `u⁽ⁱ⁾` the rate is bracketed by two bounds that
//! are tight at `u⁽ⁱ⁾`:
//!
//! * an upper bound, convex in `u`, obtained by linearizing the squared
//!   distance inside the logarithm; it replaces the rate on the load side of
//!   the capacity constraints, so any trajectory feasible for the convexified
//!   problem stays feasible for the true one;
//! * a lower bound, concave quadratic in `u`, obtained by linearizing the
//!   rate in the squared distance; it replaces the rate in the objective.
//!
//! The convexified problem is solved by [`solve_subproblem`] and the loop in
//! [`optimize_trajectory`] re-expands at its solution until the exact-rate
//! objective stops improving.

mod barrier;

use std::f64::consts::LN_2;

pub use barrier::{solve_subproblem, SubproblemOutcome};

use crate::config::SolverConfig;
use crate::error::{ModelError, ScaError};
use crate::model::{validate_solution_with, ConstraintKind, Point, Scenario, TimeAllocation, Trajectory};

/// Minimum value of the linearized squared distance (m²) kept by the subproblem.
pub const DOMAIN_EPS: f64 = 1e-3;

/// Expansion coefficients for one (slot, GBS) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionTerm {
    /// `u⁽ⁱ⁾[n] − ν_k`.
    pub omega: Point,
    /// Constant of the linearized squared distance `q + 2ωᵀu`.
    pub q: f64,
    /// Curvature weight of the rate lower bound (bits/s per m²).
    pub b: f64,
    /// `R_k(u⁽ⁱ⁾[n])`.
    pub rate_at_local: f64,
    /// `H² + ‖u⁽ⁱ⁾[n] − ν_k‖²`.
    pub dist_sq_at_local: f64,
    /// `ν_k`.
    pub gbs: Point,
}

/// Expansion of every (slot, GBS) pair around a local trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorExpansion {
    local: Trajectory,
    n_gbs: usize,
    terms: Vec<ExpansionTerm>,
}

impl TaylorExpansion {
    /// Term for position index `n` (`0..=N`) and GBS `k`.
    pub fn term(&self, n: usize, k: usize) -> &ExpansionTerm {
        &self.terms[n * self.n_gbs + k]
    }

    pub fn local(&self) -> &Trajectory {
        &self.local
    }

    pub fn n_slots(&self) -> usize {
        self.local.n_slots()
    }
}

/// `b = B·ρ / (ln2 · d² · (ρ + d²))`, i.e. `−∂R/∂(d²)` at `d²`.
pub fn lower_bound_slope(scenario: &Scenario, d2: f64) -> f64 {
    let rho = scenario.rho();
    scenario.bandwidth() * rho / (LN_2 * d2 * (rho + d2))
}

/// Expand every (slot, GBS) pair around `local`.
pub fn expand_at(local: &Trajectory, scenario: &Scenario) -> TaylorExpansion {
    let n_gbs = scenario.num_gbs();
    let terms = local
        .positions()
        .iter()
        .flat_map(|u| {
            scenario.gbs().iter().map(move |g| {
                let omega = u - g.position;
                let dist_sq = scenario.dist_sq_to(u, &g.position);
                ExpansionTerm {
                    omega,
                    q: dist_sq - 2.0 * omega.dot(u),
                    b: lower_bound_slope(scenario, dist_sq),
                    rate_at_local: scenario.rate_at_dist_sq(dist_sq),
                    dist_sq_at_local: dist_sq,
                    gbs: g.position,
                }
            })
        })
        .collect();
    TaylorExpansion { local: local.clone(), n_gbs, terms }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("position index {0} outside the expansion")]
    SlotOutOfRange(usize),
    #[error("linearized squared distance {0} m² is not positive")]
    Domain(f64),
}

fn lookup<'a>(expansion: &'a TaylorExpansion, k: usize, n: usize, scenario: &Scenario) -> Result<&'a ExpansionTerm, BoundError> {
    if k >= scenario.num_gbs() || k >= expansion.n_gbs {
        return Err(ModelError::GbsIndexOutOfRange { index: k, count: scenario.num_gbs() }.into());
    }
    if n > expansion.n_slots() {
        return Err(BoundError::SlotOutOfRange(n));
    }
    Ok(expansion.term(n, k))
}

/// Linearized squared distance `q + 2ωᵀu`; never exceeds the true squared distance.
pub fn linearized_dist_sq(term: &ExpansionTerm, u: &Point) -> f64 {
    term.q + 2.0 * term.omega.dot(u)
}

/// Convex upper bound `B·log₂(1 + ρ/(q + 2ωᵀu))` of the rate at position index `n`.
pub fn rate_upper(u: &Point, k: usize, n: usize, expansion: &TaylorExpansion, scenario: &Scenario) -> Result<f64, BoundError> {
    let term = lookup(expansion, k, n, scenario)?;
    let ell = linearized_dist_sq(term, u);
    if ell.is_nan() || ell <= 0.0 {
        return Err(BoundError::Domain(ell));
    }
    Ok(scenario.rate_at_dist_sq(ell))
}

/// Concave lower bound `R(u⁽ⁱ⁾) − b·(‖u−ν‖² − ‖u⁽ⁱ⁾−ν‖²)` at position index `n`.
pub fn rate_lower(u: &Point, k: usize, n: usize, expansion: &TaylorExpansion, scenario: &Scenario) -> Result<f64, BoundError> {
    let term = lookup(expansion, k, n, scenario)?;
    Ok(lower_from_term(term, u))
}

pub(crate) fn lower_from_term(term: &ExpansionTerm, u: &Point) -> f64 {
    let horiz = (u - term.gbs).norm_squared();
    term.rate_at_local - term.b * (horiz - term.omega.norm_squared())
}

/// Why the SCA loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    SubproblemFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaDiagnostics {
    /// Exact-rate bits `Σ τ·R(u⁽ⁱ⁾)`; entry 0 is the initial trajectory.
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
}

/// Exact-rate objective `Σ_k Σ_n τ_k[n]·R_k(u[n])`.
pub fn exact_objective(scenario: &Scenario, alloc: &TimeAllocation, traj: &Trajectory) -> f64 {
    crate::model::total_offloaded_bits(traj, alloc, scenario).unwrap_or(f64::NAN)
}

/// Result of the SCA loop. `trajectory` is always the best iterate seen;
/// `failure` is set when a subproblem failed and the loop stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaOutcome {
    pub trajectory: Trajectory,
    pub diagnostics: ScaDiagnostics,
    pub failure: Option<ScaError>,
}

/// Iterate convexified subproblems from `init` until the exact-rate
/// objective stops improving.
pub fn optimize_trajectory(
    scenario: &Scenario,
    alloc: &TimeAllocation,
    init: &Trajectory,
    config: &SolverConfig,
) -> ScaOutcome {
    let mut current = init.clone();
    let mut value = exact_objective(scenario, alloc, &current);
    let mut diag = ScaDiagnostics { objective: vec![value], iterations: 0, termination: Termination::MaxIterations };
    let mut failure = None;

    for iter in 1..=config.sca_max_iters {
        diag.iterations = iter;
        let expansion = expand_at(&current, scenario);
        let candidate = match solve_subproblem(scenario, alloc, &expansion, config) {
            Ok(o) => o.trajectory,
            Err(e) => {
                diag.termination = Termination::SubproblemFailure;
                failure = Some(e);
                break;
            }
        };
        let report = validate_solution_with(&candidate, alloc, scenario, 0.0, config.validation_tol);
        let cand_value = exact_objective(scenario, alloc, &candidate);
        if config.trace {
            let worst = report
                .per_constraint_slack
                .iter()
                .filter(|(kind, _)| *kind != ConstraintKind::TotalBits)
                .map(|(_, s)| (-s).max(0.0))
                .fold(0.0, f64::max);
            log::info!("sca iter={iter} bits={cand_value:.9e} max_violation={worst:.3e}");
        }
        if !report.feasible {
            diag.termination = Termination::SubproblemFailure;
            let reason = report.violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
            let iterate = candidate.positions().iter().map(|p| [p.x, p.y]).collect();
            failure = Some(ScaError::SubproblemFailure { reason, iterate });
            break;
        }
        if cand_value < value {
            // Flat step lost to rounding; the current trajectory is at least as good.
            diag.objective.push(value);
            diag.termination = Termination::Converged;
            break;
        }
        let improvement = (cand_value - value) / value.abs().max(1.0);
        current = candidate;
        value = cand_value;
        diag.objective.push(value);
        if improvement < config.sca_tol {
            diag.termination = Termination::Converged;
            break;
        }
    }
    if let Some(e) = &failure {
        log::warn!("SCA stopped early: {e}");
    }
    ScaOutcome { trajectory: current, diagnostics: diag, failure }
}
