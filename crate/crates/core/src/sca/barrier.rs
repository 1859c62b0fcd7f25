//! Log-barrier Newton solver for the convexified trajectory subproblem.
//!
//! Decision variables are the free positions `u[1..N-1]`; the endpoints are
//! constants. The solver maximizes `Σ τ·R_low(u)` subject to
//!
//! * per-slot displacement `‖u[n] − u[n−1]‖² ≤ S_max²`,
//! * per-GBS capacity rows with the rate replaced by its upper bound,
//! * `q + 2ωᵀu ≥ ε` wherever the upper bound is evaluated.
//!
//! Capacity row `n` of GBS `k` covers every slot `j ≥ n`, so the barrier
//! Hessian of a single GBS is dense. Its outer-product part is assembled in
//! `O(M²)` from prefix sums over rows instead of `O(M³)` row by row.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use super::{linearized_dist_sq, lower_from_term, ExpansionTerm, TaylorExpansion, DOMAIN_EPS};
use crate::config::{SolverConfig, BITS_SCALE};
use crate::error::ScaError;
use crate::model::{Point, Scenario, TimeAllocation, Trajectory};

const NEWTON_TOL: f64 = 1e-9;
const MAX_NEWTON: usize = 100;
const ARMIJO: f64 = 0.01;
const BACKTRACK: f64 = 0.5;
const MU: f64 = 10.0;
/// Constraints below this normalized slack send the start point through phase 1.
const INTERIOR_MIN: f64 = 1e-9;
/// Phase 1 stops once every constraint clears this normalized margin.
const PHASE1_MARGIN: f64 = 1e-7;
const CHORD_SHRINK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemOutcome {
    pub trajectory: Trajectory,
    /// Lower-bound objective `Σ τ·R_low` at the returned trajectory (bits).
    pub objective: f64,
    /// Same objective at the expansion point (bits).
    pub local_objective: f64,
    pub newton_steps: usize,
    /// Whether a phase-1 search was needed to find a strictly feasible start.
    pub used_phase1: bool,
}

struct Active {
    /// Free-variable block (slot − 1).
    block: usize,
    tau: f64,
    term: ExpansionTerm,
}

struct CapRow {
    budget: f64,
    scale: f64,
    first: usize,
}

struct GbsRows {
    active: Vec<Active>,
    rows: Vec<CapRow>,
}

struct Problem {
    n_free: usize,
    s2: f64,
    u_init: Point,
    u_final: Point,
    /// Per free block: `Σ_k τ·b` and `Σ_k τ·b·ν_k` (Mbit units).
    obj_curv: Vec<f64>,
    obj_anchor: Vec<Point>,
    obj_terms: Vec<Vec<(f64, ExpansionTerm)>>,
    obj_const: f64,
    gbs: Vec<GbsRows>,
    rate_coef: f64,
    rho: f64,
}

/// Value/derivative bundle for the rate upper bound at `ℓ`.
fn upper_parts(rate_coef: f64, rho: f64, ell: f64) -> (f64, f64, f64) {
    let r = rate_coef * (rho / ell).ln_1p();
    let d1 = -rate_coef * rho / (ell * (ell + rho));
    let d2 = rate_coef * rho * (2.0 * ell + rho) / (ell * ell * (ell + rho) * (ell + rho));
    (r, d1, d2)
}

enum Mode {
    /// Minimize `s` with every constraint shifted by `s`.
    Phase1,
    /// Maximize the objective.
    Phase2,
}

impl Problem {
    #[allow(clippy::needless_range_loop)]
    fn build(scenario: &Scenario, alloc: &TimeAllocation, expansion: &TaylorExpansion) -> Result<Self, ScaError> {
        let n_slots = expansion.n_slots();
        let k_gbs = scenario.num_gbs();
        let n_free = n_slots - 1;
        let local = expansion.local().positions();
        let dt = scenario.slot_len();
        let rate_coef = scenario.bandwidth() / std::f64::consts::LN_2 / BITS_SCALE;

        let mut obj_curv = vec![0.0; n_free];
        let mut obj_anchor = vec![Point::zeros(); n_free];
        let mut obj_terms = vec![Vec::new(); n_free];
        let mut obj_const = 0.0;
        for n in 1..=n_slots {
            for k in 0..k_gbs {
                let tau = alloc.get(n, k);
                if tau == 0.0 {
                    continue;
                }
                let term = *expansion.term(n, k);
                if n == n_slots {
                    obj_const += tau * lower_from_term(&term, &local[n]) / BITS_SCALE;
                } else {
                    let w = tau * term.b / BITS_SCALE;
                    obj_curv[n - 1] += w;
                    obj_anchor[n - 1] += w * term.gbs;
                    obj_terms[n - 1].push((tau, term));
                }
            }
        }

        let mut gbs = Vec::with_capacity(k_gbs);
        for (k, g) in scenario.gbs().iter().enumerate() {
            let per_slot = g.bits_per_slot(dt) / BITS_SCALE;
            // Constant load per slot: fixed final position or ω = 0 (bound independent of u).
            let mut const_load = vec![0.0; n_slots + 1];
            let mut active = Vec::new();
            for n in 1..=n_slots {
                let tau = alloc.get(n, k);
                if tau == 0.0 {
                    continue;
                }
                let term = *expansion.term(n, k);
                if n == n_slots || term.omega == Vector2::zeros() {
                    const_load[n] = tau * term.rate_at_local / BITS_SCALE;
                } else {
                    active.push(Active { block: n - 1, tau, term });
                }
            }
            let mut suffix = vec![0.0; n_slots + 2];
            for n in (1..=n_slots).rev() {
                suffix[n] = suffix[n + 1] + const_load[n];
            }
            let mut rows = Vec::new();
            let mut first = 0;
            for n in 1..=n_slots {
                while first < active.len() && active[first].block + 1 < n {
                    first += 1;
                }
                let capacity = (n_slots - n) as f64 * per_slot;
                let budget = capacity - suffix[n];
                if first < active.len() {
                    rows.push(CapRow { budget, scale: capacity.max(per_slot), first });
                } else if budget < -1e-9 * per_slot.max(1.0) {
                    return Err(ScaError::SubproblemFailure {
                        reason: format!("GBS {k}: allocation overloads the fixed slots from {n} on"),
                        iterate: local.iter().map(|p| [p.x, p.y]).collect(),
                    });
                }
            }
            gbs.push(GbsRows { active, rows });
        }

        Ok(Self {
            n_free,
            s2: scenario.s_max() * scenario.s_max(),
            u_init: scenario.u_init(),
            u_final: scenario.u_final(),
            obj_curv,
            obj_anchor,
            obj_terms,
            obj_const,
            gbs,
            rate_coef,
            rho: scenario.rho(),
        })
    }

    fn num_constraints(&self) -> usize {
        let cap: usize = self.gbs.iter().map(|g| g.rows.len() + g.active.len()).sum();
        self.n_free + 1 + cap
    }

    fn pos(&self, x: &[f64], slot: usize) -> Point {
        if slot == 0 {
            self.u_init
        } else if slot == self.n_free + 1 {
            self.u_final
        } else {
            Point::new(x[2 * (slot - 1)], x[2 * (slot - 1) + 1])
        }
    }

    /// Objective in Mbit, lower-bound rates.
    fn objective(&self, x: &[f64]) -> f64 {
        let mut f = self.obj_const;
        for (b, terms) in self.obj_terms.iter().enumerate() {
            let u = self.pos(x, b + 1);
            for (tau, term) in terms {
                f += tau * lower_from_term(term, &u) / BITS_SCALE;
            }
        }
        f
    }

    /// Normalized constraint values, or `None` outside the bound's domain.
    fn constraints(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(self.num_constraints());
        for n in 1..=self.n_free + 1 {
            let d = self.pos(x, n) - self.pos(x, n - 1);
            out.push(1.0 - d.norm_squared() / self.s2);
        }
        for g in &self.gbs {
            let mut loads = Vec::with_capacity(g.active.len());
            for a in &g.active {
                let ell = linearized_dist_sq(&a.term, &self.pos(x, a.block + 1));
                if ell.is_nan() || ell <= 0.0 {
                    return None;
                }
                out.push((ell - DOMAIN_EPS) / a.term.dist_sq_at_local);
                loads.push(a.tau * self.rate_coef * (self.rho / ell).ln_1p());
            }
            let mut suffix = vec![0.0; loads.len() + 1];
            for i in (0..loads.len()).rev() {
                suffix[i] = suffix[i + 1] + loads[i];
            }
            for r in &g.rows {
                out.push((r.budget - suffix[r.first]) / r.scale);
            }
        }
        Some(out)
    }

    /// Barrier merit `t·obj − Σ log(g + s)`; `None` when infeasible.
    fn merit(&self, z: &[f64], t: f64, mode: &Mode) -> Option<f64> {
        let (x, s) = split(z, self.n_free, mode);
        let g = self.constraints(x)?;
        let mut logs = 0.0;
        for v in g {
            let h = v + s;
            if h.is_nan() || h <= 0.0 {
                return None;
            }
            logs += h.ln();
        }
        let obj = match mode {
            Mode::Phase1 => t * s,
            Mode::Phase2 => -t * self.objective(x),
        };
        Some(obj - logs)
    }

    /// Gradient and Hessian of the merit at `z` (assumed strictly feasible).
    fn derivatives(&self, z: &[f64], t: f64, mode: &Mode) -> (DVector<f64>, DMatrix<f64>) {
        let nx = 2 * self.n_free;
        let dim = z.len();
        let (x, s) = split(z, self.n_free, mode);
        let mut grad = DVector::zeros(dim);
        let mut hess = DMatrix::zeros(dim, dim);
        let phase1 = matches!(mode, Mode::Phase1);

        // Objective.
        match mode {
            Mode::Phase1 => grad[nx] += t,
            Mode::Phase2 => {
                for b in 0..self.n_free {
                    let w = self.obj_curv[b];
                    if w == 0.0 {
                        continue;
                    }
                    let u = self.pos(x, b + 1);
                    // ∇(−t·F) = t·2·(w·u − Σ w_k ν_k)
                    let gvec = 2.0 * t * (w * u - self.obj_anchor[b]);
                    grad[2 * b] += gvec.x;
                    grad[2 * b + 1] += gvec.y;
                    hess[(2 * b, 2 * b)] += 2.0 * t * w;
                    hess[(2 * b + 1, 2 * b + 1)] += 2.0 * t * w;
                }
            }
        }

        let add_scalar_s = |grad: &mut DVector<f64>, hess: &mut DMatrix<f64>, h: f64| {
            if phase1 {
                grad[nx] -= 1.0 / h;
                hess[(nx, nx)] += 1.0 / (h * h);
            }
        };

        // Speed constraints.
        for n in 1..=self.n_free + 1 {
            let d = self.pos(x, n) - self.pos(x, n - 1);
            let h = 1.0 - d.norm_squared() / self.s2 + s;
            let gd = -2.0 * d / self.s2; // ∇ wrt u[n]; wrt u[n−1] it is −gd
            let curv = 2.0 / self.s2; // −∇²g on the diagonal blocks
            let blocks: [(Option<usize>, f64); 2] = [
                (if n <= self.n_free { Some(n - 1) } else { None }, 1.0),
                (if n >= 2 { Some(n - 2) } else { None }, -1.0),
            ];
            for &(bi, si) in &blocks {
                let Some(bi) = bi else { continue };
                let gi = si * gd;
                grad[2 * bi] -= gi.x / h;
                grad[2 * bi + 1] -= gi.y / h;
                for &(bj, sj) in &blocks {
                    let Some(bj) = bj else { continue };
                    let gj = sj * gd;
                    let outer = gi * gj.transpose() / (h * h);
                    let c = si * sj * curv / h;
                    add_block(&mut hess, bi, bj, &(outer + Matrix2::identity() * c));
                }
                if phase1 {
                    hess[(2 * bi, nx)] += gi.x / (h * h);
                    hess[(2 * bi + 1, nx)] += gi.y / (h * h);
                    hess[(nx, 2 * bi)] += gi.x / (h * h);
                    hess[(nx, 2 * bi + 1)] += gi.y / (h * h);
                }
            }
            add_scalar_s(&mut grad, &mut hess, h);
        }

        // Capacity rows and domain guards.
        for g in &self.gbs {
            let m = g.active.len();
            if m == 0 {
                continue;
            }
            let mut avec = Vec::with_capacity(m);
            let mut hc = Vec::with_capacity(m);
            let mut loads = Vec::with_capacity(m);
            for a in &g.active {
                let u = self.pos(x, a.block + 1);
                let ell = linearized_dist_sq(&a.term, &u);
                let (r, d1, d2) = upper_parts(self.rate_coef, self.rho, ell);
                let w = a.term.omega;
                loads.push(a.tau * r);
                avec.push(a.tau * d1 * 2.0 * w);
                hc.push(a.tau * d2 * 4.0 * w * w.transpose());

                // Domain guard (affine).
                let sc = a.term.dist_sq_at_local;
                let h = (ell - DOMAIN_EPS) / sc + s;
                let gg = 2.0 * w / sc;
                grad[2 * a.block] -= gg.x / h;
                grad[2 * a.block + 1] -= gg.y / h;
                add_block(&mut hess, a.block, a.block, &(gg * gg.transpose() / (h * h)));
                if phase1 {
                    for (i, v) in [gg.x, gg.y].into_iter().enumerate() {
                        hess[(2 * a.block + i, nx)] += v / (h * h);
                        hess[(nx, 2 * a.block + i)] += v / (h * h);
                    }
                }
                add_scalar_s(&mut grad, &mut hess, h);
            }
            let mut suffix = vec![0.0; m + 1];
            for i in (0..m).rev() {
                suffix[i] = suffix[i + 1] + loads[i];
            }
            // Bucket each row's weights at its first active index, then prefix-sum.
            let mut w1 = vec![0.0; m];
            let mut w2 = vec![0.0; m];
            let mut v1 = vec![0.0; m];
            for r in &g.rows {
                let h = (r.budget - suffix[r.first]) / r.scale + s;
                w1[r.first] += 1.0 / (r.scale * h);
                w2[r.first] += 1.0 / (r.scale * h).powi(2);
                v1[r.first] += 1.0 / (r.scale * h * h);
                add_scalar_s(&mut grad, &mut hess, h);
            }
            for i in 1..m {
                w1[i] += w1[i - 1];
                w2[i] += w2[i - 1];
                v1[i] += v1[i - 1];
            }
            for i in 0..m {
                let bi = g.active[i].block;
                grad[2 * bi] += avec[i].x * w1[i];
                grad[2 * bi + 1] += avec[i].y * w1[i];
                add_block(&mut hess, bi, bi, &(hc[i] * w1[i]));
                for j in 0..m {
                    let bj = g.active[j].block;
                    let outer = avec[i] * avec[j].transpose() * w2[i.min(j)];
                    add_block(&mut hess, bi, bj, &outer);
                }
                if phase1 {
                    for (c, v) in [avec[i].x, avec[i].y].into_iter().enumerate() {
                        hess[(2 * bi + c, nx)] -= v * v1[i];
                        hess[(nx, 2 * bi + c)] -= v * v1[i];
                    }
                }
            }
        }
        (grad, hess)
    }
}

fn split<'a>(z: &'a [f64], n_free: usize, mode: &Mode) -> (&'a [f64], f64) {
    match mode {
        Mode::Phase1 => (&z[..2 * n_free], z[2 * n_free]),
        Mode::Phase2 => (z, 0.0),
    }
}

fn add_block(h: &mut DMatrix<f64>, bi: usize, bj: usize, m: &Matrix2<f64>) {
    for r in 0..2 {
        for c in 0..2 {
            h[(2 * bi + r, 2 * bj + c)] += m[(r, c)];
        }
    }
}

/// Damped Newton on the merit at fixed `t`. Returns steps taken, or `None`
/// if the Newton system could not be solved.
fn center(p: &Problem, z: &mut Vec<f64>, t: f64, mode: &Mode, stop: impl Fn(&[f64]) -> bool) -> Option<usize> {
    let mut steps = 0;
    let mut value = p.merit(z, t, mode)?;
    for _ in 0..MAX_NEWTON {
        if stop(z) {
            break;
        }
        let (grad, hess) = p.derivatives(z, t, mode);
        let dz = newton_direction(&grad, hess)?;
        let decrement = -grad.dot(&dz);
        if !decrement.is_finite() {
            return None;
        }
        if decrement / 2.0 <= NEWTON_TOL {
            break;
        }
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-14 {
            let trial: Vec<f64> = z.iter().zip(dz.iter()).map(|(a, d)| a + step * d).collect();
            if let Some(v) = p.merit(&trial, t, mode) {
                if v <= value - ARMIJO * step * decrement {
                    *z = trial;
                    value = v;
                    accepted = true;
                    break;
                }
            }
            step *= BACKTRACK;
        }
        steps += 1;
        if !accepted {
            break;
        }
    }
    Some(steps)
}

fn newton_direction(grad: &DVector<f64>, hess: DMatrix<f64>) -> Option<DVector<f64>> {
    let scale = hess.diagonal().iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let mut reg = 0.0;
    for _ in 0..12 {
        let mut h = hess.clone();
        if reg > 0.0 {
            for i in 0..h.nrows() {
                h[(i, i)] += reg;
            }
        }
        if let Some(ch) = h.cholesky() {
            let d = ch.solve(&(-grad));
            if d.iter().all(|v| v.is_finite()) {
                return Some(d);
            }
        }
        reg = if reg == 0.0 { 1e-12 * scale } else { reg * 100.0 };
    }
    None
}

/// Solve the convexified subproblem built at `expansion` for the fixed
/// allocation `alloc`. The result never has a lower objective than the
/// expansion point itself, which is always feasible for its own subproblem.
pub fn solve_subproblem(
    scenario: &Scenario,
    alloc: &TimeAllocation,
    expansion: &TaylorExpansion,
    config: &SolverConfig,
) -> Result<SubproblemOutcome, ScaError> {
    let local = expansion.local();
    let n_slots = local.n_slots();
    if alloc.n_slots() != n_slots || alloc.n_gbs() != scenario.num_gbs() {
        return Err(ScaError::SubproblemFailure {
            reason: "allocation dimensions do not match the expansion".into(),
            iterate: Vec::new(),
        });
    }
    let p = Problem::build(scenario, alloc, expansion)?;
    let x_local: Vec<f64> = local.positions()[1..n_slots].iter().flat_map(|u| [u.x, u.y]).collect();
    let local_obj = p.objective(&x_local);
    let unchanged = |steps, used_phase1| SubproblemOutcome {
        trajectory: local.clone(),
        objective: local_obj * BITS_SCALE,
        local_objective: local_obj * BITS_SCALE,
        newton_steps: steps,
        used_phase1,
    };

    let has_weight = p.obj_curv.iter().any(|&w| w > 0.0);
    let chord = scenario.u_final() - scenario.u_init();
    let singleton = n_slots as f64 * scenario.s_max() <= chord.norm() * (1.0 + 1e-12);
    if p.n_free == 0 || !has_weight || singleton {
        return Ok(unchanged(0, false));
    }

    // Pull tight speed constraints strictly inside by blending towards the uniform chord.
    let mut x0 = x_local.clone();
    let speed_tight = (1..=n_slots).any(|n| {
        let d = p.pos(&x0, n) - p.pos(&x0, n - 1);
        1.0 - d.norm_squared() / p.s2 < INTERIOR_MIN
    });
    if speed_tight {
        for b in 0..p.n_free {
            let c = scenario.u_init() + chord * ((b + 1) as f64 / n_slots as f64);
            x0[2 * b] = (1.0 - CHORD_SHRINK) * x0[2 * b] + CHORD_SHRINK * c.x;
            x0[2 * b + 1] = (1.0 - CHORD_SHRINK) * x0[2 * b + 1] + CHORD_SHRINK * c.y;
        }
    }

    let m = p.num_constraints() as f64;
    let mut steps = 0;
    let mut used_phase1 = false;
    let min_g = match p.constraints(&x0) {
        Some(g) => g.into_iter().fold(f64::INFINITY, f64::min),
        None => f64::NEG_INFINITY,
    };
    if !(min_g.is_finite()) {
        return Err(ScaError::SubproblemFailure {
            reason: "start point outside the upper bound's domain".into(),
            iterate: local.positions().iter().map(|q| [q.x, q.y]).collect(),
        });
    }
    if min_g < INTERIOR_MIN {
        used_phase1 = true;
        let mut z = x0.clone();
        z.push(0.1 - min_g);
        let mode = Mode::Phase1;
        let nx = x0.len();
        let mut t = 1.0;
        let done = |z: &[f64]| z[nx] < -PHASE1_MARGIN;
        loop {
            steps += center(&p, &mut z, t, &mode, done).ok_or_else(|| ScaError::SubproblemFailure {
                reason: "singular Newton system in phase 1".into(),
                iterate: dump(&p, &z[..nx]),
            })?;
            if done(&z) || m / t < 1e-12 {
                break;
            }
            t *= MU;
        }
        if !done(&z) {
            // No strictly feasible point exists; the local point is the only safe answer.
            return Ok(unchanged(steps, used_phase1));
        }
        z.truncate(nx);
        x0 = z;
    }

    let mode = Mode::Phase2;
    let mut z = x0;
    let mut t = m / p.objective(&z).abs().max(1.0);
    loop {
        steps += center(&p, &mut z, t, &mode, |_| false).ok_or_else(|| ScaError::SubproblemFailure {
            reason: "singular Newton system".into(),
            iterate: dump(&p, &z),
        })?;
        if m / t < config.subproblem_tol {
            break;
        }
        t *= MU;
    }

    let obj = p.objective(&z);
    if !obj.is_finite() {
        return Err(ScaError::SubproblemFailure { reason: "non-finite objective".into(), iterate: dump(&p, &z) });
    }
    if obj < local_obj {
        return Ok(unchanged(steps, used_phase1));
    }
    let mut positions = Vec::with_capacity(n_slots + 1);
    positions.push(scenario.u_init());
    positions.extend(z.chunks_exact(2).map(|c| Point::new(c[0], c[1])));
    positions.push(scenario.u_final());
    let trajectory = Trajectory::new(positions).expect("at least two positions");
    Ok(SubproblemOutcome {
        trajectory,
        objective: obj * BITS_SCALE,
        local_objective: local_obj * BITS_SCALE,
        newton_steps: steps,
        used_phase1,
    })
}

fn dump(p: &Problem, x: &[f64]) -> Vec<[f64; 2]> {
    (0..=p.n_free + 1).map(|n| p.pos(x, n)).map(|q| [q.x, q.y]).collect()
}
