//! Problem instance, link-budget formulas and exact constraint checks.
//!
//! Slots are numbered `1..=N`. A trajectory carries `N + 1` positions where
//! `positions[0]` is the launch point and `positions[n]` is the position the
//! UAV offloads from during slot `n`. GBS indices are zero-based.

use std::f64::consts::LN_2;
use std::fmt;

use nalgebra::Vector2;

use crate::config::{BITS_SCALE, FEASIBILITY_TOL};
use crate::error::ModelError;

/// Horizontal coordinate in metres.
pub type Point = Vector2<f64>;

/// A ground base station hosting an edge server.
#[derive(Debug, Clone, PartialEq)]
pub struct Gbs {
    pub position: Point,
    /// Maximum CPU frequency (Hz).
    pub cpu_freq: f64,
    /// CPU cycles needed per task-input bit.
    pub cycles_per_bit: f64,
}

impl Gbs {
    pub fn new(x: f64, y: f64, cpu_freq: f64, cycles_per_bit: f64) -> Self {
        Self { position: Point::new(x, y), cpu_freq, cycles_per_bit }
    }

    /// Bits this GBS can execute during one slot.
    pub fn bits_per_slot(&self, slot_len: f64) -> f64 {
        self.cpu_freq * slot_len / self.cycles_per_bit
    }
}

/// Linear-unit radio parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Radio {
    /// Bandwidth (Hz).
    pub bandwidth: f64,
    /// Channel power gain at 1 m (linear).
    pub ref_gain: f64,
    /// Receiver noise power (W).
    pub noise_power: f64,
    /// UAV transmit power (W).
    pub tx_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    /// Flying altitude (m).
    pub altitude: f64,
    /// Maximum horizontal speed (m/s).
    pub v_max: f64,
    /// Slot duration (s).
    pub slot_len: f64,
    pub u_init: Point,
    pub u_final: Point,
}

/// Immutable problem instance. Construct with [`Scenario::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    gbs: Vec<Gbs>,
    radio: Radio,
    uav: Kinematics,
    task_bits: f64,
    rho: f64,
}

fn check_positive(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter { name, reason: format!("must be finite and > 0, got {value}") })
    }
}

fn check_point(name: &'static str, p: &Point) -> Result<(), ModelError> {
    if p.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter { name, reason: format!("non-finite coordinate {p:?}") })
    }
}

impl Scenario {
    pub fn new(gbs: Vec<Gbs>, radio: Radio, uav: Kinematics, task_bits: f64) -> Result<Self, ModelError> {
        if gbs.is_empty() {
            return Err(ModelError::InvalidParameter { name: "gbs", reason: "at least one GBS is required".into() });
        }
        for g in &gbs {
            check_point("gbs.position", &g.position)?;
            check_positive("gbs.cpu_freq", g.cpu_freq)?;
            check_positive("gbs.cycles_per_bit", g.cycles_per_bit)?;
        }
        check_positive("altitude", uav.altitude)?;
        check_positive("v_max", uav.v_max)?;
        check_positive("slot_len", uav.slot_len)?;
        check_point("u_init", &uav.u_init)?;
        check_point("u_final", &uav.u_final)?;
        check_positive("bandwidth", radio.bandwidth)?;
        check_positive("ref_gain", radio.ref_gain)?;
        check_positive("noise_power", radio.noise_power)?;
        check_positive("tx_power", radio.tx_power)?;
        if !(task_bits.is_finite() && task_bits >= 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "task_bits",
                reason: format!("must be finite and >= 0, got {task_bits}"),
            });
        }
        let rho = radio.tx_power * radio.ref_gain / radio.noise_power;
        check_positive("reference SNR", rho)?;
        Ok(Self { gbs, radio, uav, task_bits, rho })
    }

    /// Same instance with a different task size.
    pub fn with_task_bits(&self, task_bits: f64) -> Result<Self, ModelError> {
        Self::new(self.gbs.clone(), self.radio.clone(), self.uav.clone(), task_bits)
    }

    /// Same instance restricted to the given GBS subset (in the given order).
    pub fn with_gbs(&self, gbs: Vec<Gbs>) -> Result<Self, ModelError> {
        Self::new(gbs, self.radio.clone(), self.uav.clone(), self.task_bits)
    }

    pub fn with_endpoints(&self, u_init: Point, u_final: Point) -> Result<Self, ModelError> {
        let uav = Kinematics { u_init, u_final, ..self.uav.clone() };
        Self::new(self.gbs.clone(), self.radio.clone(), uav, self.task_bits)
    }

    pub fn gbs(&self) -> &[Gbs] {
        &self.gbs
    }
    pub fn num_gbs(&self) -> usize {
        self.gbs.len()
    }
    pub fn radio(&self) -> &Radio {
        &self.radio
    }
    pub fn kinematics(&self) -> &Kinematics {
        &self.uav
    }
    pub fn altitude(&self) -> f64 {
        self.uav.altitude
    }
    pub fn slot_len(&self) -> f64 {
        self.uav.slot_len
    }
    pub fn u_init(&self) -> Point {
        self.uav.u_init
    }
    pub fn u_final(&self) -> Point {
        self.uav.u_final
    }
    pub fn task_bits(&self) -> f64 {
        self.task_bits
    }
    pub fn bandwidth(&self) -> f64 {
        self.radio.bandwidth
    }

    /// Reference SNR `P·β₀/σ²` (m²).
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Maximum displacement per slot.
    pub fn s_max(&self) -> f64 {
        self.uav.slot_len * self.uav.v_max
    }

    pub fn chord_length(&self) -> f64 {
        (self.uav.u_final - self.uav.u_init).norm()
    }

    /// Aggregate per-slot execution capacity over all GBSs (bits).
    pub fn aggregate_bits_per_slot(&self) -> f64 {
        self.gbs.iter().map(|g| g.bits_per_slot(self.uav.slot_len)).sum()
    }

    fn check_index(&self, k: usize) -> Result<&Gbs, ModelError> {
        self.gbs.get(k).ok_or(ModelError::GbsIndexOutOfRange { index: k, count: self.gbs.len() })
    }

    /// Squared UAV–GBS distance `H² + ‖u − ν_k‖²`.
    pub fn distance_sq(&self, u: &Point, k: usize) -> Result<f64, ModelError> {
        let g = self.check_index(k)?;
        Ok(self.dist_sq_to(u, &g.position))
    }

    /// Free-space channel power gain `β₀ / d²`.
    pub fn channel_gain(&self, u: &Point, k: usize) -> Result<f64, ModelError> {
        Ok(self.radio.ref_gain / self.distance_sq(u, k)?)
    }

    /// Achievable offloading rate towards GBS `k` (bits/s).
    pub fn offload_rate(&self, u: &Point, k: usize) -> Result<f64, ModelError> {
        Ok(self.rate_at_dist_sq(self.distance_sq(u, k)?))
    }

    pub(crate) fn dist_sq_to(&self, u: &Point, nu: &Point) -> f64 {
        let h = self.uav.altitude;
        h * h + (u - nu).norm_squared()
    }

    /// `B·log₂(1 + ρ/d²)` for a given squared distance.
    pub fn rate_at_dist_sq(&self, d2: f64) -> f64 {
        self.radio.bandwidth * (self.rho / d2).ln_1p() / LN_2
    }

    /// Unchecked rate for internal loops where `k` is known valid.
    pub(crate) fn rate(&self, u: &Point, k: usize) -> f64 {
        self.rate_at_dist_sq(self.dist_sq_to(u, &self.gbs[k].position))
    }

    /// Rate when hovering directly above a GBS, the best any link can offer.
    pub fn overhead_rate(&self) -> f64 {
        let h = self.uav.altitude;
        self.rate_at_dist_sq(h * h)
    }
}

/// Horizontal UAV positions `u[0..=N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    positions: Vec<Point>,
}

impl Trajectory {
    pub fn new(positions: Vec<Point>) -> Result<Self, ModelError> {
        if positions.len() < 2 {
            return Err(ModelError::DimensionMismatch(format!(
                "a trajectory needs at least 2 positions, got {}",
                positions.len()
            )));
        }
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// Number of slots `N`.
    pub fn n_slots(&self) -> usize {
        self.positions.len() - 1
    }

    /// Largest per-slot displacement.
    pub fn max_step(&self) -> f64 {
        self.positions.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max)
    }

    pub fn length(&self) -> f64 {
        self.positions.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    pub fn into_positions(self) -> Vec<Point> {
        self.positions
    }
}

/// Per-slot, per-GBS offloading durations `τ_k[n]` (s), slots `1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeAllocation {
    n_slots: usize,
    n_gbs: usize,
    tau: Vec<f64>,
}

impl TimeAllocation {
    pub fn zeros(n_slots: usize, n_gbs: usize) -> Self {
        Self { n_slots, n_gbs, tau: vec![0.0; n_slots * n_gbs] }
    }

    /// Build from rows indexed by slot (`rows[n-1][k]`).
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let n_slots = rows.len();
        let n_gbs = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_gbs) {
            return Err(ModelError::DimensionMismatch("ragged allocation rows".into()));
        }
        Ok(Self { n_slots, n_gbs, tau: rows.into_iter().flatten().collect() })
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }
    pub fn n_gbs(&self) -> usize {
        self.n_gbs
    }

    /// Duration offloaded to GBS `k` during slot `n` (1-based).
    pub fn get(&self, n: usize, k: usize) -> f64 {
        debug_assert!((1..=self.n_slots).contains(&n) && k < self.n_gbs);
        self.tau[(n - 1) * self.n_gbs + k]
    }

    pub fn set(&mut self, n: usize, k: usize, value: f64) {
        debug_assert!((1..=self.n_slots).contains(&n) && k < self.n_gbs);
        self.tau[(n - 1) * self.n_gbs + k] = value;
    }

    /// Durations of slot `n` (1-based), one entry per GBS.
    pub fn slot(&self, n: usize) -> &[f64] {
        &self.tau[(n - 1) * self.n_gbs..n * self.n_gbs]
    }

    pub fn scale(&mut self, factor: f64) {
        self.tau.iter_mut().for_each(|t| *t *= factor);
    }

    pub fn is_zero(&self) -> bool {
        self.tau.iter().all(|&t| t == 0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.tau
    }
}

fn check_dims(traj: &Trajectory, alloc: &TimeAllocation, scenario: &Scenario) -> Result<(), ModelError> {
    if alloc.n_slots() != traj.n_slots() || alloc.n_gbs() != scenario.num_gbs() {
        return Err(ModelError::DimensionMismatch(format!(
            "trajectory has {} slots and scenario {} GBSs, allocation is {}x{}",
            traj.n_slots(),
            scenario.num_gbs(),
            alloc.n_slots(),
            alloc.n_gbs()
        )));
    }
    Ok(())
}

/// Bits delivered to each GBS, `Σ_n τ_k[n]·R_k(u[n])`.
pub fn bits_per_gbs(traj: &Trajectory, alloc: &TimeAllocation, scenario: &Scenario) -> Result<Vec<f64>, ModelError> {
    check_dims(traj, alloc, scenario)?;
    let mut out = vec![0.0; scenario.num_gbs()];
    for n in 1..=traj.n_slots() {
        let u = &traj.positions()[n];
        for (k, bits) in out.iter_mut().enumerate() {
            let t = alloc.get(n, k);
            if t != 0.0 {
                *bits += t * scenario.rate(u, k);
            }
        }
    }
    Ok(out)
}

/// Total offloaded bits `Σ_k Σ_n τ_k[n]·R_k(u[n])`.
pub fn total_offloaded_bits(traj: &Trajectory, alloc: &TimeAllocation, scenario: &Scenario) -> Result<f64, ModelError> {
    Ok(bits_per_gbs(traj, alloc, scenario)?.iter().sum())
}

/// Computation-capacity slack in CPU cycles: entry `[k][n-1]` is
/// `(N−n)·f_k·δ_t − Σ_{j=n}^{N} c_k·τ_k[j]·R_k(u[j])`.
pub fn capacity_slack(traj: &Trajectory, alloc: &TimeAllocation, scenario: &Scenario) -> Result<Vec<Vec<f64>>, ModelError> {
    check_dims(traj, alloc, scenario)?;
    let n_slots = traj.n_slots();
    let dt = scenario.slot_len();
    Ok(scenario
        .gbs()
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let mut row = vec![0.0; n_slots];
            let mut load = 0.0;
            for n in (1..=n_slots).rev() {
                let t = alloc.get(n, k);
                if t != 0.0 {
                    load += g.cycles_per_bit * t * scenario.rate(&traj.positions()[n], k);
                }
                row[n - 1] = (n_slots - n) as f64 * g.cpu_freq * dt - load;
            }
            row
        })
        .collect())
}

/// Constraint families of the mission-time problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    /// Per-slot displacement at most `S_max`.
    Speed,
    /// `u[0] = u_I`, `u[N] = u_F`.
    Endpoints,
    /// `Σ_k τ_k[n] ≤ δ_t`.
    Tdma,
    /// Offloaded bits cover the task.
    TotalBits,
    /// Bits offloaded from slot `n` onward fit the remaining CPU budget.
    Capacity,
    /// `τ_k[n] ≥ 0`.
    NonNegative,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Speed => "speed",
            Self::Endpoints => "endpoints",
            Self::Tdma => "tdma",
            Self::TotalBits => "total-bits",
            Self::Capacity => "capacity",
            Self::NonNegative => "non-negative",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ConstraintKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.kind, self.message)
    }
}

/// Outcome of checking a candidate against every constraint.
///
/// Slacks are reported in natural units: metres for speed and endpoints,
/// seconds for TDMA and non-negativity, bits for total bits and capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub feasible: bool,
    pub total_bits: f64,
    pub per_constraint_slack: Vec<(ConstraintKind, f64)>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn slack(&self, kind: ConstraintKind) -> Option<f64> {
        self.per_constraint_slack.iter().find(|(k, _)| *k == kind).map(|(_, s)| *s)
    }

    pub fn violates(&self, kind: ConstraintKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

/// Validate against the scenario's own task size with the default tolerance.
pub fn validate_solution(traj: &Trajectory, alloc: &TimeAllocation, scenario: &Scenario) -> ValidationReport {
    validate_solution_with(traj, alloc, scenario, scenario.task_bits(), FEASIBILITY_TOL)
}

/// Validate against an explicit task size and absolute tolerance (m, s, Mbit).
pub fn validate_solution_with(
    traj: &Trajectory,
    alloc: &TimeAllocation,
    scenario: &Scenario,
    task_bits: f64,
    tol: f64,
) -> ValidationReport {
    let mut violations = Vec::new();
    let mut slacks = Vec::new();

    if let Err(e) = check_dims(traj, alloc, scenario) {
        return ValidationReport {
            feasible: false,
            total_bits: 0.0,
            per_constraint_slack: slacks,
            violations: vec![Violation { kind: ConstraintKind::Tdma, message: e.to_string() }],
        };
    }

    let s_max = scenario.s_max();
    let mut speed_slack = f64::INFINITY;
    for (i, w) in traj.positions().windows(2).enumerate() {
        let step = (w[1] - w[0]).norm();
        let slack = s_max - step;
        speed_slack = speed_slack.min(slack);
        if slack < -tol {
            violations.push(Violation {
                kind: ConstraintKind::Speed,
                message: format!("slot {}: displacement {step:.6} m exceeds {s_max:.6} m", i + 1),
            });
        }
    }
    slacks.push((ConstraintKind::Speed, speed_slack));

    let p = traj.positions();
    let dev_init = (p[0] - scenario.u_init()).norm();
    let dev_final = (p[p.len() - 1] - scenario.u_final()).norm();
    slacks.push((ConstraintKind::Endpoints, -dev_init.max(dev_final)));
    if dev_init > tol {
        violations.push(Violation {
            kind: ConstraintKind::Endpoints,
            message: format!("initial position is {dev_init:.6} m from u_I"),
        });
    }
    if dev_final > tol {
        violations.push(Violation {
            kind: ConstraintKind::Endpoints,
            message: format!("final position is {dev_final:.6} m from u_F"),
        });
    }

    let dt = scenario.slot_len();
    let mut tdma_slack = f64::INFINITY;
    let mut min_tau = f64::INFINITY;
    for n in 1..=alloc.n_slots() {
        let row = alloc.slot(n);
        let used: f64 = row.iter().sum();
        tdma_slack = tdma_slack.min(dt - used);
        if dt - used < -tol {
            violations.push(Violation {
                kind: ConstraintKind::Tdma,
                message: format!("slot {n}: sub-slots sum to {used:.9} s > {dt} s"),
            });
        }
        for (k, &t) in row.iter().enumerate() {
            min_tau = min_tau.min(t);
            if t < -tol || !t.is_finite() {
                violations.push(Violation {
                    kind: ConstraintKind::NonNegative,
                    message: format!("slot {n}, GBS {k}: duration {t}"),
                });
            }
        }
    }
    slacks.push((ConstraintKind::Tdma, tdma_slack));
    slacks.push((ConstraintKind::NonNegative, min_tau));

    let bit_tol = tol * BITS_SCALE;
    let total_bits = total_offloaded_bits(traj, alloc, scenario).unwrap_or(0.0);
    slacks.push((ConstraintKind::TotalBits, total_bits - task_bits));
    if total_bits < task_bits - bit_tol {
        violations.push(Violation {
            kind: ConstraintKind::TotalBits,
            message: format!("offloaded {total_bits:.3} bits < task size {task_bits:.3} bits"),
        });
    }

    let cap = capacity_slack(traj, alloc, scenario).unwrap_or_default();
    let mut cap_slack = f64::INFINITY;
    for (k, row) in cap.iter().enumerate() {
        let c = scenario.gbs()[k].cycles_per_bit;
        for (i, &cycles) in row.iter().enumerate() {
            let bits = cycles / c;
            cap_slack = cap_slack.min(bits);
            if bits < -bit_tol {
                violations.push(Violation {
                    kind: ConstraintKind::Capacity,
                    message: format!("GBS {k}, slot {}: load exceeds remaining capacity by {:.3} bits", i + 1, -bits),
                });
            }
        }
    }
    slacks.push((ConstraintKind::Capacity, cap_slack));

    ValidationReport { feasible: violations.is_empty(), total_bits, per_constraint_slack: slacks, violations }
}

/// Linear value of a decibel quantity.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Watts from dBm.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) / 1000.0
}

/// The evaluation setting used throughout the experiments: 1 MHz, 50 m
/// altitude, −30 dB reference gain, −60 dBm noise, 50 m/s, 30 dBm,
/// 2.5 GHz and 10³ cycles/bit at every GBS, 1 s slots.
pub fn reference_scenario(gbs_xy: &[(f64, f64)], u_init: (f64, f64), u_final: (f64, f64), task_bits: f64) -> Result<Scenario, ModelError> {
    let gbs = gbs_xy.iter().map(|&(x, y)| Gbs::new(x, y, 2.5e9, 1e3)).collect();
    let radio = Radio {
        bandwidth: 1e6,
        ref_gain: db_to_linear(-30.0),
        noise_power: dbm_to_watts(-60.0),
        tx_power: dbm_to_watts(30.0),
    };
    let uav = Kinematics {
        altitude: 50.0,
        v_max: 50.0,
        slot_len: 1.0,
        u_init: Point::new(u_init.0, u_init.1),
        u_final: Point::new(u_final.0, u_final.1),
    };
    Scenario::new(gbs, radio, uav, task_bits)
}
