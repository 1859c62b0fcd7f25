#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavmec::model::{reference_scenario, Point};
use uavmec::{Scenario, Trajectory};

/// Maximum of `c·x` over `{A x ≤ b, x ≥ 0}` by enumerating every vertex:
/// each choice of `n` tight rows among the `m + n` inequalities that gives a
/// nonsingular system and a feasible point. `None` when no vertex is feasible.
pub fn vertex_max(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let n = c.len();
    let mut rows: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().cloned()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = -1.0;
        rows.push((e, 0.0));
    }
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut best: Option<f64> = None;
    let mut pick = Vec::with_capacity(n);
    choose(rows.len(), n, 0, &mut pick, &mut |sel| {
        let m = DMatrix::from_fn(n, n, |i, j| rows[sel[i]].0[j]);
        let rhs = DVector::from_iterator(n, sel.iter().map(|&i| rows[i].1));
        let Some(x) = m.lu().solve(&rhs) else { return };
        if x.iter().any(|v| !v.is_finite()) {
            return;
        }
        let feasible = rows.iter().all(|(r, bi)| r.iter().zip(x.iter()).map(|(p, q)| p * q).sum::<f64>() <= bi + 1e-9 * scale);
        if feasible {
            let v: f64 = c.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    });
    best
}

fn choose(total: usize, k: usize, start: usize, pick: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if pick.len() == k {
        f(pick);
        return;
    }
    for i in start..total {
        if total - i < k - pick.len() {
            break;
        }
        pick.push(i);
        choose(total, k, i + 1, pick, f);
        pick.pop();
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random walk with steps no longer than `s_max`, starting at `start`.
pub fn random_walk(rng: &mut ChaCha8Rng, start: Point, n_slots: usize, s_max: f64) -> Vec<Point> {
    let mut pts = vec![start];
    for _ in 0..n_slots {
        let r = s_max * rng.random::<f64>().sqrt();
        let th = rng.random::<f64>() * std::f64::consts::TAU;
        let last = *pts.last().unwrap();
        pts.push(last + Point::new(r * th.cos(), r * th.sin()));
    }
    pts
}

/// Reference-parameter scenario whose endpoints are those of a random walk,
/// plus the walk as a trajectory.
pub fn random_instance(rng: &mut ChaCha8Rng, n_slots: usize, k: usize) -> (Scenario, Trajectory) {
    let gbs: Vec<(f64, f64)> = (0..k).map(|_| (rng.random_range(-300.0..300.0), rng.random_range(-300.0..300.0))).collect();
    let start = Point::new(rng.random_range(-200.0..200.0), rng.random_range(-200.0..200.0));
    let walk = random_walk(rng, start, n_slots, 50.0);
    let end = *walk.last().unwrap();
    let s = reference_scenario(&gbs, (start.x, start.y), (end.x, end.y), 0.0).unwrap();
    (s, Trajectory::new(walk).unwrap())
}

/// The five-GBS layout shipped in `scenarios/golden.toml`.
pub const GOLDEN_GBS: [(f64, f64); 5] = [(500.0, 0.0), (150.0, 400.0), (350.0, -350.0), (700.0, 450.0), (900.0, -300.0)];

pub fn golden(task_bits: f64) -> Scenario {
    reference_scenario(&GOLDEN_GBS, (0.0, 0.0), (1000.0, 0.0), task_bits).unwrap()
}

pub fn hover(task_bits: f64) -> Scenario {
    reference_scenario(&[(0.0, 0.0)], (0.0, 0.0), (0.0, 0.0), task_bits).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
