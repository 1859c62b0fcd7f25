//! Exact open-path visiting order by Held–Karp dynamic programming.

use crate::error::TspError;
use crate::model::{Point, Scenario};

/// Largest node count the exact solver accepts.
pub const MAX_EXACT_NODES: usize = 20;

/// Visiting order over all GBSs (zero-based indices) and the length of
/// `u_I → ν_order[0] → … → ν_order[K-1] → u_F`.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitOrder {
    pub order: Vec<usize>,
    pub length: f64,
}

/// Shortest open path from `u_I` through every GBS to `u_F`.
pub fn tsp_visit_order(scenario: &Scenario) -> Result<VisitOrder, TspError> {
    let nodes: Vec<Point> = scenario.gbs().iter().map(|g| g.position).collect();
    open_path_order(scenario.u_init(), scenario.u_final(), &nodes)
}

/// Shortest `start → all nodes → end` path. Among optimal orders (to within
/// 1e-9 relative) the lexicographically smallest permutation is returned.
pub fn open_path_order(start: Point, end: Point, nodes: &[Point]) -> Result<VisitOrder, TspError> {
    let k = nodes.len();
    if k > MAX_EXACT_NODES {
        return Err(TspError::TooManyNodes { got: k, max: MAX_EXACT_NODES });
    }
    if k == 0 {
        return Ok(VisitOrder { order: Vec::new(), length: (end - start).norm() });
    }
    let dist = |a: &Point, b: &Point| (a - b).norm();
    let full = (1usize << k) - 1;

    // tail[set * k + j]: shortest path from node j through every node of `set`
    // (j ∉ set) and on to `end`.
    let mut tail = vec![f64::INFINITY; (full + 1) * k];
    for j in 0..k {
        tail[j] = dist(&nodes[j], &end);
    }
    for set in 1..=full {
        for j in 0..k {
            if set & (1 << j) != 0 {
                continue;
            }
            let mut best = f64::INFINITY;
            let mut rest = set;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let v = dist(&nodes[j], &nodes[i]) + tail[(set & !(1 << i)) * k + i];
                if v < best {
                    best = v;
                }
            }
            tail[set * k + j] = best;
        }
    }

    let through = |from: &Point, remaining: usize, i: usize| dist(from, &nodes[i]) + tail[(remaining & !(1 << i)) * k + i];
    let total = (0..k).map(|i| through(&start, full, i)).fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * total.max(1.0);

    let mut order = Vec::with_capacity(k);
    let mut remaining = full;
    let mut from = start;
    let mut budget = total;
    while remaining != 0 {
        let next = (0..k)
            .filter(|&i| remaining & (1 << i) != 0)
            .find(|&i| through(&from, remaining, i) <= budget + tol)
            .expect("an optimal continuation always exists");
        budget -= dist(&from, &nodes[next]);
        remaining &= !(1 << next);
        from = nodes[next];
        order.push(next);
    }

    let length = path_length(start, end, nodes, &order);
    Ok(VisitOrder { order, length })
}

/// Length of `start → nodes[order…] → end`.
pub fn path_length(start: Point, end: Point, nodes: &[Point], order: &[usize]) -> f64 {
    let mut at = start;
    let mut len = 0.0;
    for &i in order {
        len += (nodes[i] - at).norm();
        at = nodes[i];
    }
    len + (end - at).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn single_node() {
        let r = open_path_order(p(0.0, 0.0), p(10.0, 0.0), &[p(5.0, 5.0)]).unwrap();
        assert_eq!(r.order, vec![0]);
    }

    #[test]
    fn collinear_nodes_are_visited_in_order() {
        let r = open_path_order(p(0.0, 0.0), p(300.0, 0.0), &[p(100.0, 0.0), p(200.0, 0.0)]).unwrap();
        assert_eq!(r.order, vec![0, 1]);
        assert!((r.length - 300.0).abs() < 1e-12);
        let r = open_path_order(p(0.0, 0.0), p(300.0, 0.0), &[p(200.0, 0.0), p(100.0, 0.0)]).unwrap();
        assert_eq!(r.order, vec![1, 0]);
    }

    #[test]
    fn ties_pick_lexicographically_smallest() {
        // Two mirror-image optimal tours; [0, 1] must win.
        let nodes = [p(0.0, 10.0), p(0.0, -10.0)];
        let r = open_path_order(p(0.0, 0.0), p(0.0, 0.0), &nodes).unwrap();
        assert_eq!(r.order, vec![0, 1]);
    }

    #[test]
    fn rejects_too_many_nodes() {
        let nodes = vec![p(0.0, 0.0); MAX_EXACT_NODES + 1];
        assert!(matches!(
            open_path_order(p(0.0, 0.0), p(1.0, 1.0), &nodes),
            Err(TspError::TooManyNodes { got: 21, max: 20 })
        ));
    }
}
