//! Dense two-phase tableau simplex.
//!
//! Pricing is Dantzig's largest-coefficient rule; after a run of degenerate
//! pivots the solve switches to Bland's rule for the rest of the phase,
//! which rules out cycling.

use crate::error::LpError;

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-10;
const FEAS_EPS: f64 = 1e-8;
const DEGENERATE_STREAK: usize = 50;

type SparseRow = Vec<(usize, f64)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
struct Row {
    coeffs: Vec<(usize, f64)>,
    sense: Sense,
    rhs: f64,
}

/// `maximize cᵀx` subject to sparse rows and `x ≥ lower`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Row>,
    lower: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

impl LinearProgram {
    /// New maximization problem with all variables bounded below by zero.
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self { objective, rows: Vec::new(), lower: vec![0.0; n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn set_lower_bounds(&mut self, lower: Vec<f64>) -> Result<(), LpError> {
        if lower.len() != self.objective.len() {
            return Err(LpError::Malformed(format!(
                "{} lower bounds for {} variables",
                lower.len(),
                self.objective.len()
            )));
        }
        self.lower = lower;
        Ok(())
    }

    /// Add a row given as dense coefficients.
    pub fn add_constraint(&mut self, coeffs: &[f64], sense: Sense, rhs: f64) -> Result<(), LpError> {
        if coeffs.len() != self.objective.len() {
            return Err(LpError::Malformed(format!(
                "row has {} coefficients for {} variables",
                coeffs.len(),
                self.objective.len()
            )));
        }
        let sparse = coeffs.iter().copied().enumerate().filter(|&(_, a)| a != 0.0).collect();
        self.add_sparse_constraint(sparse, sense, rhs)
    }

    /// Add a row given as `(variable, coefficient)` pairs.
    pub fn add_sparse_constraint(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Result<(), LpError> {
        if let Some(&(j, _)) = coeffs.iter().find(|&&(j, _)| j >= self.objective.len()) {
            return Err(LpError::Malformed(format!("variable index {j} out of range")));
        }
        self.rows.push(Row { coeffs, sense, rhs });
        Ok(())
    }

    fn check_finite(&self) -> Result<(), LpError> {
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.lower.iter().all(|v| v.is_finite())
            && self.rows.iter().all(|r| r.rhs.is_finite() && r.coeffs.iter().all(|(_, a)| a.is_finite()));
        if finite {
            Ok(())
        } else {
            Err(LpError::Malformed("non-finite coefficient".into()))
        }
    }

    /// Evaluate `cᵀx`.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, lb) in x.iter().zip(&self.lower) {
            worst = worst.max(lb - v);
        }
        for r in &self.rows {
            let lhs: f64 = r.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let viol = match r.sense {
                Sense::Le => lhs - r.rhs,
                Sense::Ge => r.rhs - lhs,
                Sense::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        self.check_finite()?;
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    /// Rows `0..m` are constraints, row `m` is the objective (reduced costs).
    data: Vec<f64>,
    width: usize,
    m: usize,
    n_struct: usize,
    /// First artificial column; columns `art_start..rhs_col` are artificials.
    art_start: usize,
    basis: Vec<usize>,
    pivots: usize,
    max_pivots: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.objective.len();
        let m = lp.rows.len();

        // Shift x = x' + lower and flip rows so every rhs is non-negative.
        let mut rows: Vec<(SparseRow, Sense, f64)> = lp
            .rows
            .iter()
            .map(|r| {
                let shift: f64 = r.coeffs.iter().map(|&(j, a)| a * lp.lower[j]).sum();
                (r.coeffs.clone(), r.sense, r.rhs - shift)
            })
            .collect();
        for (coeffs, sense, rhs) in rows.iter_mut() {
            if *rhs < 0.0 {
                coeffs.iter_mut().for_each(|(_, a)| *a = -*a);
                *rhs = -*rhs;
                *sense = match *sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
            }
        }

        let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
        let art_start = n + n_slack;
        let width = art_start + n_art + 1;
        let rhs_col = width - 1;
        let mut data = vec![0.0; (m + 1) * width];
        let mut basis = vec![0; m];

        let mut slack_col = n;
        let mut art_col = art_start;
        for (i, (coeffs, sense, rhs)) in rows.iter().enumerate() {
            let row = &mut data[i * width..(i + 1) * width];
            for &(j, a) in coeffs {
                row[j] += a;
            }
            row[rhs_col] = *rhs;
            match sense {
                Sense::Le => {
                    row[slack_col] = 1.0;
                    basis[i] = slack_col;
                    slack_col += 1;
                }
                Sense::Ge => {
                    row[slack_col] = -1.0;
                    slack_col += 1;
                    row[art_col] = 1.0;
                    basis[i] = art_col;
                    art_col += 1;
                }
                Sense::Eq => {
                    row[art_col] = 1.0;
                    basis[i] = art_col;
                    art_col += 1;
                }
            }
        }

        let max_pivots = 50 * (m + width) + 1000;
        Self { data, width, m, n_struct: n, art_start, basis, pivots: 0, max_pivots }
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    /// Load an objective (to maximize) over the first `ncols` columns into the
    /// reduced-cost row, eliminating basic columns.
    fn load_objective(&mut self, cost: &[f64]) {
        let w = self.width;
        let m = self.m;
        let obj = m * w;
        self.data[obj..obj + w].iter_mut().for_each(|v| *v = 0.0);
        for (j, &c) in cost.iter().enumerate() {
            self.data[obj + j] = -c;
        }
        for i in 0..m {
            let b = self.basis[i];
            let cb = -self.data[obj + b];
            if cb != 0.0 {
                for j in 0..w {
                    self.data[obj + j] += cb * self.data[i * w + j];
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.data[r * w + c];
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        prow.iter_mut().for_each(|v| *v /= p);
        prow[c] = 1.0;
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Optimize the loaded objective over columns `< ncols`. Returns false
    /// when the problem is unbounded.
    fn optimize(&mut self, ncols: usize) -> Result<bool, LpError> {
        let m = self.m;
        let rhs = self.rhs_col();
        let mut bland = false;
        let mut degenerate = 0usize;
        loop {
            if self.pivots > self.max_pivots {
                return Err(LpError::IterationLimit(self.max_pivots));
            }
            let obj = m * self.width;
            let entering = if bland {
                (0..ncols).find(|&j| self.data[obj + j] < -COST_EPS)
            } else {
                let mut best = None;
                let mut best_val = -COST_EPS;
                for j in 0..ncols {
                    let v = self.data[obj + j];
                    if v < best_val {
                        best_val = v;
                        best = Some(j);
                    }
                }
                best
            };
            let Some(c) = entering else { return Ok(true) };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.at(i, c);
                if a > PIVOT_EPS {
                    let ratio = self.at(i, rhs) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    }
                }
            }
            let Some((r, ratio)) = leave else { return Ok(false) };
            if ratio.abs() <= 1e-12 {
                degenerate += 1;
                if degenerate >= DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        let n = self.n_struct;
        let rhs = self.rhs_col();
        let has_artificials = self.art_start < rhs;

        if has_artificials {
            let mut cost = vec![0.0; rhs];
            cost[self.art_start..rhs].iter_mut().for_each(|c| *c = -1.0);
            self.load_objective(&cost);
            self.optimize(rhs)?;
            let infeasibility: f64 =
                (0..self.m).filter(|&i| self.basis[i] >= self.art_start).map(|i| self.at(i, rhs)).sum();
            let scale = 1.0 + (0..self.m).map(|i| self.at(i, rhs).abs()).fold(0.0, f64::max);
            if infeasibility > FEAS_EPS * scale {
                return Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    x: vec![f64::NAN; n],
                    objective: f64::NAN,
                    pivots: self.pivots,
                });
            }
            // Drive remaining (zero-valued) artificials out of the basis.
            for i in 0..self.m {
                if self.basis[i] >= self.art_start {
                    if let Some(c) = (0..self.art_start).find(|&j| self.at(i, j).abs() > 1e-9) {
                        self.pivot(i, c);
                    } else {
                        // Redundant row: zero it so it never constrains phase 2.
                        let w = self.width;
                        self.data[i * w..(i + 1) * w].iter_mut().for_each(|v| *v = 0.0);
                    }
                }
            }
        }

        let mut cost = vec![0.0; self.art_start];
        cost[..n].copy_from_slice(&lp.objective);
        self.load_objective(&cost);
        if !self.optimize(self.art_start)? {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                x: vec![f64::NAN; n],
                objective: f64::INFINITY,
                pivots: self.pivots,
            });
        }

        let mut x = lp.lower.clone();
        for i in 0..self.m {
            let b = self.basis[i];
            if b < n {
                x[b] += self.at(i, rhs);
            }
        }
        let objective = lp.objective_value(&x);
        Ok(LpSolution { status: LpStatus::Optimal, x, objective, pivots: self.pivots })
    }
}
