//! Result tables and summaries.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Point, Scenario, TimeAllocation, Trajectory};
use crate::planner::MissionPlan;

/// Format with 9 significant digits, then print the shortest decimal that
/// round-trips that value.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

/// Summary record of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scheme: String,
    pub n_slots: usize,
    pub t_s: f64,
    pub l_bits: f64,
    pub achieved_bits: f64,
    pub bits_per_gbs: Vec<f64>,
    pub sca_iterations: usize,
    pub outer_iterations: usize,
    pub probes: Vec<(usize, bool)>,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
}

/// A plan together with the context needed to serialize it.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultBundle {
    pub plan: MissionPlan,
    pub task_bits: f64,
    pub wall_time_s: f64,
}

impl ResultBundle {
    pub fn summary(&self) -> Summary {
        let plan = &self.plan;
        Summary {
            scheme: plan.scheme.to_string(),
            n_slots: plan.n_slots,
            t_s: plan.completion_time,
            l_bits: self.task_bits,
            achieved_bits: plan.achieved_bits,
            bits_per_gbs: plan.bits_per_gbs.clone(),
            sca_iterations: plan.diagnostics.sca_iterations,
            outer_iterations: plan.diagnostics.outer_trace.len().saturating_sub(1),
            probes: plan.diagnostics.bisection.clone(),
            wall_time_s: self.wall_time_s,
            warnings: plan.diagnostics.warnings.clone(),
        }
    }

    pub fn summary_toml(&self) -> String {
        toml::to_string(&self.summary()).expect("summary serializes")
    }

    /// One row per trajectory point: `slot, x_m, y_m`, then `tau_s_k, bits_k`
    /// for each GBS (`k` one-based). Row 0 is the start point and carries no
    /// offloading.
    pub fn trajectory_csv(&self, scenario: &Scenario) -> String {
        let k_gbs = scenario.num_gbs();
        let mut out = String::from("slot,x_m,y_m");
        for k in 1..=k_gbs {
            write!(out, ",tau_s_{k},bits_{k}").unwrap();
        }
        out.push('\n');
        for (n, u) in self.plan.trajectory.positions().iter().enumerate() {
            write!(out, "{n},{},{}", fmt_sig(u.x), fmt_sig(u.y)).unwrap();
            for k in 0..k_gbs {
                let (tau, bits) = if n == 0 {
                    (0.0, 0.0)
                } else {
                    let tau = self.plan.allocation.get(n, k);
                    (tau, tau * scenario.rate(u, k))
                };
                write!(out, ",{},{}", fmt_sig(tau), fmt_sig(bits)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Write `summary.toml` and `trajectory.csv` into `dir`.
    pub fn write_to(&self, scenario: &Scenario, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_atomic(&dir.join("summary.toml"), &self.summary_toml())?;
        write_atomic(&dir.join("trajectory.csv"), &self.trajectory_csv(scenario))
    }
}

/// Write through a temporary sibling and rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Read back a table written by [`ResultBundle::trajectory_csv`].
pub fn parse_trajectory_csv(text: &str, n_gbs: usize) -> Result<(Trajectory, TimeAllocation)> {
    let bad = |msg: String| Error::InvalidInput(format!("trajectory table: {msg}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty".into()))?;
    let width = 3 + 2 * n_gbs;
    if header.split(',').count() != width {
        return Err(bad(format!("expected {width} columns, header has {}", header.split(',').count())));
    }
    let mut positions = Vec::new();
    let mut taus = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells = line
            .split(',')
            .map(|c| c.parse::<f64>().map_err(|e| bad(format!("row {}: {e}", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        if cells.len() != width {
            return Err(bad(format!("row {} has {} cells", i + 1, cells.len())));
        }
        positions.push(Point::new(cells[1], cells[2]));
        if i > 0 {
            taus.push((0..n_gbs).map(|k| cells[3 + 2 * k]).collect());
        }
    }
    let trajectory = Trajectory::new(positions)?;
    let allocation = TimeAllocation::from_rows(taus)?;
    Ok((trajectory, allocation))
}

/// Absolute tolerance (m, s) for validating a trajectory read back from a
/// table, sized to the rounding of its largest coordinate.
pub fn table_tolerance(trajectory: &Trajectory) -> f64 {
    let scale = trajectory.positions().iter().map(|u| u.x.abs().max(u.y.abs())).fold(1.0, f64::max);
    1e-8 * scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(500.0), "500");
        assert_eq!(fmt_sig(0.1), "0.1");
        assert_eq!(fmt_sig(8_647_458.426_454_92), "8647458.43");
        assert_eq!(fmt_sig(-1.0 / 3.0), "-0.333333333");
        let x = 987.654_321_049_9;
        let back: f64 = fmt_sig(x).parse().unwrap();
        assert!((back - x).abs() <= 5e-9 * x);
        assert_eq!(fmt_sig(5e8), "500000000");
    }
}
