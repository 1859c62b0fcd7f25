//! Solver tolerances and iteration budgets shared by every stage of the planner.

use crate::error::ConfigError;

/// Absolute feasibility tolerance in natural units: metres, seconds and
/// megabits (bits scaled by 10⁻⁶).
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Bits are normalized by this factor wherever a solver works in "natural" units.
pub const BITS_SCALE: f64 = 1e6;

/// Hard cap on the slot count explored by the doubling search.
pub const MAX_SLOTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Relative objective improvement below which the SCA loop stops.
    pub sca_tol: f64,
    pub sca_max_iters: usize,
    /// Relative bit improvement below which the alternating loop stops.
    pub alt_tol: f64,
    pub alt_max_iters: usize,
    /// Barrier duality-gap target for each convexified trajectory subproblem (megabits).
    pub subproblem_tol: f64,
    /// Relative shortfall tolerated when comparing achieved bits with the task size.
    pub feasibility_tol: f64,
    /// Multiplier applied to the slot count while searching for a feasible upper bracket.
    pub growth_factor: f64,
    /// Absolute tolerance used by solution validation.
    pub validation_tol: f64,
    /// Largest slot count the bisection is allowed to probe.
    pub max_slots: usize,
    /// Emit one log record per SCA iteration.
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            sca_tol: 1e-4,
            sca_max_iters: 50,
            alt_tol: 1e-4,
            alt_max_iters: 20,
            subproblem_tol: 1e-6,
            feasibility_tol: 1e-9,
            growth_factor: 2.0,
            validation_tol: FEASIBILITY_TOL,
            max_slots: MAX_SLOTS,
            trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("sca_tol", self.sca_tol),
            ("alt_tol", self.alt_tol),
            ("subproblem_tol", self.subproblem_tol),
            ("feasibility_tol", self.feasibility_tol),
            ("validation_tol", self.validation_tol),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::NotPositive(name));
            }
        }
        if !(self.growth_factor.is_finite() && self.growth_factor > 1.0) {
            return Err(ConfigError::NotPositive("growth_factor"));
        }
        if self.sca_max_iters == 0 {
            return Err(ConfigError::ZeroIterations("sca_max_iters"));
        }
        if self.alt_max_iters == 0 {
            return Err(ConfigError::ZeroIterations("alt_max_iters"));
        }
        if self.max_slots == 0 {
            return Err(ConfigError::ZeroIterations("max_slots"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_zero_iteration_caps() {
        let cfg = SolverConfig { sca_max_iters: 0, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(ConfigError::ZeroIterations("sca_max_iters"))));
        let cfg = SolverConfig { alt_tol: -1.0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
