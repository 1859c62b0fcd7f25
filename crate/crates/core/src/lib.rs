//! Joint trajectory and computation-offloading design for a cellular-connected
//! UAV that offloads task-input bits to edge servers at ground base stations.
//!
//! The mission-time problem is solved by bisection over the slot count. Each
//! probe maximizes offloaded bits by alternating between a time-allocation LP
//! ([`lp`]) and a successive-convex-approximation trajectory update ([`sca`]).
//! Two reference schemes live in [`baselines`].

pub mod baselines;
pub mod config;
pub mod error;
pub mod io;
pub mod lp;
pub mod model;
pub mod planner;
pub mod sca;

pub use config::SolverConfig;
pub use error::{Error, Result};
pub use model::{Gbs, Kinematics, Point, Radio, Scenario, TimeAllocation, Trajectory};
pub use planner::{min_completion_time, MissionPlan, Scheme};

