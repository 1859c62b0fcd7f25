//! Linear programming: a small dense simplex engine and the time-allocation
//! problem built on top of it.

mod allocation;
mod simplex;

pub use allocation::{
    allocation_program, capacity_bound, rate_table, solve_time_allocation, tdma_bound, AllocationResult,
};
pub use simplex::{LinearProgram, LpSolution, LpStatus, Sense};
