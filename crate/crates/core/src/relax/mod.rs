//! Convex relaxations of the selection problems.
//!
//! Binary selection constraints are relaxed to `[0, 1]`; the resulting
//! programs are solved by projected gradient over the constraint polytope,
//! with a logarithmic barrier for the eavesdropper-CRLB threshold of the
//! joint problem.

mod problems;
mod project;
mod solver;

pub use problems::{
    solve_relaxed_eav, solve_relaxed_jam, solve_relaxed_joint, solve_relaxed_power, SolverReport,
};
pub use project::{project_capped_simplex, FeasibleSet};
pub use solver::{SolverOptions, Termination};
