//! Optimal values to compare heuristics against: an exact search for tiny
//! markets and an LP upper bound that scales to full experiments.

pub mod arc_lp;
pub mod exact;
pub mod lp;
pub mod simplex;

pub use exact::{brute_force_opt, ExactOptions, ExactSolution};
pub use lp::{lp_bound, LpOptions, LpSolution, PathColumn};
