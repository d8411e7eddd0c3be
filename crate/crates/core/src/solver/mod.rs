//! Dinkelbach outer loop, Lagrangian dual inner loop and their building blocks.

pub mod assign;
pub mod dinkelbach;
pub mod dual;
pub mod duals;
pub mod feasibility;
pub mod fronthaul;
mod powerfit;
pub(crate) mod recovery;
pub mod waterfill;

pub use assign::{assign_rbs, assign_rbs_grouped, ZERO_Q_PRICE_FLOOR};
pub use dinkelbach::{solve_ee, solve_ee_grouped, solve_ee_with_incumbent, SolverReport, SolverStatus};
pub use dual::{solve_dual, solve_dual_grouped, DualSolve};
pub use duals::{subgradient_step, DualScales, DualState, StepSizes, Subgradient};
pub use feasibility::{check_feasibility, check_feasibility_grouped, FeasibilityReport};
pub use fronthaul::FronthaulGroups;
pub use waterfill::{h_metric, waterfill_power};
