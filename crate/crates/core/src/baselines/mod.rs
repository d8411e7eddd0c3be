//! Comparison machinery: the static fronthaul split, the conventional power
//! model and an exhaustive oracle for tiny instances.

pub mod oracle;
pub mod power;
pub mod static_alloc;

pub use oracle::{brute_force_solve, power_grid, OracleOptions, OracleResult};
pub use power::{build_power_model, calibrate_baseband, mean_ee_gap, PowerProfile};
pub use static_alloc::{solve_static, solve_static_capped};
