//! Energy-efficient resource-block assignment and power allocation for
//! H-CRAN with control/data separation and capacity-limited wireless
//! fronthaul.

pub mod baselines;
pub mod channel_gen;
pub mod error;
pub mod harness;
pub mod model;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type SystemConfigF64 = model::SystemConfig<f64>;
pub type SystemConfigF32 = model::SystemConfig<f32>;
pub type TopologyF64 = model::Topology<f64>;
pub type TopologyF32 = model::Topology<f32>;
pub type ChannelStateF64 = model::ChannelState<f64>;
pub type ChannelStateF32 = model::ChannelState<f32>;
pub type PowerModelF64 = model::PowerModel<f64>;
pub type PowerModelF32 = model::PowerModel<f32>;
pub type AllocationSolutionF64 = model::AllocationSolution<f64>;
pub type AllocationSolutionF32 = model::AllocationSolution<f32>;
pub type DualStateF64 = solver::DualState<f64>;
pub type DualStateF32 = solver::DualState<f32>;
pub type SolverReportF64 = solver::SolverReport<f64>;
pub type SolverReportF32 = solver::SolverReport<f32>;
pub type DropSpecF64 = channel_gen::DropSpec<f64>;
pub type DropSpecF32 = channel_gen::DropSpec<f32>;
