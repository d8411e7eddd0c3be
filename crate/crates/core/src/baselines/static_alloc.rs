use crate::error::Result;
use crate::model::{AllocationSolution, ChannelState, PowerModel, SystemConfig, Topology};
use crate::scalar::Scalar;
use crate::solver::{solve_ee_grouped, FronthaulGroups, SolverReport};

/// Same Dinkelbach/dual pipeline with the fronthaul capacity split equally
/// across the wireless stations.
pub fn solve_static<T: Scalar>(
    ch: &ChannelState<T>,
    topo: &Topology<T>,
    cfg: &SystemConfig<T>,
    pm: &PowerModel<T>,
) -> Result<(AllocationSolution<T>, SolverReport<T>)> {
    solve_static_capped(ch, topo, cfg, pm, None)
}

/// Static split with an explicit per-station cap instead of the equal share.
pub fn solve_static_capped<T: Scalar>(
    ch: &ChannelState<T>,
    topo: &Topology<T>,
    cfg: &SystemConfig<T>,
    pm: &PowerModel<T>,
    per_dbs_cap_bps: Option<T>,
) -> Result<(AllocationSolution<T>, SolverReport<T>)> {
    let groups = FronthaulGroups::per_dbs(topo, cfg.fronthaul_cap_bps, per_dbs_cap_bps);
    solve_ee_grouped(ch, topo, cfg, pm, &groups)
}
