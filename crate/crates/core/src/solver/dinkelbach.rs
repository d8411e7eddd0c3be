use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{total_rate, AllocationSolution, ChannelState, Diagnostics, PowerModel, SystemConfig, Topology};
use crate::scalar::Scalar;
use crate::solver::assign::{Problem, RbPlan};
use crate::solver::dual::run_dual;
use crate::solver::duals::DualState;
use crate::solver::feasibility::check_feasibility_grouped;
use crate::solver::fronthaul::FronthaulGroups;
use crate::solver::recovery::{is_plan_feasible, STRICT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Converged,
    MaxIters,
    /// No iterate satisfied every constraint.
    Infeasible,
}

impl SolverStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxIters => "max_iters",
            Self::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport<T> {
    pub status: SolverStatus,
    /// q_0 = 0 followed by every updated ratio.
    pub q_trace: Vec<T>,
    /// F(q_n) = R_T − q_n·P_T for each outer iterate.
    pub f_trace: Vec<T>,
    pub dual_iters: Vec<usize>,
    /// Minimum relative constraint slack of the returned allocation.
    pub min_relative_slack: T,
    /// The caller-supplied incumbent beat the Dinkelbach result.
    #[serde(default)]
    pub incumbent_used: bool,
}

impl<T: Scalar> SolverReport<T> {
    pub fn is_feasible(&self) -> bool {
        self.status != SolverStatus::Infeasible
    }
}

/// Maximises R_T / P_T under the pooled fronthaul constraint.
///
/// With two or more wireless stations the equal split of the capacity is
/// solved first; its allocation also satisfies the pooled cap and enters as
/// the incumbent.
pub fn solve_ee<T: Scalar>(
    ch: &ChannelState<T>,
    topo: &Topology<T>,
    cfg: &SystemConfig<T>,
    pm: &PowerModel<T>,
) -> Result<(AllocationSolution<T>, SolverReport<T>)> {
    let groups = FronthaulGroups::pooled(topo, cfg.fronthaul_cap_bps);
    let split = FronthaulGroups::per_dbs(topo, cfg.fronthaul_cap_bps, None);
    let mut incumbent = None;
    if split.num_groups() > 1 {
        let (sol, rep) = solve_ee_grouped(ch, topo, cfg, pm, &split)?;
        if rep.is_feasible() {
            incumbent = Some(sol);
        }
    }
    solve_ee_with_incumbent(ch, topo, cfg, pm, &groups, incumbent.as_ref())
}

/// Dinkelbach iteration with an arbitrary partition of the wireless
/// fronthaul capacity.
pub fn solve_ee_grouped<T: Scalar>(
    ch: &ChannelState<T>,
    topo: &Topology<T>,
    cfg: &SystemConfig<T>,
    pm: &PowerModel<T>,
    groups: &FronthaulGroups<T>,
) -> Result<(AllocationSolution<T>, SolverReport<T>)> {
    solve_ee_with_incumbent(ch, topo, cfg, pm, groups, None)
}

/// [`solve_ee_grouped`] that also knows a candidate allocation in advance,
/// for instance one computed under a tighter fronthaul split. When the
/// candidate satisfies `groups` and beats the converged ratio, the outer loop
/// resumes from it; it is returned as is if it still has the higher EE.
///
/// The fronthaul-free problem is solved first; when its answer already
/// respects every group cap it is kept, otherwise the capped problem is
/// solved from scratch.
pub fn solve_ee_with_incumbent<T: Scalar>(
    ch: &ChannelState<T>,
    topo: &Topology<T>,
    cfg: &SystemConfig<T>,
    pm: &PowerModel<T>,
    groups: &FronthaulGroups<T>,
    incumbent: Option<&AllocationSolution<T>>,
) -> Result<(AllocationSolution<T>, SolverReport<T>)> {
    let mut run = None;
    if groups.num_groups() > 0 {
        let free = FronthaulGroups {
            caps_bps: Vec::new(),
            group_of: vec![None; topo.num_dbs()],
        };
        let r = dinkelbach(ch, topo, cfg, pm, &free, incumbent)?;
        if r.status != SolverStatus::Infeasible
            && check_feasibility_grouped(&r.solution, ch, topo, cfg, groups)?.is_feasible(T::lit(STRICT_TOL))
        {
            run = Some(r);
        }
    }
    let mut run = match run {
        Some(r) => r,
        None => dinkelbach(ch, topo, cfg, pm, groups, incumbent)?,
    };
    let mut incumbent_used = run.seeded;
    if let Some(inc) = incumbent {
        inc.check_shape(ch)?;
        let feasible = check_feasibility_grouped(inc, ch, topo, cfg, groups)?.is_feasible(T::lit(STRICT_TOL));
        let ee = total_rate(inc, ch, cfg)? / pm.total_for(inc.transmit_power_w());
        let own = if run.status == SolverStatus::Infeasible {
            T::neg_infinity()
        } else {
            run.solution.ee_bits_per_joule
        };
        if feasible && ee > own {
            run.solution = inc.clone();
            run.solution.ee_bits_per_joule = ee;
            if run.status == SolverStatus::Infeasible {
                run.status = SolverStatus::MaxIters;
            }
            incumbent_used = true;
        }
    }

    let mut solution = run.solution;
    let mut duals = run.duals;
    duals.upsilon.resize(groups.num_groups(), T::zero());
    solution.duals = duals;
    let residuals = check_feasibility_grouped(&solution, ch, topo, cfg, groups)?;
    let min_relative_slack = residuals.min_relative_slack();
    solution.diagnostics = Diagnostics {
        dinkelbach_iters: run.dual_iters.len(),
        dual_iters: run.dual_iters.clone(),
        final_f: run.f_trace.last().copied().unwrap_or_else(T::zero),
        residuals: Some(residuals),
    };
    Ok((
        solution,
        SolverReport {
            status: run.status,
            q_trace: run.q_trace,
            f_trace: run.f_trace,
            dual_iters: run.dual_iters,
            min_relative_slack,
            incumbent_used,
        },
    ))
}

struct Run<T> {
    solution: AllocationSolution<T>,
    duals: DualState<T>,
    status: SolverStatus,
    q_trace: Vec<T>,
    f_trace: Vec<T>,
    dual_iters: Vec<usize>,
    /// The caller's allocation re-entered the outer loop.
    seeded: bool,
}

fn dinkelbach<T: Scalar>(
    ch: &ChannelState<T>,
    topo: &Topology<T>,
    cfg: &SystemConfig<T>,
    pm: &PowerModel<T>,
    groups: &FronthaulGroups<T>,
    seed: Option<&AllocationSolution<T>>,
) -> Result<Run<T>> {
    let prob = Problem::new(ch, topo, cfg, pm, groups)?;
    let mut st = State {
        q: T::zero(),
        duals: DualState::zeros(ch.num_ues, ch.num_dbs, groups.num_groups()),
        incumbent: None,
        q_trace: vec![T::zero()],
        f_trace: Vec::new(),
        dual_iters: Vec::new(),
        status: SolverStatus::MaxIters,
        last_raw: prob.empty_plan(),
        carried_iters: 0,
    };
    st.iterate(&prob)?;

    let mut seeded = false;
    if let Some(plan) = seed.map(|s| prob.plan_from(s)) {
        let ee = |p: &RbPlan<T>| p.total_rate() / pm.total_for(p.transmit_power());
        let own = match (&st.incumbent, st.status) {
            (Some(p), s) if s != SolverStatus::Infeasible => ee(p),
            _ => T::neg_infinity(),
        };
        if is_plan_feasible(&prob, &plan) && ee(&plan) > own && !st.f_trace.is_empty() {
            // The seed beats the fixed point, so the last inner solve fell
            // short: repeat it from the seed.
            if st.q_trace.len() > st.f_trace.len() {
                st.q_trace.pop();
            }
            st.f_trace.pop();
            st.carried_iters += st.dual_iters.pop().unwrap_or(0);
            st.q = st.q_trace.last().copied().unwrap_or_else(T::zero);
            st.incumbent = Some(plan);
            st.status = SolverStatus::MaxIters;
            st.iterate(&prob)?;
            seeded = true;
        }
    }

    let plan = st.incumbent.unwrap_or(st.last_raw);
    let mut solution = prob.to_solution(&plan);
    solution.ee_bits_per_joule = total_rate(&solution, ch, cfg)? / pm.total_for(solution.transmit_power_w());
    Ok(Run {
        solution,
        duals: st.duals,
        status: st.status,
        q_trace: st.q_trace,
        f_trace: st.f_trace,
        dual_iters: st.dual_iters,
        seeded,
    })
}

/// Outer-loop state. Between iterations `q` is the last entry of `q_trace`
/// and `f_trace` holds one value per earlier entry.
struct State<T> {
    q: T,
    duals: DualState<T>,
    incumbent: Option<RbPlan<T>>,
    q_trace: Vec<T>,
    f_trace: Vec<T>,
    dual_iters: Vec<usize>,
    status: SolverStatus,
    last_raw: RbPlan<T>,
    carried_iters: usize,
}

impl<T: Scalar> State<T> {
    fn iterate(&mut self, prob: &Problem<'_, T>) -> Result<()> {
        let cfg = prob.cfg;
        for _ in 0..cfg.dinkelbach_max_iters {
            let out = run_dual(prob, self.q, self.duals.clone(), self.incumbent.as_ref())?;
            self.duals = out.duals;
            let Some((plan, f)) = out.best else {
                self.dual_iters.push(self.carried_iters + out.iters);
                self.last_raw = out.last_plan;
                self.status = SolverStatus::Infeasible;
                return Ok(());
            };
            if self.f_trace.last().is_some_and(|&prev| f >= prev) {
                // The plan beats the previous iterate at the previous ratio
                // too, so that inner solve fell short: repeat it from this plan.
                self.q_trace.pop();
                self.f_trace.pop();
                self.carried_iters += out.iters + self.dual_iters.pop().unwrap_or(0);
                self.q = self.q_trace.last().copied().unwrap_or_else(T::zero);
                self.incumbent = Some(plan);
                continue;
            }
            self.dual_iters.push(self.carried_iters + out.iters);
            self.carried_iters = 0;
            self.f_trace.push(f);
            let power = prob.pm.total_for(plan.transmit_power());
            let next_q = plan.total_rate() / power;
            self.incumbent = Some(plan);
            if f.abs() < cfg.dinkelbach_tol * power {
                self.status = SolverStatus::Converged;
                if next_q > self.q {
                    self.q = next_q;
                    self.q_trace.push(next_q);
                }
                return Ok(());
            }
            self.q = next_q;
            self.q_trace.push(next_q);
        }
        Ok(())
    }
}
