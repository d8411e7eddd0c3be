use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{AllocationSolution, ChannelState, PowerModel, SystemConfig, Topology};
use crate::scalar::Scalar;
use crate::solver::assign::{check_dual_dims, Problem, RbPlan};
use crate::solver::duals::{subgradient_step, DualState, StepSizes, Subgradient};
use crate::solver::feasibility::{check_feasibility_grouped, FeasibilityReport};
use crate::solver::fronthaul::FronthaulGroups;
use crate::solver::powerfit::exact_repower;
use crate::solver::recovery::{is_plan_feasible, objective, polish, recover};

/// Local-search passes over the best recovered plan of each inner solve.
const POLISH_PASSES: usize = 4;

pub(crate) struct DualOutcome<T> {
    /// Best feasible plan seen and its objective R_T − q·P_T.
    pub best: Option<(RbPlan<T>, T)>,
    pub duals: DualState<T>,
    pub iters: usize,
    pub last_plan: RbPlan<T>,
}

pub(crate) fn subgradient<T: Scalar>(prob: &Problem<'_, T>, plan: &RbPlan<T>) -> Subgradient<T> {
    let (nk, nd, nr) = (prob.num_ues(), prob.num_dbs(), prob.num_rbs());
    let rates = plan.ue_rates(nk);
    let spent = plan.dbs_power(nd, nr);
    let carried = plan.group_rates(prob.groups, nr);
    Subgradient {
        mu: (0..nk).map(|k| rates[k] - prob.rmin[k]).collect(),
        gamma: (0..nd).map(|m| prob.pmax[m] - spent[m]).collect(),
        upsilon: prob
            .groups
            .caps_bps
            .iter()
            .zip(&carried)
            .map(|(&c, &r)| c - r)
            .collect(),
    }
}

fn movement<T: Scalar>(prob: &Problem<'_, T>, a: &DualState<T>, b: &DualState<T>) -> T {
    let mut mv = T::zero();
    for (x, y) in a.mu.iter().zip(&b.mu) {
        mv = mv.max((*x - *y).abs());
    }
    for ((x, y), s) in a.gamma.iter().zip(&b.gamma).zip(&prob.scales.gamma_ref) {
        mv = mv.max((*x - *y).abs() / *s);
    }
    for (x, y) in a.upsilon.iter().zip(&b.upsilon) {
        mv = mv.max((*x - *y).abs());
    }
    mv
}

/// Projected subgradient loop at fixed q, warm-started from `start`.
///
/// `incumbent` competes with the recovered iterates, so the returned plan is
/// never worse than it at this q.
pub(crate) fn run_dual<T: Scalar>(
    prob: &Problem<'_, T>,
    q: T,
    start: DualState<T>,
    incumbent: Option<&RbPlan<T>>,
) -> Result<DualOutcome<T>> {
    let cfg = prob.cfg;
    let mut duals = start;
    let mut best: Option<(RbPlan<T>, T)> = incumbent
        .filter(|p| is_plan_feasible(prob, p))
        .map(|p| (p.clone(), objective(prob, p, q)));
    let mut last_improve = 0;
    let mut last_plan = prob.empty_plan();
    let mut iters = 0;
    for it in 1..=cfg.dual_max_iters {
        iters = it;
        let plan = prob.assign(q, &duals)?;
        let grad = subgradient(prob, &plan);

        let mut cand = plan.clone();
        if recover(prob, &mut cand, q) {
            let obj = objective(prob, &cand, q);
            if best.as_ref().is_none_or(|(_, b)| obj > *b) {
                best = Some((cand, obj));
                last_improve = it;
            }
        }
        last_plan = plan;

        let steps = StepSizes::schedule(cfg, it, &grad, &prob.scales);
        let next = subgradient_step(&duals, &grad, &steps);
        let mv = movement(prob, &duals, &next);
        duals = next;
        if mv < cfg.dual_tol {
            break;
        }
        if cfg.dual_stall_iters > 0 && best.is_some() && it - last_improve >= cfg.dual_stall_iters
        {
            break;
        }
    }
    if let Some((plan, obj)) = best.as_mut() {
        polish(prob, plan, q, POLISH_PASSES);
        *obj = objective(prob, plan, q);
        if let Some(fitted) = exact_repower(prob, plan, q) {
            let v = objective(prob, &fitted, q);
            if v > *obj {
                *plan = fitted;
                *obj = v;
            }
        }
    }
    Ok(DualOutcome {
        best,
        duals,
        iters,
        last_plan,
    })
}

/// Result of the inner dual problem at a fixed q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSolve<T> {
    /// Best feasible allocation seen, or the last raw iterate when none was
    /// feasible.
    pub solution: AllocationSolution<T>,
    pub duals: DualState<T>,
    pub feasible: bool,
    pub iterations: usize,
    pub residuals: FeasibilityReport<T>,
}

/// Lagrangian dual decomposition at fixed `q` with the pooled fronthaul
/// constraint, starting from zero multipliers.
pub fn solve_dual<T: Scalar>(
    ch: &ChannelState<T>,
    q: T,
    topo: &Topology<T>,
    cfg: &SystemConfig<T>,
    pm: &PowerModel<T>,
) -> Result<DualSolve<T>> {
    let groups = FronthaulGroups::pooled(topo, cfg.fronthaul_cap_bps);
    solve_dual_grouped(ch, q, topo, cfg, pm, &groups, None)
}

pub fn solve_dual_grouped<T: Scalar>(
    ch: &ChannelState<T>,
    q: T,
    topo: &Topology<T>,
    cfg: &SystemConfig<T>,
    pm: &PowerModel<T>,
    groups: &FronthaulGroups<T>,
    start: Option<DualState<T>>,
) -> Result<DualSolve<T>> {
    let prob = Problem::new(ch, topo, cfg, pm, groups)?;
    let start =
        start.unwrap_or_else(|| DualState::zeros(ch.num_ues, ch.num_dbs, groups.num_groups()));
    check_dual_dims(&prob, &start)?;
    let out = run_dual(&prob, q, start, None)?;
    let feasible = out.best.is_some();
    let plan = out.best.map(|(p, _)| p).unwrap_or(out.last_plan);
    let mut solution = prob.to_solution(&plan);
    solution.ee_bits_per_joule = plan.total_rate() / pm.total_for(plan.transmit_power());
    solution.duals = out.duals.clone();
    let residuals = check_feasibility_grouped(&solution, ch, topo, cfg, groups)?;
    Ok(DualSolve {
        solution,
        duals: out.duals,
        feasible,
        iterations: out.iters,
        residuals,
    })
}
