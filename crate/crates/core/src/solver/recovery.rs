//! Primal recovery: turns a dual iterate into a C1–C4 feasible allocation.
//!
//! Three passes, in order: proportional power rescale for over-budget
//! stations (C2), rate trimming on over-cap fronthaul groups (C3), then
//! greedy RB hand-over to UEs below their floor (C1) within the remaining
//! power and fronthaul headroom. [`polish`] then searches single-slot
//! reassignments around a recovered plan.

use std::cmp::Ordering;

use crate::scalar::Scalar;
use crate::solver::assign::{Problem, RbPlan};

/// Relative tolerance for solver-internal feasibility decisions.
pub(crate) const STRICT_TOL: f64 = 1e-9;

pub(crate) fn recover<T: Scalar>(prob: &Problem<'_, T>, plan: &mut RbPlan<T>, q: T) -> bool {
    rescale_power(prob, plan);
    trim_fronthaul(prob, plan);
    fill_rate_floors(prob, plan, q);
    is_plan_feasible(prob, plan)
}

/// R_T − q·P_T of a plan.
pub(crate) fn objective<T: Scalar>(prob: &Problem<'_, T>, plan: &RbPlan<T>, q: T) -> T {
    plan.total_rate() - q * prob.pm.total_for(plan.transmit_power())
}

/// Water level of UE `k` that meets its floor with least power on the slots
/// it owns; zero when the floor is zero or there is nothing to fill.
fn floor_level<T: Scalar>(prob: &Problem<'_, T>, inv: &mut [T], floor: T) -> T {
    if floor <= T::zero() || inv.is_empty() {
        return T::zero();
    }
    inv.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let target = floor / prob.b0;
    let mut log_sum = T::zero();
    let mut level = T::zero();
    for (j, &x) in inv.iter().enumerate() {
        log_sum = log_sum + x.log2();
        level = ((target + log_sum) / T::from_count(j + 1)).exp2();
        if inv.get(j + 1).is_none_or(|&next| level <= next) {
            break;
        }
    }
    level
}

/// Re-derives every assigned power for the fixed assignment: the
/// unconstrained water level `B0/(ln2·q·φ_E)`, raised per UE where needed to
/// meet its floor with least power. Requires `q > 0`.
fn repower<T: Scalar>(prob: &Problem<'_, T>, plan: &mut RbPlan<T>, q: T) {
    let nr = prob.num_rbs();
    let free_level = prob.b0 / (T::LN_2() * q * prob.pm.phi_e);
    let mut slots_of: Vec<Vec<usize>> = vec![Vec::new(); prob.num_ues()];
    for (slot, o) in plan.owner.iter().enumerate() {
        if let Some(k) = o {
            slots_of[*k].push(slot);
        }
    }
    let mut inv = Vec::new();
    for (k, slots) in slots_of.iter().enumerate() {
        inv.clear();
        inv.extend(slots.iter().map(|&s| prob.inv_snr[prob.entry(k, s / nr, s % nr)]));
        let level = free_level.max(floor_level(prob, &mut inv, prob.rmin[k]));
        for &s in slots {
            let (m, n) = (s / nr, s % nr);
            let p = (level - prob.inv_snr[prob.entry(k, m, n)]).max(T::zero());
            plan.power[s] = p;
            plan.rate[s] = prob.rate(k, m, n, p);
        }
    }
    for s in 0..plan.owner.len() {
        if plan.owner[s].is_some() && plan.power[s] <= T::zero() {
            plan.owner[s] = None;
            plan.power[s] = T::zero();
            plan.rate[s] = T::zero();
        }
    }
}

/// Repowered and recovered copy of `plan`, if feasible.
fn settle<T: Scalar>(prob: &Problem<'_, T>, mut plan: RbPlan<T>, q: T) -> Option<RbPlan<T>> {
    if q > T::zero() {
        repower(prob, &mut plan, q);
    }
    recover(prob, &mut plan, q).then_some(plan)
}

/// Largest single-slot neighbourhood searched by [`polish`]; bigger
/// instances only get the repowering step.
pub(crate) const POLISH_MAX_MOVES: usize = 1024;

/// Repowers `plan`, then runs a first-improvement local search over
/// single-slot owner changes, each followed by repowering and recovery.
/// `plan` must be feasible; it is only replaced by feasible plans with a
/// strictly better objective.
pub(crate) fn polish<T: Scalar>(prob: &Problem<'_, T>, plan: &mut RbPlan<T>, q: T, max_passes: usize) {
    let nr = prob.num_rbs();
    let better = |a: T, b: T| a > b + T::lit(1e-12) * b.abs().max(T::one());
    let mut best = objective(prob, plan, q);
    if let Some(p) = settle(prob, plan.clone(), q) {
        let v = objective(prob, &p, q);
        if better(v, best) {
            *plan = p;
            best = v;
        }
    }
    let moves: usize = (0..prob.num_dbs()).map(|m| nr * (1 + prob.ues_of[m].len())).sum();
    if moves > POLISH_MAX_MOVES {
        return;
    }
    let level = if q > T::zero() {
        prob.b0 / (T::LN_2() * q * prob.pm.phi_e)
    } else {
        T::infinity()
    };
    for _ in 0..max_passes {
        let mut improved = false;
        for slot in 0..plan.owner.len() {
            let (m, n) = (slot / nr, slot % nr);
            let current = plan.owner[slot];
            let cands = std::iter::once(None).chain(prob.ues_of[m].iter().map(|&k| Some(k)));
            for cand in cands {
                if cand == current {
                    continue;
                }
                let mut trial = plan.clone();
                trial.owner[slot] = cand;
                match cand {
                    None => {
                        trial.power[slot] = T::zero();
                        trial.rate[slot] = T::zero();
                    }
                    Some(k) => {
                        let inv = prob.inv_snr[prob.entry(k, m, n)];
                        let p = (level - inv).min(prob.pmax[m]).max(inv);
                        trial.power[slot] = p;
                        trial.rate[slot] = prob.rate(k, m, n, p);
                    }
                }
                if let Some(t) = settle(prob, trial, q) {
                    let v = objective(prob, &t, q);
                    if better(v, best) {
                        *plan = t;
                        best = v;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
}

fn rescale_power<T: Scalar>(prob: &Problem<'_, T>, plan: &mut RbPlan<T>) {
    let nr = prob.num_rbs();
    let spent = plan.dbs_power(prob.num_dbs(), nr);
    for (m, &s) in spent.iter().enumerate() {
        if s <= prob.pmax[m] {
            continue;
        }
        let f = prob.pmax[m] / s;
        for n in 0..nr {
            let slot = m * nr + n;
            if let Some(k) = plan.owner[slot] {
                plan.power[slot] = plan.power[slot] * f;
                plan.rate[slot] = prob.rate(k, m, n, plan.power[slot]);
            }
        }
    }
}

fn trim_fronthaul<T: Scalar>(prob: &Problem<'_, T>, plan: &mut RbPlan<T>) {
    let nr = prob.num_rbs();
    let mut ue_rate = plan.ue_rates(prob.num_ues());
    let carried = plan.group_rates(prob.groups, nr);
    for (g, members) in prob.groups.members().iter().enumerate() {
        let mut excess = carried[g] - prob.groups.caps_bps[g];
        if excess <= T::zero() {
            continue;
        }
        // least rate-per-watt first
        let mut slots: Vec<usize> = members
            .iter()
            .flat_map(|&m| (0..nr).map(move |n| m * nr + n))
            .filter(|&s| plan.owner[s].is_some())
            .collect();
        slots.sort_by(|&a, &b| {
            let ea = plan.rate[a] / plan.power[a];
            let eb = plan.rate[b] / plan.power[b];
            ea.partial_cmp(&eb).unwrap_or(Ordering::Equal).then(a.cmp(&b))
        });
        for slot in slots {
            if excess <= T::zero() {
                break;
            }
            let k = plan.owner[slot].expect("filtered to owned slots");
            let surplus = (ue_rate[k] - prob.rmin[k]).max(T::zero());
            let cut = plan.rate[slot].min(surplus).min(excess);
            if cut <= T::zero() {
                continue;
            }
            let (m, n) = (slot / nr, slot % nr);
            let old = plan.rate[slot];
            let target = old - cut;
            if target <= old * T::lit(1e-12) {
                plan.owner[slot] = None;
                plan.power[slot] = T::zero();
                plan.rate[slot] = T::zero();
            } else {
                plan.power[slot] = prob.power_for_rate(k, m, n, target);
                plan.rate[slot] = prob.rate(k, m, n, plan.power[slot]);
            }
            let removed = old - plan.rate[slot];
            ue_rate[k] = ue_rate[k] - removed;
            excess = excess - removed;
        }
    }
}

struct Move<T> {
    slot: usize,
    power: T,
    rate: T,
    covers: bool,
    gain: T,
}

impl<T: Scalar> Move<T> {
    fn beats(&self, other: &Self) -> bool {
        match (self.covers, other.covers) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => self.gain > other.gain,
            (false, false) => self.rate > other.rate,
        }
    }
}

/// Serves UEs below their floor. Among moves that close the whole deficit
/// the one costing least objective wins; otherwise the largest rate does.
fn fill_rate_floors<T: Scalar>(prob: &Problem<'_, T>, plan: &mut RbPlan<T>, q: T) {
    let price = q * prob.pm.phi_e;
    let (nk, nd, nr) = (prob.num_ues(), prob.num_dbs(), prob.num_rbs());
    let mut ue_rate = plan.ue_rates(nk);
    if (0..nk).all(|k| ue_rate[k] >= prob.rmin[k]) {
        return;
    }
    let mut spent = plan.dbs_power(nd, nr);
    let carried = plan.group_rates(prob.groups, nr);
    let mut headroom: Vec<T> = prob
        .groups
        .caps_bps
        .iter()
        .zip(&carried)
        .map(|(&c, &r)| c - r)
        .collect();

    for k in 0..nk {
        loop {
            let deficit = prob.rmin[k] - ue_rate[k];
            if deficit <= T::zero() {
                break;
            }
            let mut best: Option<Move<T>> = None;
            for &m in &prob.dbs_of[k] {
                let free = (prob.pmax[m] - spent[m]).max(T::zero());
                let group = prob.groups.group_of[m];
                for n in 0..nr {
                    let slot = m * nr + n;
                    let (freed, old_rate) = match plan.owner[slot] {
                        None => (T::zero(), T::zero()),
                        Some(j) if j == k => continue,
                        Some(j) => {
                            if ue_rate[j] - prob.rmin[j] < plan.rate[slot] {
                                continue;
                            }
                            (plan.power[slot], plan.rate[slot])
                        }
                    };
                    let avail = free + freed;
                    if avail <= T::zero() {
                        continue;
                    }
                    let mut power = avail.min(prob.power_for_rate(k, m, n, deficit));
                    let mut rate = prob.rate(k, m, n, power);
                    if let Some(g) = group {
                        let allowed = headroom[g] + old_rate;
                        if allowed <= T::zero() {
                            continue;
                        }
                        if rate > allowed {
                            rate = allowed;
                            power = prob.power_for_rate(k, m, n, rate);
                        }
                    }
                    let mv = Move {
                        slot,
                        power,
                        rate,
                        covers: rate >= deficit * (T::one() - T::lit(STRICT_TOL)),
                        gain: (rate - old_rate) - price * (power - freed),
                    };
                    if best.as_ref().is_none_or(|b| mv.beats(b)) {
                        best = Some(mv);
                    }
                }
            }
            let Some(mv) = best else { break };
            if mv.rate <= T::zero() {
                break;
            }
            let m = mv.slot / nr;
            if let Some(j) = plan.owner[mv.slot] {
                ue_rate[j] = ue_rate[j] - plan.rate[mv.slot];
                spent[m] = spent[m] - plan.power[mv.slot];
                if let Some(g) = prob.groups.group_of[m] {
                    headroom[g] = headroom[g] + plan.rate[mv.slot];
                }
            }
            plan.owner[mv.slot] = Some(k);
            plan.power[mv.slot] = mv.power;
            plan.rate[mv.slot] = mv.rate;
            ue_rate[k] = ue_rate[k] + mv.rate;
            spent[m] = spent[m] + mv.power;
            if let Some(g) = prob.groups.group_of[m] {
                headroom[g] = headroom[g] - mv.rate;
            }
        }
    }
}

/// C1–C3 within [`STRICT_TOL`]; C4 holds by construction of [`RbPlan`].
pub(crate) fn is_plan_feasible<T: Scalar>(prob: &Problem<'_, T>, plan: &RbPlan<T>) -> bool {
    let tol = T::lit(STRICT_TOL);
    let (nk, nd, nr) = (prob.num_ues(), prob.num_dbs(), prob.num_rbs());
    let rates = plan.ue_rates(nk);
    if (0..nk).any(|k| rates[k] < prob.rmin[k] - tol * prob.scales.rate_ref[k]) {
        return false;
    }
    let spent = plan.dbs_power(nd, nr);
    if (0..nd).any(|m| spent[m] > prob.pmax[m] * (T::one() + tol)) {
        return false;
    }
    let carried = plan.group_rates(prob.groups, nr);
    !carried
        .iter()
        .zip(&prob.groups.caps_bps)
        .any(|(&r, &c)| r > c * (T::one() + tol))
}
