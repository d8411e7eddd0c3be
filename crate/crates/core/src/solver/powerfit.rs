//! Exact power allocation for a fixed RB assignment.
//!
//! Maximises R_T − q·P_T over the powers of the owned slots subject to the
//! rate floors, the station power budgets and the fronthaul group caps. Every
//! slot power has the water-filling form
//! `[(1 + μ_k − υ_g)·B0 / (ln2·(qφ_E + λ_m)) − σ/g]⁺`; the multipliers are
//! found by alternating between the UE floors and the fronthaul groups, with
//! each station budget re-fitted in closed form inside every group
//! evaluation.

use std::cmp::Ordering;

use crate::scalar::Scalar;
use crate::solver::assign::{Problem, RbPlan};
use crate::solver::recovery::recover;

const MAX_SWEEPS: usize = 100;
const MAX_NEWTON: usize = 100;
const MAX_BISECTIONS: usize = 200;
const MAX_DOUBLINGS: usize = 2000;
const SWEEP_TOL: f64 = 1e-12;

#[derive(Clone, Copy)]
struct Slot<T> {
    slot: usize,
    ue: usize,
    dbs: usize,
    rb: usize,
    inv: T,
}

struct Fit<'p, 'a, T> {
    prob: &'p Problem<'a, T>,
    base_price: T,
    slots_of_ue: Vec<Vec<Slot<T>>>,
    slots_of_dbs: Vec<Vec<Slot<T>>>,
    stations_of_group: Vec<Vec<usize>>,
    lam: Vec<T>,
    ups: Vec<T>,
    mu: Vec<T>,
}

impl<T: Scalar> Fit<'_, '_, T> {
    fn ups_at(&self, m: usize) -> T {
        self.prob.groups.group_of[m].map_or(T::zero(), |g| self.ups[g])
    }

    /// `B0/(ln2·π_m)`: water level per unit of slot weight.
    fn unit_level(&self, m: usize) -> T {
        self.prob.b0 / (T::LN_2() * (self.base_price + self.lam[m]))
    }

    fn power(&self, s: &Slot<T>) -> T {
        let w = T::one() + self.mu[s.ue] - self.ups_at(s.dbs);
        (w * self.unit_level(s.dbs) - s.inv).max(T::zero())
    }

    fn rate(&self, s: &Slot<T>) -> T {
        self.prob.rate(s.ue, s.dbs, s.rb, self.power(s))
    }

    /// Smallest μ_k meeting the floor of UE `k`. The UE rate is concave and
    /// increasing in `L = 1 + μ_k`, so Newton steps from below stay below the
    /// root.
    fn solve_mu(&mut self, k: usize) {
        self.mu[k] = T::zero();
        let floor = self.prob.rmin[k];
        if floor <= T::zero() || self.slots_of_ue[k].is_empty() {
            return;
        }
        let b0_ln2 = self.prob.b0 / T::LN_2();
        let mut l = T::one();
        for _ in 0..MAX_NEWTON {
            let (mut f, mut df) = (T::zero(), T::zero());
            let mut next_on = T::infinity();
            for s in &self.slots_of_ue[k] {
                let a = self.unit_level(s.dbs);
                let u = self.ups_at(s.dbs);
                let level = (l - u) * a;
                if level > s.inv {
                    f = f + self.prob.b0 * (level / s.inv).log2();
                    df = df + b0_ln2 / (l - u);
                } else {
                    next_on = next_on.min(u + s.inv / a);
                }
            }
            if f >= floor * (T::one() - T::lit(1e-14)) {
                break;
            }
            let step = if df > T::zero() {
                (floor - f) / df
            } else {
                T::zero()
            };
            let target = l + step;
            let next = if next_on.is_finite() && next_on > l && (df <= T::zero() || target > next_on) {
                next_on
            } else {
                target
            };
            if next.partial_cmp(&l) != Some(Ordering::Greater) {
                break;
            }
            l = next;
        }
        self.mu[k] = (l - T::one()).max(T::zero());
    }

    fn refresh_mu(&mut self) {
        for k in 0..self.mu.len() {
            self.solve_mu(k);
        }
    }

    /// Sets λ_m so that station `m` spends at most its budget with the
    /// current slot weights.
    fn fit_station(&mut self, m: usize) {
        self.lam[m] = T::zero();
        let cap = self.prob.pmax[m];
        let spent = self.slots_of_dbs[m]
            .iter()
            .map(|s| self.power(s))
            .fold(T::zero(), |a, b| a + b);
        if spent <= cap {
            return;
        }
        let b0_ln2 = self.prob.b0 / T::LN_2();
        let u = self.ups_at(m);
        // (weight, inverse SNR), by activation price descending
        let mut items: Vec<(T, T)> = self.slots_of_dbs[m]
            .iter()
            .map(|s| ((T::one() + self.mu[s.ue] - u) * b0_ln2, s.inv))
            .filter(|&(c, _)| c > T::zero())
            .collect();
        items.sort_by(|a, b| (b.0 / b.1).partial_cmp(&(a.0 / a.1)).unwrap_or(Ordering::Equal));
        let (mut sum_c, mut sum_inv) = (T::zero(), T::zero());
        let mut price = self.base_price;
        for (j, &(c, inv)) in items.iter().enumerate() {
            sum_c = sum_c + c;
            sum_inv = sum_inv + inv;
            price = sum_c / (cap + sum_inv);
            if items.get(j + 1).is_none_or(|&(c2, inv2)| c2 / inv2 <= price) {
                break;
            }
        }
        self.lam[m] = (price - self.base_price).max(T::zero());
    }

    fn group_rate(&self, g: usize) -> T {
        self.stations_of_group[g]
            .iter()
            .flat_map(|&m| self.slots_of_dbs[m].iter())
            .map(|s| self.rate(s))
            .fold(T::zero(), |a, b| a + b)
    }

    /// Sets υ_g, together with the budgets of the stations in the group, so
    /// that the group carries at most its cap.
    fn fit_group(&mut self, g: usize) {
        let cap = self.prob.groups.caps_bps[g];
        let stations = self.stations_of_group[g].clone();
        let eval = |fit: &mut Self, x: T| {
            fit.ups[g] = x;
            for &m in &stations {
                fit.fit_station(m);
            }
            fit.group_rate(g) <= cap
        };
        if eval(self, T::zero()) {
            return;
        }
        let x = smallest_reaching(|x: T| eval(self, x));
        eval(self, x);
    }
}

/// Smallest `x ≥ 0` with `reached(x)`, for a predicate monotone in `x` and
/// false at zero. Returns the largest probe when it is never reached.
fn smallest_reaching<T: Scalar>(mut reached: impl FnMut(T) -> bool) -> T {
    let two = T::lit(2.0);
    let mut lo = T::zero();
    let mut hi = T::one();
    let mut found = false;
    for _ in 0..MAX_DOUBLINGS {
        if reached(hi) {
            found = true;
            break;
        }
        lo = hi;
        hi = hi * two;
        if !hi.is_finite() {
            break;
        }
    }
    if !found {
        return lo;
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if reached(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn moved<T: Scalar>(old: &[T], new: &[T], scale: T) -> T {
    old.iter()
        .zip(new)
        .map(|(&a, &b)| (a - b).abs() / scale)
        .fold(T::zero(), |a, b| a.max(b))
}

/// Re-optimises every power of `plan` for its fixed owners at `q > 0`.
/// Returns `None` when the result cannot be made feasible.
pub(crate) fn exact_repower<T: Scalar>(prob: &Problem<'_, T>, plan: &RbPlan<T>, q: T) -> Option<RbPlan<T>> {
    if q <= T::zero() {
        return None;
    }
    let (nk, nd, nr) = (prob.num_ues(), prob.num_dbs(), prob.num_rbs());
    let mut slots_of_ue: Vec<Vec<Slot<T>>> = vec![Vec::new(); nk];
    let mut slots_of_dbs: Vec<Vec<Slot<T>>> = vec![Vec::new(); nd];
    for (slot, o) in plan.owner.iter().enumerate() {
        let Some(k) = *o else { continue };
        let (m, n) = (slot / nr, slot % nr);
        let s = Slot {
            slot,
            ue: k,
            dbs: m,
            rb: n,
            inv: prob.inv_snr[prob.entry(k, m, n)],
        };
        slots_of_ue[k].push(s);
        slots_of_dbs[m].push(s);
    }
    let mut stations_of_group = prob.groups.members();
    for members in &mut stations_of_group {
        members.retain(|&m| !slots_of_dbs[m].is_empty());
    }
    let base_price = q * prob.pm.phi_e;
    let mut fit = Fit {
        prob,
        base_price,
        slots_of_ue,
        slots_of_dbs,
        stations_of_group,
        lam: vec![T::zero(); nd],
        ups: vec![T::zero(); prob.groups.num_groups()],
        mu: vec![T::zero(); nk],
    };
    let ungrouped: Vec<usize> = (0..nd)
        .filter(|&m| prob.groups.group_of[m].is_none() && !fit.slots_of_dbs[m].is_empty())
        .collect();
    let tol = T::lit(SWEEP_TOL);
    for _ in 0..MAX_SWEEPS {
        let before = (fit.lam.clone(), fit.ups.clone(), fit.mu.clone());
        fit.refresh_mu();
        for g in 0..fit.stations_of_group.len() {
            if !fit.stations_of_group[g].is_empty() {
                fit.fit_group(g);
            }
        }
        for &m in &ungrouped {
            fit.fit_station(m);
        }
        let change = moved(&before.0, &fit.lam, base_price)
            .max(moved(&before.1, &fit.ups, T::one()))
            .max(moved(&before.2, &fit.mu, T::one()));
        if change <= tol {
            break;
        }
    }
    fit.refresh_mu();

    let mut out = prob.empty_plan();
    for s in fit.slots_of_ue.iter().flatten() {
        let p = fit.power(s);
        if p > T::zero() {
            out.owner[s.slot] = Some(s.ue);
            out.power[s.slot] = p;
            out.rate[s.slot] = prob.rate(s.ue, s.dbs, s.rb, p);
        }
    }
    recover(prob, &mut out, q).then_some(out)
}
