use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{rate_unchecked, AllocationSolution, ChannelState, PowerModel, SystemConfig, Topology};
use crate::scalar::Scalar;
use crate::solver::FronthaulGroups;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub grid_levels: usize,
    /// Largest number of per-station outcomes, and of explicit outcome
    /// combinations, the oracle agrees to enumerate.
    pub budget: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            grid_levels: 64,
            budget: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult<T> {
    pub feasible: bool,
    /// Zero when no candidate is feasible.
    pub best_ee: T,
    pub num_ues: usize,
    pub num_dbs: usize,
    pub num_rbs: usize,
    /// α in (k, m, n) row-major order.
    pub best_assignment: Vec<bool>,
    pub best_power: Vec<T>,
    /// Candidate (assignment, power) pairs covered by the search.
    pub instances_searched: u64,
    pub power_grid_resolution: usize,
}

impl<T: Scalar> OracleResult<T> {
    pub fn to_solution(&self) -> AllocationSolution<T> {
        let mut sol = AllocationSolution::empty(self.num_ues, self.num_dbs, self.num_rbs);
        sol.assignment = self.best_assignment.clone();
        sol.power_w = self.best_power.clone();
        sol.ee_bits_per_joule = self.best_ee;
        sol
    }
}

/// `levels` powers `P_max · 10^(−6j/(levels−1))`, `j = 0..levels`, spanning
/// six decades down from `P_max`.
pub fn power_grid<T: Scalar>(p_max: T, levels: usize) -> Vec<T> {
    if levels <= 1 {
        return vec![p_max];
    }
    let span = T::lit(6.0) / T::from_count(levels - 1);
    (0..levels)
        .map(|j| {
            if j == 0 {
                p_max
            } else {
                p_max * T::lit(10.0).powf(-span * T::from_count(j))
            }
        })
        .collect()
}

/// Every per-RB choice of one station that satisfies its local constraints.
struct Outcomes<T> {
    /// Mixed-radix code of the choice per RB.
    code: Vec<u64>,
    /// Per-UE rate, `num_ues` entries per outcome.
    ue_rate: Vec<T>,
    rate: Vec<T>,
    power: Vec<T>,
    radix: u64,
}

struct Ctx<'a, T> {
    ch: &'a ChannelState<T>,
    pm: &'a PowerModel<T>,
    groups: &'a FronthaulGroups<T>,
    eligible: Vec<Vec<usize>>,
    grids: Vec<Vec<T>>,
    rmin: Vec<T>,
    b0: T,
    noise: T,
}

impl<T: Scalar> Ctx<'_, T> {
    fn levels(&self) -> u64 {
        self.grids[0].len() as u64
    }

    /// (UE, power) of a per-RB choice; `None` for an idle RB.
    fn decode(&self, m: usize, choice: u64) -> Option<(usize, T)> {
        if choice == 0 {
            return None;
        }
        let c = choice - 1;
        let g = self.levels();
        let k = self.eligible[m][(c / g) as usize];
        Some((k, self.grids[m][(c % g) as usize]))
    }

    fn local_cap(&self, m: usize) -> Option<T> {
        let g = self.groups.group_of[m]?;
        let single = self.groups.group_of.iter().filter(|&&x| x == Some(g)).count() == 1;
        single.then(|| self.groups.caps_bps[g])
    }

    fn enumerate(&self, m: usize) -> Outcomes<T> {
        let nk = self.ch.num_ues;
        let nn = self.ch.num_rbs;
        let radix = 1 + self.eligible[m].len() as u64 * self.levels();
        let total = radix.pow(nn as u32);
        let pmax = self.ch_pmax(m);
        let cap = self.local_cap(m);
        let mut out = Outcomes {
            code: Vec::new(),
            ue_rate: Vec::new(),
            rate: Vec::new(),
            power: Vec::new(),
            radix,
        };
        let mut ue = vec![T::zero(); nk];
        for code in 0..total {
            ue.iter_mut().for_each(|r| *r = T::zero());
            let (mut rate, mut power) = (T::zero(), T::zero());
            let mut rest = code;
            for n in 0..nn {
                if let Some((k, p)) = self.decode(m, rest % radix) {
                    let r = rate_unchecked(p, self.ch.gain(k, m, n), self.b0, self.noise);
                    ue[k] = ue[k] + r;
                    rate = rate + r;
                    power = power + p;
                }
                rest /= radix;
            }
            if power > pmax || cap.is_some_and(|c| rate > c) {
                continue;
            }
            out.code.push(code);
            out.ue_rate.extend_from_slice(&ue);
            out.rate.push(rate);
            out.power.push(power);
        }
        out
    }

    fn ch_pmax(&self, m: usize) -> T {
        self.grids[m][0]
    }

    fn objective(&self, rate: T, power: T) -> T {
        rate / self.pm.total_for(power)
    }
}

/// Exhaustive search over assignments and a logarithmic power grid under the
/// pooled fronthaul constraint.
pub fn brute_force_solve<T: Scalar>(
    ch: &ChannelState<T>,
    topo: &Topology<T>,
    cfg: &SystemConfig<T>,
    pm: &PowerModel<T>,
    opts: OracleOptions,
) -> Result<OracleResult<T>> {
    let groups = FronthaulGroups::pooled(topo, cfg.fronthaul_cap_bps);
    brute_force_solve_grouped(ch, topo, cfg, pm, &groups, opts)
}

pub fn brute_force_solve_grouped<T: Scalar>(
    ch: &ChannelState<T>,
    topo: &Topology<T>,
    cfg: &SystemConfig<T>,
    pm: &PowerModel<T>,
    groups: &FronthaulGroups<T>,
    opts: OracleOptions,
) -> Result<OracleResult<T>> {
    search(ch, topo, cfg, pm, groups, opts, true)
}

fn search<T: Scalar>(
    ch: &ChannelState<T>,
    topo: &Topology<T>,
    cfg: &SystemConfig<T>,
    pm: &PowerModel<T>,
    groups: &FronthaulGroups<T>,
    opts: OracleOptions,
    allow_merge: bool,
) -> Result<OracleResult<T>> {
    ch.validate()?;
    topo.validate()?;
    cfg.validate_for(ch.num_ues)?;
    pm.validate()?;
    groups.validate(ch.num_dbs)?;
    if topo.num_dbs() != ch.num_dbs || topo.num_ues() != ch.num_ues || cfg.num_rbs != ch.num_rbs {
        return Err(Error::ShapeMismatch(format!(
            "channel {:?} vs topology {}x{} and {} RBs",
            ch.shape(),
            topo.num_ues(),
            topo.num_dbs(),
            cfg.num_rbs
        )));
    }
    if opts.grid_levels == 0 {
        return Err(invalid("grid_levels", "must be >= 1"));
    }
    let (nk, nm, nn) = (ch.num_ues, ch.num_dbs, ch.num_rbs);
    let eligible: Vec<Vec<usize>> = (0..nm)
        .map(|m| (0..nk).filter(|&k| topo.eligible(k, m)).collect())
        .collect();

    let mut covered: u64 = 1;
    for e in &eligible {
        let radix = 1 + e.len() as u64 * opts.grid_levels as u64;
        let count = radix
            .checked_pow(nn as u32)
            .filter(|&c| c <= opts.budget)
            .ok_or_else(|| {
                Error::OracleBudget(format!(
                    "{radix}^{nn} outcomes per station exceed the budget of {}",
                    opts.budget
                ))
            })?;
        covered = covered.saturating_mul(count);
    }

    let ctx = Ctx {
        ch,
        pm,
        groups,
        grids: topo
            .stations
            .iter()
            .map(|s| power_grid(s.max_power_w, opts.grid_levels))
            .collect(),
        eligible,
        rmin: (0..nk).map(|k| cfg.min_rate(k)).collect(),
        b0: cfg.rb_bandwidth_hz(),
        noise: cfg.rb_noise_w(),
    };
    let lists: Vec<Outcomes<T>> = (0..nm).map(|m| ctx.enumerate(m)).collect();

    let local_groups = (0..groups.num_groups()).all(|g| groups.members()[g].len() <= 1);
    let pick = if allow_merge && nm == 2 && nk <= 2 && local_groups {
        merge_pair(&ctx, &lists)
    } else {
        lists
            .iter()
            .try_fold(1u64, |acc, l| acc.checked_mul(l.code.len() as u64))
            .filter(|&c| c <= opts.budget)
            .ok_or_else(|| {
                Error::OracleBudget(format!(
                    "outcome combinations exceed the budget of {}",
                    opts.budget
                ))
            })?;
        product_search(&ctx, &lists)
    };

    let mut result = OracleResult {
        feasible: false,
        best_ee: T::zero(),
        num_ues: nk,
        num_dbs: nm,
        num_rbs: nn,
        best_assignment: vec![false; nk * nm * nn],
        best_power: vec![T::zero(); nk * nm * nn],
        instances_searched: covered,
        power_grid_resolution: opts.grid_levels,
    };
    if let Some(choice) = pick {
        result.feasible = true;
        let (mut rate, mut power) = (T::zero(), T::zero());
        for (m, &i) in choice.iter().enumerate() {
            let l = &lists[m];
            rate = rate + l.rate[i];
            power = power + l.power[i];
            let mut rest = l.code[i];
            for n in 0..nn {
                if let Some((k, p)) = ctx.decode(m, rest % l.radix) {
                    let idx = ch.index(k, m, n);
                    result.best_assignment[idx] = true;
                    result.best_power[idx] = p;
                }
                rest /= l.radix;
            }
        }
        result.best_ee = ctx.objective(rate, power);
    }
    Ok(result)
}

/// Finite values only.
fn cmp<T: Scalar>(a: T, b: T) -> std::cmp::Ordering {
    a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
}

fn meets_floors<T: Scalar>(ctx: &Ctx<'_, T>, rates: &[T]) -> bool {
    rates.iter().zip(&ctx.rmin).all(|(&r, &f)| r >= f)
}

/// Explicit search over every combination of station outcomes.
fn product_search<T: Scalar>(ctx: &Ctx<'_, T>, lists: &[Outcomes<T>]) -> Option<Vec<usize>> {
    let nk = ctx.ch.num_ues;
    let nm = lists.len();
    if lists.iter().any(|l| l.code.is_empty()) {
        return None;
    }
    let members = ctx.groups.members();
    let mut idx = vec![0usize; nm];
    let mut best: Option<(T, Vec<usize>)> = None;
    let mut ue = vec![T::zero(); nk];
    loop {
        ue.iter_mut().for_each(|r| *r = T::zero());
        let (mut rate, mut power) = (T::zero(), T::zero());
        for (m, &i) in idx.iter().enumerate() {
            let l = &lists[m];
            for (u, &r) in ue.iter_mut().zip(&l.ue_rate[i * nk..(i + 1) * nk]) {
                *u = *u + r;
            }
            rate = rate + l.rate[i];
            power = power + l.power[i];
        }
        let fronthaul_ok = members.iter().enumerate().all(|(g, ms)| {
            let carried = ms
                .iter()
                .fold(T::zero(), |a, &m| a + lists[m].rate[idx[m]]);
            carried <= ctx.groups.caps_bps[g]
        });
        if fronthaul_ok && meets_floors(ctx, &ue) {
            let ee = ctx.objective(rate, power);
            if best.as_ref().is_none_or(|(b, _)| ee > *b) {
                best = Some((ee, idx.clone()));
            }
        }
        // Odometer with the last station varying fastest.
        let mut m = nm;
        loop {
            if m == 0 {
                return best.map(|(_, i)| i);
            }
            m -= 1;
            idx[m] += 1;
            if idx[m] < lists[m].code.len() {
                break;
            }
            idx[m] = 0;
        }
    }
}

/// Prefix-maximum Fenwick tree storing (value, payload).
struct MaxTree<T> {
    nodes: Vec<Option<(T, usize)>>,
}

impl<T: Scalar> MaxTree<T> {
    fn new(n: usize) -> Self {
        Self {
            nodes: vec![None; n + 1],
        }
    }

    fn insert(&mut self, pos: usize, value: T, payload: usize) {
        let mut i = pos + 1;
        while i < self.nodes.len() {
            if self.nodes[i].is_none_or(|(v, p)| value > v || (value == v && payload < p)) {
                self.nodes[i] = Some((value, payload));
            }
            i += i & i.wrapping_neg();
        }
    }

    /// Maximum over positions `0..=pos`.
    fn query(&self, pos: usize) -> Option<(T, usize)> {
        let mut i = pos + 1;
        let mut best: Option<(T, usize)> = None;
        while i > 0 {
            if let Some((v, p)) = self.nodes[i] {
                if best.is_none_or(|(bv, bp)| v > bv || (v == bv && p < bp)) {
                    best = Some((v, p));
                }
            }
            i -= i & i.wrapping_neg();
        }
        best
    }
}

/// Two stations and at most two UEs: Dinkelbach over the finite candidate
/// set, each parametric step solved by a sweep over the first UE's rate and
/// a Fenwick maximum over the second's.
fn merge_pair<T: Scalar>(ctx: &Ctx<'_, T>, lists: &[Outcomes<T>]) -> Option<Vec<usize>> {
    let nk = ctx.ch.num_ues;
    let (a, b) = (&lists[0], &lists[1]);
    if a.code.is_empty() || b.code.is_empty() {
        return None;
    }
    let ue = |l: &Outcomes<T>, i: usize, k: usize| -> T {
        if k < nk {
            l.ue_rate[i * nk + k]
        } else {
            T::zero()
        }
    };
    let floor = |k: usize| if k < nk { ctx.rmin[k] } else { T::zero() };

    // B sorted by first-UE rate, descending.
    let mut b_order: Vec<usize> = (0..b.code.len()).collect();
    b_order.sort_by(|&x, &y| cmp(ue(b, y, 0), ue(b, x, 0)).then(x.cmp(&y)));
    // Second-UE rates of B, descending, so "rate ≥ t" is a prefix.
    let mut r1: Vec<T> = (0..b.code.len()).map(|i| ue(b, i, 1)).collect();
    r1.sort_by(|x, y| cmp(*y, *x));
    r1.dedup();
    let rank = |v: T| -> usize { r1.partition_point(|&x| x > v) };
    let b_rank: Vec<usize> = (0..b.code.len()).map(|i| rank(ue(b, i, 1))).collect();

    // A sorted by the first-UE threshold it imposes on B, descending.
    let need = |i: usize, k: usize| floor(k) - ue(a, i, k);
    let mut a_order: Vec<usize> = (0..a.code.len()).collect();
    a_order.sort_by(|&x, &y| cmp(need(y, 0), need(x, 0)).then(x.cmp(&y)));

    let eval = |ia: usize, ib: usize| -> (T, T) {
        (a.rate[ia] + b.rate[ib], a.power[ia] + b.power[ib])
    };
    let step = |q: T| -> Option<(usize, usize)> {
        let price = q * ctx.pm.phi_e;
        let mut tree = MaxTree::new(r1.len());
        let mut ptr = 0;
        let mut best: Option<(T, usize, usize)> = None;
        for &ia in &a_order {
            let t0 = need(ia, 0);
            while ptr < b_order.len() && ue(b, b_order[ptr], 0) >= t0 {
                let ib = b_order[ptr];
                tree.insert(b_rank[ib], b.rate[ib] - price * b.power[ib], ib);
                ptr += 1;
            }
            let t1 = need(ia, 1);
            let cut = r1.partition_point(|&x| x >= t1);
            if cut == 0 {
                continue;
            }
            if let Some((vb, ib)) = tree.query(cut - 1) {
                let v = a.rate[ia] - price * a.power[ia] + vb;
                if best.is_none_or(|(bv, _, _)| v > bv) {
                    best = Some((v, ia, ib));
                }
            }
        }
        best.map(|(_, ia, ib)| (ia, ib))
    };

    let mut q = T::zero();
    let mut best: Option<(T, usize, usize)> = None;
    for _ in 0..200 {
        let (ia, ib) = step(q)?;
        let (rate, power) = eval(ia, ib);
        let ee = ctx.objective(rate, power);
        if best.is_none_or(|(b, _, _)| ee > b) {
            best = Some((ee, ia, ib));
        }
        if ee <= q {
            break;
        }
        q = ee;
    }
    best.map(|(_, ia, ib)| vec![ia, ib])
}
