use crate::error::{Error, Result};
use crate::model::{
    rate_unchecked, AllocationSolution, ChannelState, PowerModel, SystemConfig, Topology,
};
use crate::scalar::Scalar;
use crate::solver::duals::{DualScales, DualState};
use crate::solver::fronthaul::FronthaulGroups;

/// Denominator floor applied while q = 0 (γ_m + q·φ_E may vanish there).
pub const ZERO_Q_PRICE_FLOOR: f64 = 1e-9;

/// One solver instance with the per-entry quantities the inner loop needs.
pub(crate) struct Problem<'a, T> {
    pub ch: &'a ChannelState<T>,
    pub cfg: &'a SystemConfig<T>,
    pub pm: &'a PowerModel<T>,
    pub groups: &'a FronthaulGroups<T>,
    pub b0: T,
    pub noise: T,
    /// B0·N0 / g per entry.
    pub inv_snr: Vec<T>,
    /// log2(g / (B0·N0)) per entry.
    pub log_snr: Vec<T>,
    pub rmin: Vec<T>,
    pub pmax: Vec<T>,
    /// Eligible UEs of each station.
    pub ues_of: Vec<Vec<usize>>,
    /// Eligible stations of each UE.
    pub dbs_of: Vec<Vec<usize>>,
    pub scales: DualScales<T>,
}

impl<'a, T: Scalar> Problem<'a, T> {
    pub fn new(
        ch: &'a ChannelState<T>,
        topo: &'a Topology<T>,
        cfg: &'a SystemConfig<T>,
        pm: &'a PowerModel<T>,
        groups: &'a FronthaulGroups<T>,
    ) -> Result<Self> {
        ch.validate()?;
        topo.validate()?;
        cfg.validate_for(ch.num_ues)?;
        pm.validate()?;
        groups.validate(ch.num_dbs)?;
        if topo.num_dbs() != ch.num_dbs || topo.num_ues() != ch.num_ues || cfg.num_rbs != ch.num_rbs
        {
            return Err(Error::ShapeMismatch(format!(
                "channel {:?} vs topology {}x{} and {} RBs",
                ch.shape(),
                topo.num_ues(),
                topo.num_dbs(),
                cfg.num_rbs
            )));
        }
        let b0 = cfg.rb_bandwidth_hz();
        let noise = cfg.rb_noise_w();
        let inv_snr: Vec<T> = ch.gains.iter().map(|&g| noise / g).collect();
        let log_snr: Vec<T> = ch.gains.iter().map(|&g| (g / noise).log2()).collect();
        let rmin: Vec<T> = (0..ch.num_ues).map(|k| cfg.min_rate(k)).collect();
        let pmax: Vec<T> = topo.stations.iter().map(|s| s.max_power_w).collect();
        let ues_of = (0..ch.num_dbs)
            .map(|m| (0..ch.num_ues).filter(|&k| topo.eligible(k, m)).collect())
            .collect();
        let dbs_of = (0..ch.num_ues)
            .map(|k| (0..ch.num_dbs).filter(|&m| topo.eligible(k, m)).collect())
            .collect();
        let n = T::from_count(ch.num_rbs);
        let scales = DualScales {
            rate_ref: rmin.iter().map(|&r| r.max(b0)).collect(),
            power_ref: pmax.clone(),
            gamma_ref: pmax.iter().map(|&p| n * b0 / (T::LN_2() * p)).collect(),
            cap_ref: groups.caps_bps.clone(),
        };
        Ok(Self {
            ch,
            cfg,
            pm,
            groups,
            b0,
            noise,
            inv_snr,
            log_snr,
            rmin,
            pmax,
            ues_of,
            dbs_of,
            scales,
        })
    }

    pub fn num_ues(&self) -> usize {
        self.ch.num_ues
    }

    pub fn num_dbs(&self) -> usize {
        self.ch.num_dbs
    }

    pub fn num_rbs(&self) -> usize {
        self.ch.num_rbs
    }

    #[inline]
    pub fn entry(&self, k: usize, m: usize, n: usize) -> usize {
        (k * self.ch.num_dbs + m) * self.ch.num_rbs + n
    }

    #[inline]
    pub fn rate(&self, k: usize, m: usize, n: usize, power: T) -> T {
        rate_unchecked(power, self.ch.gains[self.entry(k, m, n)], self.b0, self.noise)
    }

    /// Power needed for UE `k` to reach `rate` on `(m, n)`.
    #[inline]
    pub fn power_for_rate(&self, k: usize, m: usize, n: usize, rate: T) -> T {
        self.inv_snr[self.entry(k, m, n)] * ((rate / self.b0).exp2() - T::one())
    }

    pub fn price(&self, duals: &DualState<T>, m: usize, q: T) -> Result<T> {
        let mut c = duals.price(m, q, self.pm.phi_e);
        if q == T::zero() {
            c = c.max(T::lit(ZERO_Q_PRICE_FLOOR));
        }
        if !(c.is_finite() && c > T::zero()) {
            return Err(Error::SolverState(format!(
                "power price of station {m} is {c} at q = {q}"
            )));
        }
        Ok(c)
    }

    pub fn empty_plan(&self) -> RbPlan<T> {
        let slots = self.num_dbs() * self.num_rbs();
        RbPlan {
            owner: vec![None; slots],
            power: vec![T::zero(); slots],
            rate: vec![T::zero(); slots],
        }
    }

    /// Per-RB argmax of the H metric under the closed-form water level.
    pub fn assign(&self, q: T, duals: &DualState<T>) -> Result<RbPlan<T>> {
        let (nd, nr) = (self.num_dbs(), self.num_rbs());
        let mut plan = self.empty_plan();
        let mut best_h = vec![T::zero(); nr];
        let b0_ln2 = self.b0 / T::LN_2();
        for m in 0..nd {
            let price = self.price(duals, m, q)?;
            let group = self.groups.group_of[m];
            best_h.iter_mut().for_each(|h| *h = T::zero());
            let slot0 = m * nr;
            for &k in &self.ues_of[m] {
                let weight = duals.weight(k, group);
                if weight <= T::zero() {
                    continue;
                }
                let level = b0_ln2 * weight / price;
                let log_level = level.log2();
                let wb0 = weight * self.b0;
                let base = self.entry(k, m, 0);
                let inv = &self.inv_snr[base..base + nr];
                let lg = &self.log_snr[base..base + nr];
                for n in 0..nr {
                    let p = level - inv[n];
                    if p > T::zero() {
                        let h = wb0 * (log_level + lg[n]) - price * p;
                        if h > best_h[n] {
                            best_h[n] = h;
                            plan.owner[slot0 + n] = Some(k);
                            plan.power[slot0 + n] = p;
                        }
                    }
                }
            }
            for n in 0..nr {
                if let Some(k) = plan.owner[slot0 + n] {
                    plan.rate[slot0 + n] = self.rate(k, m, n, plan.power[slot0 + n]);
                }
            }
        }
        Ok(plan)
    }

    /// Compact form of a dense allocation; zero-power slots are left free.
    pub fn plan_from(&self, sol: &AllocationSolution<T>) -> RbPlan<T> {
        let nr = self.num_rbs();
        let mut plan = self.empty_plan();
        for m in 0..self.num_dbs() {
            for n in 0..nr {
                let slot = m * nr + n;
                let owner = (0..self.num_ues()).find(|&k| {
                    let i = sol.index(k, m, n);
                    sol.assignment[i] && sol.power_w[i] > T::zero()
                });
                if let Some(k) = owner {
                    let p = sol.power_w[sol.index(k, m, n)];
                    plan.owner[slot] = Some(k);
                    plan.power[slot] = p;
                    plan.rate[slot] = self.rate(k, m, n, p);
                }
            }
        }
        plan
    }

    pub fn to_solution(&self, plan: &RbPlan<T>) -> AllocationSolution<T> {
        AllocationSolution::from_owners(
            self.num_ues(),
            self.num_dbs(),
            self.num_rbs(),
            &plan.owner,
            &plan.power,
        )
    }
}

/// Compact C4-exclusive allocation: one owner, power and rate per
/// (station, RB) slot, indexed `m·N + n`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RbPlan<T> {
    pub owner: Vec<Option<usize>>,
    pub power: Vec<T>,
    pub rate: Vec<T>,
}

impl<T: Scalar> RbPlan<T> {
    pub fn ue_rates(&self, num_ues: usize) -> Vec<T> {
        let mut out = vec![T::zero(); num_ues];
        for (slot, o) in self.owner.iter().enumerate() {
            if let Some(k) = o {
                out[*k] = out[*k] + self.rate[slot];
            }
        }
        out
    }

    pub fn dbs_power(&self, num_dbs: usize, num_rbs: usize) -> Vec<T> {
        (0..num_dbs)
            .map(|m| {
                (0..num_rbs)
                    .filter(|n| self.owner[m * num_rbs + n].is_some())
                    .fold(T::zero(), |a, n| a + self.power[m * num_rbs + n])
            })
            .collect()
    }

    pub fn dbs_rate(&self, m: usize, num_rbs: usize) -> T {
        (0..num_rbs)
            .filter(|n| self.owner[m * num_rbs + n].is_some())
            .fold(T::zero(), |a, n| a + self.rate[m * num_rbs + n])
    }

    pub fn group_rates(&self, groups: &FronthaulGroups<T>, num_rbs: usize) -> Vec<T> {
        let mut out = vec![T::zero(); groups.num_groups()];
        for (m, g) in groups.group_of.iter().enumerate() {
            if let Some(g) = g {
                out[*g] = out[*g] + self.dbs_rate(m, num_rbs);
            }
        }
        out
    }

    pub fn total_rate(&self) -> T {
        self.owner
            .iter()
            .zip(&self.rate)
            .filter(|(o, _)| o.is_some())
            .fold(T::zero(), |a, (_, &r)| a + r)
    }

    pub fn transmit_power(&self) -> T {
        self.owner
            .iter()
            .zip(&self.power)
            .filter(|(o, _)| o.is_some())
            .fold(T::zero(), |a, (_, &p)| a + p)
    }
}

/// RB assignment and water-filling powers at fixed `q` and multipliers,
/// with every wireless station in one pooled fronthaul group.
pub fn assign_rbs<T: Scalar>(
    ch: &ChannelState<T>,
    q: T,
    duals: &DualState<T>,
    topo: &Topology<T>,
    cfg: &SystemConfig<T>,
    pm: &PowerModel<T>,
) -> Result<AllocationSolution<T>> {
    let groups = FronthaulGroups::pooled(topo, cfg.fronthaul_cap_bps);
    assign_rbs_grouped(ch, q, duals, topo, cfg, pm, &groups)
}

/// [`assign_rbs`] with an explicit fronthaul grouping.
pub fn assign_rbs_grouped<T: Scalar>(
    ch: &ChannelState<T>,
    q: T,
    duals: &DualState<T>,
    topo: &Topology<T>,
    cfg: &SystemConfig<T>,
    pm: &PowerModel<T>,
    groups: &FronthaulGroups<T>,
) -> Result<AllocationSolution<T>> {
    let prob = Problem::new(ch, topo, cfg, pm, groups)?;
    check_dual_dims(&prob, duals)?;
    let plan = prob.assign(q, duals)?;
    let mut sol = prob.to_solution(&plan);
    sol.duals = duals.clone();
    Ok(sol)
}

pub(crate) fn check_dual_dims<T: Scalar>(prob: &Problem<'_, T>, duals: &DualState<T>) -> Result<()> {
    if duals.mu.len() != prob.num_ues()
        || duals.gamma.len() != prob.num_dbs()
        || duals.upsilon.len() != prob.groups.num_groups()
    {
        return Err(Error::ShapeMismatch(format!(
            "dual state {}/{}/{} for {} UEs, {} stations, {} groups",
            duals.mu.len(),
            duals.gamma.len(),
            duals.upsilon.len(),
            prob.num_ues(),
            prob.num_dbs(),
            prob.groups.num_groups()
        )));
    }
    Ok(())
}
