use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{dbs_rates, ue_rates, AllocationSolution, ChannelState, SystemConfig, Topology};
use crate::scalar::Scalar;
use crate::solver::fronthaul::FronthaulGroups;

/// Signed slack of every constraint; negative values are violations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport<T> {
    /// C1 per UE: achieved rate − r_k^min (bit/s).
    pub rate_slack_bps: Vec<T>,
    /// C2 per station: P_m^max − Σ α·p (W).
    pub power_slack_w: Vec<T>,
    /// C3 per fronthaul group: cap − carried wireless rate (bit/s).
    pub fronthaul_slack_bps: Vec<T>,
    /// C4 per (station, RB), row-major: 1 − Σ_k α.
    pub exclusivity_slack: Vec<T>,
    /// Assigned triples whose UE is not eligible on that station.
    pub ineligible_assignments: usize,
    pub rate_scale_bps: Vec<T>,
    pub power_scale_w: Vec<T>,
    pub fronthaul_scale_bps: Vec<T>,
}

impl<T: Scalar> FeasibilityReport<T> {
    /// Slacks divided by their constraint scale, in C1, C2, C3, C4 order.
    pub fn relative_slacks(&self) -> Vec<T> {
        let rel = |s: &[T], d: &[T]| -> Vec<T> { s.iter().zip(d).map(|(&s, &d)| s / d).collect() };
        let mut out = rel(&self.rate_slack_bps, &self.rate_scale_bps);
        out.extend(rel(&self.power_slack_w, &self.power_scale_w));
        out.extend(rel(&self.fronthaul_slack_bps, &self.fronthaul_scale_bps));
        out.extend(self.exclusivity_slack.iter().copied());
        out
    }

    pub fn min_relative_slack(&self) -> T {
        self.relative_slacks()
            .into_iter()
            .fold(T::infinity(), |a, b| a.min(b))
    }

    /// Feasible iff every relative slack is ≥ −tol, C4 holds exactly and no
    /// UE is served by an ineligible station.
    pub fn is_feasible(&self, tol: T) -> bool {
        self.ineligible_assignments == 0
            && self.exclusivity_slack.iter().all(|&s| s >= T::zero())
            && self.relative_slacks().iter().all(|&s| s >= -tol)
    }
}

/// Constraint residuals for the pooled fronthaul constraint.
pub fn check_feasibility<T: Scalar>(
    sol: &AllocationSolution<T>,
    ch: &ChannelState<T>,
    topo: &Topology<T>,
    cfg: &SystemConfig<T>,
) -> Result<FeasibilityReport<T>> {
    let groups = FronthaulGroups::pooled(topo, cfg.fronthaul_cap_bps);
    check_feasibility_grouped(sol, ch, topo, cfg, &groups)
}

pub fn check_feasibility_grouped<T: Scalar>(
    sol: &AllocationSolution<T>,
    ch: &ChannelState<T>,
    topo: &Topology<T>,
    cfg: &SystemConfig<T>,
    groups: &FronthaulGroups<T>,
) -> Result<FeasibilityReport<T>> {
    let rates = ue_rates(sol, ch, cfg)?;
    let station_rates = dbs_rates(sol, ch, cfg)?;
    let spent = sol.dbs_power_w();
    let b0 = cfg.rb_bandwidth_hz();

    let rate_slack_bps = rates
        .iter()
        .enumerate()
        .map(|(k, &r)| r - cfg.min_rate(k))
        .collect();
    let rate_scale_bps = (0..sol.num_ues).map(|k| cfg.min_rate(k).max(b0)).collect();

    let power_scale_w: Vec<T> = topo.stations.iter().map(|s| s.max_power_w).collect();
    let power_slack_w = power_scale_w
        .iter()
        .zip(&spent)
        .map(|(&cap, &p)| cap - p)
        .collect();

    let mut carried = vec![T::zero(); groups.num_groups()];
    for (m, g) in groups.group_of.iter().enumerate() {
        if let Some(g) = g {
            carried[*g] = carried[*g] + station_rates[m];
        }
    }
    let fronthaul_slack_bps = groups
        .caps_bps
        .iter()
        .zip(&carried)
        .map(|(&c, &r)| c - r)
        .collect();

    let mut exclusivity_slack = Vec::with_capacity(sol.num_dbs * sol.num_rbs);
    let mut ineligible_assignments = 0;
    for m in 0..sol.num_dbs {
        for n in 0..sol.num_rbs {
            let mut used = 0usize;
            for k in 0..sol.num_ues {
                if sol.alpha(k, m, n) {
                    used += 1;
                    if !topo.eligible(k, m) {
                        ineligible_assignments += 1;
                    }
                }
            }
            exclusivity_slack.push(T::one() - T::from_count(used));
        }
    }

    Ok(FeasibilityReport {
        rate_slack_bps,
        power_slack_w,
        fronthaul_slack_bps,
        exclusivity_slack,
        ineligible_assignments,
        rate_scale_bps,
        power_scale_w,
        fronthaul_scale_bps: groups.caps_bps.clone(),
    })
}
