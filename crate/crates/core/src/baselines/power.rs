use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::config::{non_negative, positive};
use crate::model::{Architecture, PowerBreakdown, PowerModel, SystemConfig};
use crate::scalar::Scalar;

/// Decomposition of the static power and the knobs that derive the
/// conventional-network model from the CDSA one.
///
/// `SystemConfig::p_static_w` is the CDSA total at `reference_num_lpns`;
/// every LPN above or below that count adds or removes its own static
/// consumption and one fronthaul link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Scalar"))]
pub struct PowerProfile<T> {
    pub reference_num_lpns: usize,
    pub hpn_static_w: T,
    pub lpn_static_w: T,
    pub fronthaul_w_per_dbs: T,
    /// Control-signalling overhead share of DBS air-interface consumption.
    pub overhead_fraction: T,
    /// Fronthaul consumption saved by CDSA relative to a conventional network.
    pub fronthaul_saving: T,
    /// Baseband consumption restored on every conventional base station.
    pub baseband_per_bs_w: T,
}

impl<T: Scalar> Default for PowerProfile<T> {
    fn default() -> Self {
        Self {
            reference_num_lpns: 20,
            hpn_static_w: T::lit(130.0),
            lpn_static_w: T::lit(6.8),
            fronthaul_w_per_dbs: T::lit(3.5),
            overhead_fraction: T::lit(0.28),
            fronthaul_saving: T::lit(0.10),
            baseband_per_bs_w: T::lit(2.91),
        }
    }
}

impl<T: Scalar> PowerProfile<T> {
    pub fn validate(&self) -> Result<()> {
        non_negative("hpn_static_w", self.hpn_static_w)?;
        non_negative("lpn_static_w", self.lpn_static_w)?;
        non_negative("fronthaul_w_per_dbs", self.fronthaul_w_per_dbs)?;
        non_negative("baseband_per_bs_w", self.baseband_per_bs_w)?;
        if !(self.overhead_fraction >= T::zero() && self.overhead_fraction < T::one()) {
            return Err(invalid("overhead_fraction", "must lie in [0, 1)"));
        }
        if !(self.fronthaul_saving >= T::zero() && self.fronthaul_saving < T::one()) {
            return Err(invalid("fronthaul_saving", "must lie in [0, 1)"));
        }
        Ok(())
    }

    /// CDSA static-power components for `num_lpns` LPNs plus the HPN.
    pub fn breakdown(&self, base: &SystemConfig<T>, num_lpns: usize) -> Result<PowerBreakdown<T>> {
        self.validate()?;
        let delta = T::from_count(num_lpns) - T::from_count(self.reference_num_lpns);
        let total = base.p_static_w + delta * (self.lpn_static_w + self.fronthaul_w_per_dbs);
        let fronthaul_w = self.fronthaul_w_per_dbs * T::from_count(num_lpns + 1);
        let base_stations_w = self.hpn_static_w + self.lpn_static_w * T::from_count(num_lpns);
        let platform_w = total - fronthaul_w - base_stations_w;
        positive("p_static_w", total)?;
        non_negative("platform_w", platform_w)?;
        Ok(PowerBreakdown {
            platform_w,
            fronthaul_w,
            base_stations_w,
        })
    }
}

/// Power model of either architecture for a network of `num_lpns` LPNs.
///
/// CDSA keeps φ_E and the profile's static total. The conventional network
/// divides φ_E by `1 − overhead_fraction`, inflates the fronthaul share by
/// `1 / (1 − fronthaul_saving)` and adds `baseband_per_bs_w` per station.
pub fn build_power_model<T: Scalar>(
    architecture: Architecture,
    base: &SystemConfig<T>,
    profile: &PowerProfile<T>,
    num_lpns: usize,
) -> Result<PowerModel<T>> {
    let cdsa = profile.breakdown(base, num_lpns)?;
    match architecture {
        Architecture::Cdsa => {
            PowerModel::new(architecture, base.phi_e, cdsa.total_w())?.with_breakdown(cdsa)
        }
        Architecture::Conventional => {
            let phi = base.phi_e / (T::one() - profile.overhead_fraction);
            let conv = PowerBreakdown {
                platform_w: cdsa.platform_w,
                fronthaul_w: cdsa.fronthaul_w / (T::one() - profile.fronthaul_saving),
                base_stations_w: cdsa.base_stations_w
                    + profile.baseband_per_bs_w * T::from_count(num_lpns + 1),
            };
            // Keeps the zero-knob case bit-identical to the CDSA total.
            let p_static = cdsa.total_w() + (conv.fronthaul_w - cdsa.fronthaul_w)
                + (conv.base_stations_w - cdsa.base_stations_w);
            PowerModel::new(architecture, phi, p_static)?.with_breakdown(conv)
        }
    }
}

/// Mean EE gap `mean(R/P_cdsa) / mean(R/P_conv) − 1` over paired
/// `(sum rate, transmit power)` samples evaluated under both models.
pub fn mean_ee_gap<T: Scalar>(cdsa: &PowerModel<T>, conv: &PowerModel<T>, samples: &[(T, T)]) -> T {
    let (mut a, mut b) = (T::zero(), T::zero());
    for &(rate, tx) in samples {
        a = a + rate / cdsa.total_for(tx);
        b = b + rate / conv.total_for(tx);
    }
    a / b - T::one()
}

/// `baseband_per_bs_w` that puts [`mean_ee_gap`] at `target` on the given
/// samples, by bisection. The gap grows monotonically with the knob.
pub fn calibrate_baseband<T: Scalar>(
    base: &SystemConfig<T>,
    profile: &PowerProfile<T>,
    num_lpns: usize,
    samples: &[(T, T)],
    target: T,
) -> Result<T> {
    if samples.is_empty() {
        return Err(invalid("samples", "must not be empty"));
    }
    let cdsa = build_power_model(Architecture::Cdsa, base, profile, num_lpns)?;
    let gap = |b: T| -> Result<T> {
        let p = PowerProfile { baseband_per_bs_w: b, ..*profile };
        let conv = build_power_model(Architecture::Conventional, base, &p, num_lpns)?;
        Ok(mean_ee_gap(&cdsa, &conv, samples))
    };
    let (mut lo, mut hi) = (T::zero(), T::one());
    if gap(lo)? > target {
        return Err(invalid("target", "below the gap with no baseband term"));
    }
    while gap(hi)? < target {
        hi = hi + hi;
        if hi > T::lit(1e9) {
            return Err(invalid("target", "unreachable"));
        }
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if gap(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}
