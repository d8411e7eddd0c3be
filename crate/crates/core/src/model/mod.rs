//! Domain types and the closed-form rate, power and efficiency formulas.

pub mod channel;
pub mod config;
pub mod power;
pub mod solution;
pub mod topology;

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

pub use channel::ChannelState;
pub use config::{db_to_linear, dbm_per_hz_to_w_per_hz, StepSchedule, SystemConfig};
pub use power::{Architecture, PowerBreakdown, PowerModel};
pub use solution::{AllocationSolution, Diagnostics};
pub use topology::{Station, StationKind, Topology};

/// Shannon rate of one RB: `B0 · log2(1 + p·g / (B0·N0))`.
pub fn compute_rate<T: Scalar>(power_w: T, gain: T, cfg: &SystemConfig<T>) -> Result<T> {
    if !(power_w.is_finite() && power_w >= T::zero()) {
        return Err(invalid("power_w", format!("must be finite and >= 0, got {power_w}")));
    }
    if !(gain.is_finite() && gain > T::zero()) {
        return Err(invalid("gain", format!("must be finite and > 0, got {gain}")));
    }
    Ok(rate_unchecked(power_w, gain, cfg.rb_bandwidth_hz(), cfg.rb_noise_w()))
}

#[inline]
pub(crate) fn rate_unchecked<T: Scalar>(power_w: T, gain: T, b0: T, noise_w: T) -> T {
    b0 * (power_w * gain / noise_w).ln_1p() / T::LN_2()
}

/// Achieved rate of every UE, Σ_{m,n} α·R.
pub fn ue_rates<T: Scalar>(
    sol: &AllocationSolution<T>,
    ch: &ChannelState<T>,
    cfg: &SystemConfig<T>,
) -> Result<Vec<T>> {
    sol.check_shape(ch)?;
    sol.validate_powers()?;
    let (b0, noise) = (cfg.rb_bandwidth_hz(), cfg.rb_noise_w());
    let mut out = vec![T::zero(); sol.num_ues];
    for (k, r) in out.iter_mut().enumerate() {
        for m in 0..sol.num_dbs {
            for n in 0..sol.num_rbs {
                let i = sol.index(k, m, n);
                if sol.assignment[i] {
                    *r = *r + rate_unchecked(sol.power_w[i], ch.gains[i], b0, noise);
                }
            }
        }
    }
    Ok(out)
}

/// Carried rate of every station, Σ_{k,n} α·R.
pub fn dbs_rates<T: Scalar>(
    sol: &AllocationSolution<T>,
    ch: &ChannelState<T>,
    cfg: &SystemConfig<T>,
) -> Result<Vec<T>> {
    sol.check_shape(ch)?;
    sol.validate_powers()?;
    let (b0, noise) = (cfg.rb_bandwidth_hz(), cfg.rb_noise_w());
    let mut out = vec![T::zero(); sol.num_dbs];
    for k in 0..sol.num_ues {
        for (m, r) in out.iter_mut().enumerate() {
            for n in 0..sol.num_rbs {
                let i = sol.index(k, m, n);
                if sol.assignment[i] {
                    *r = *r + rate_unchecked(sol.power_w[i], ch.gains[i], b0, noise);
                }
            }
        }
    }
    Ok(out)
}

/// System sum-rate R_T = Σ α·R over all (k, m, n).
pub fn total_rate<T: Scalar>(
    sol: &AllocationSolution<T>,
    ch: &ChannelState<T>,
    cfg: &SystemConfig<T>,
) -> Result<T> {
    Ok(ue_rates(sol, ch, cfg)?
        .into_iter()
        .fold(T::zero(), |a, b| a + b))
}

/// Network power `φ_E · Σ α·p + P_Static`.
pub fn total_power<T: Scalar>(sol: &AllocationSolution<T>, pm: &PowerModel<T>) -> Result<T> {
    sol.validate_powers()?;
    pm.validate()?;
    Ok(pm.total_for(sol.transmit_power_w()))
}

/// Energy efficiency R_T / P_T in bit/J.
pub fn energy_efficiency<T: Scalar>(
    sol: &AllocationSolution<T>,
    ch: &ChannelState<T>,
    cfg: &SystemConfig<T>,
    pm: &PowerModel<T>,
) -> Result<T> {
    Ok(total_rate(sol, ch, cfg)? / total_power(sol, pm)?)
}
