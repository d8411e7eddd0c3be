use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Converts a power spectral density from dBm/Hz to W/Hz.
pub fn dbm_per_hz_to_w_per_hz(dbm_per_hz: f64) -> f64 {
    10f64.powf((dbm_per_hz - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Base constants of the diminishing subgradient step rule.
///
/// Each multiplier moves by at most `constant / sqrt(iter)` of its natural
/// scale per iteration (see [`crate::solver::StepSizes::schedule`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule<T> {
    pub mu: T,
    pub gamma: T,
    pub upsilon: T,
}

/// Scalar system parameters shared by every algorithm and architecture.
///
/// All quantities are linear SI units (Hz, W/Hz, W, bit/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig<T> {
    pub total_bandwidth_hz: T,
    pub num_rbs: usize,
    pub noise_psd_w_per_hz: T,
    pub phi_e: T,
    pub p_static_w: T,
    pub fronthaul_cap_bps: T,
    /// Uniform per-UE rate floor.
    pub min_rate_bps: T,
    /// Optional per-UE floors replacing `min_rate_bps`, indexed by UE.
    #[serde(default)]
    pub min_rate_overrides: Option<Vec<T>>,
    /// Relative Dinkelbach stopping tolerance on F(q).
    pub dinkelbach_tol: T,
    pub dinkelbach_max_iters: usize,
    pub dual_max_iters: usize,
    /// Relative dual movement below which the inner loop stops.
    pub dual_tol: T,
    /// Inner loop stops after this many iterations without a better
    /// feasible iterate (0 disables).
    pub dual_stall_iters: usize,
    /// Relative slack tolerance for C1–C3 feasibility.
    pub constraint_tol: T,
    pub step_schedule: StepSchedule<T>,
}

impl<T: Scalar> Default for SystemConfig<T> {
    fn default() -> Self {
        Self {
            total_bandwidth_hz: T::lit(10e6),
            num_rbs: 50,
            noise_psd_w_per_hz: T::lit(dbm_per_hz_to_w_per_hz(-174.0)),
            phi_e: T::lit(0.29),
            p_static_w: T::lit(439.0),
            fronthaul_cap_bps: T::lit(0.8e9),
            min_rate_bps: T::lit(5e6),
            min_rate_overrides: None,
            dinkelbach_tol: T::lit(1e-4),
            dinkelbach_max_iters: 30,
            dual_max_iters: 2000,
            dual_tol: T::lit(1e-7),
            dual_stall_iters: 400,
            constraint_tol: T::lit(1e-3),
            step_schedule: StepSchedule {
                mu: T::lit(0.1),
                gamma: T::lit(0.1),
                upsilon: T::lit(0.1),
            },
        }
    }
}

impl<T: Scalar> SystemConfig<T> {
    /// Bandwidth of one resource block, B / N.
    pub fn rb_bandwidth_hz(&self) -> T {
        self.total_bandwidth_hz / T::from_count(self.num_rbs)
    }

    /// Noise power in one resource block, B0 · N0.
    pub fn rb_noise_w(&self) -> T {
        self.rb_bandwidth_hz() * self.noise_psd_w_per_hz
    }

    pub fn min_rate(&self, ue: usize) -> T {
        match &self.min_rate_overrides {
            Some(v) => v[ue],
            None => self.min_rate_bps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("total_bandwidth_hz", self.total_bandwidth_hz)?;
        if self.num_rbs == 0 {
            return Err(invalid("num_rbs", "must be at least 1"));
        }
        positive("noise_psd_w_per_hz", self.noise_psd_w_per_hz)?;
        positive("phi_e", self.phi_e)?;
        positive("p_static_w", self.p_static_w)?;
        positive("fronthaul_cap_bps", self.fronthaul_cap_bps)?;
        non_negative("min_rate_bps", self.min_rate_bps)?;
        if let Some(v) = &self.min_rate_overrides {
            for &r in v {
                non_negative("min_rate_overrides", r)?;
            }
        }
        positive("dinkelbach_tol", self.dinkelbach_tol)?;
        positive("dual_tol", self.dual_tol)?;
        positive("constraint_tol", self.constraint_tol)?;
        if self.dinkelbach_max_iters == 0 {
            return Err(invalid("dinkelbach_max_iters", "must be at least 1"));
        }
        if self.dual_max_iters == 0 {
            return Err(invalid("dual_max_iters", "must be at least 1"));
        }
        positive("step_schedule.mu", self.step_schedule.mu)?;
        positive("step_schedule.gamma", self.step_schedule.gamma)?;
        positive("step_schedule.upsilon", self.step_schedule.upsilon)?;
        Ok(())
    }

    /// Checks the per-UE override length against the instance size.
    pub fn validate_for(&self, num_ues: usize) -> Result<()> {
        self.validate()?;
        if let Some(v) = &self.min_rate_overrides {
            if v.len() != num_ues {
                return Err(invalid(
                    "min_rate_overrides",
                    format!("has {} entries for {} UEs", v.len(), num_ues),
                ));
            }
        }
        Ok(())
    }

    /// Converts every field to another scalar type.
    pub fn cast<U: Scalar>(&self) -> SystemConfig<U> {
        let c = |x: T| U::lit(x.as_f64());
        SystemConfig {
            total_bandwidth_hz: c(self.total_bandwidth_hz),
            num_rbs: self.num_rbs,
            noise_psd_w_per_hz: c(self.noise_psd_w_per_hz),
            phi_e: c(self.phi_e),
            p_static_w: c(self.p_static_w),
            fronthaul_cap_bps: c(self.fronthaul_cap_bps),
            min_rate_bps: c(self.min_rate_bps),
            min_rate_overrides: self
                .min_rate_overrides
                .as_ref()
                .map(|v| v.iter().map(|&x| c(x)).collect()),
            dinkelbach_tol: c(self.dinkelbach_tol),
            dinkelbach_max_iters: self.dinkelbach_max_iters,
            dual_max_iters: self.dual_max_iters,
            dual_tol: c(self.dual_tol),
            dual_stall_iters: self.dual_stall_iters,
            constraint_tol: c(self.constraint_tol),
            step_schedule: StepSchedule {
                mu: c(self.step_schedule.mu),
                gamma: c(self.step_schedule.gamma),
                upsilon: c(self.step_schedule.upsilon),
            },
        }
    }
}

pub(crate) fn positive<T: Scalar>(name: &'static str, x: T) -> Result<()> {
    if x.is_finite() && x > T::zero() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {x}")))
    }
}

pub(crate) fn non_negative<T: Scalar>(name: &'static str, x: T) -> Result<()> {
    if x.is_finite() && x >= T::zero() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and >= 0, got {x}")))
    }
}
