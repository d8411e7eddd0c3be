use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::PowerProfile;
use crate::channel_gen::{AssociationRule, DropSpec, FadingModel, ShadowingStd};
use crate::error::{invalid, Error, Result};
use crate::model::{dbm_per_hz_to_w_per_hz, Architecture, StepSchedule, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Total wireless fronthaul capacity R_F^max in bit/s.
    FronthaulCapacity,
    /// Number of LPNs with wireless fronthaul.
    WirelessDbsCount,
    /// Per-UE rate floor in bit/s.
    MinRate,
    /// Number of LPNs in the cell.
    DbsDensity,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::FronthaulCapacity => "fronthaul_capacity",
            Self::WirelessDbsCount => "wireless_dbs_count",
            Self::MinRate => "min_rate",
            Self::DbsDensity => "dbs_density",
        }
    }

    fn is_count(self) -> bool {
        matches!(self, Self::WirelessDbsCount | Self::DbsDensity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Pooled fronthaul capacity shared by all wireless stations.
    Proposed,
    /// Fixed per-station fronthaul capacity.
    Static,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Proposed => "proposed",
            Self::Static => "static",
        }
    }
}

/// How the architectures of one sweep are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ArchitectureMode {
    /// Optimise once under the CDSA model and evaluate every architecture's
    /// power model on that allocation.
    #[default]
    SharedAllocation,
    /// Optimise separately under each architecture's power model.
    Reoptimize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanSection {
    pub axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub architectures: Vec<Architecture>,
    pub architecture_mode: ArchitectureMode,
    pub drops_per_point: usize,
    pub base_seed: u64,
    /// Reuse the same drops at every sweep point.
    pub common_random_numbers: bool,
    /// Explicit static cap per wireless station; the pooled cap then equals
    /// this value times the number of wireless stations.
    pub per_dbs_fronthaul_cap_bps: Option<f64>,
    /// Hand the static allocation of a drop to the proposed solver as a
    /// feasible starting incumbent when both algorithms run.
    pub static_incumbent: bool,
}

impl Default for PlanSection {
    fn default() -> Self {
        Self {
            axis: SweepAxis::FronthaulCapacity,
            sweep_values: vec![0.8e9],
            algorithms: vec![Algorithm::Proposed, Algorithm::Static],
            architectures: vec![Architecture::Cdsa, Architecture::Conventional],
            architecture_mode: ArchitectureMode::SharedAllocation,
            drops_per_point: 50,
            base_seed: 1,
            common_random_numbers: true,
            per_dbs_fronthaul_cap_bps: None,
            static_incumbent: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub bandwidth_hz: f64,
    pub num_rbs: usize,
    pub noise_psd_dbm_per_hz: f64,
    pub phi_e: f64,
    pub p_static_w: f64,
    pub fronthaul_cap_bps: f64,
    pub min_rate_bps: f64,
    pub dinkelbach_tol: f64,
    pub dinkelbach_max_iters: usize,
    pub dual_max_iters: usize,
    pub dual_tol: f64,
    pub dual_stall_iters: usize,
    pub constraint_tol: f64,
    pub step_mu: f64,
    pub step_gamma: f64,
    pub step_upsilon: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        let c = SystemConfig::<f64>::default();
        Self {
            bandwidth_hz: c.total_bandwidth_hz,
            num_rbs: c.num_rbs,
            noise_psd_dbm_per_hz: -174.0,
            phi_e: c.phi_e,
            p_static_w: c.p_static_w,
            fronthaul_cap_bps: c.fronthaul_cap_bps,
            min_rate_bps: c.min_rate_bps,
            dinkelbach_tol: c.dinkelbach_tol,
            dinkelbach_max_iters: c.dinkelbach_max_iters,
            dual_max_iters: c.dual_max_iters,
            dual_tol: c.dual_tol,
            dual_stall_iters: c.dual_stall_iters,
            constraint_tol: c.constraint_tol,
            step_mu: c.step_schedule.mu,
            step_gamma: c.step_schedule.gamma,
            step_upsilon: c.step_schedule.upsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DropSection {
    pub num_lpns: usize,
    pub num_ues: usize,
    pub num_wireless_fronthaul: usize,
    pub isd_m: f64,
    pub min_ue_dbs_distance_m: f64,
    pub shadowing_hpn_db: f64,
    pub shadowing_lpn_db: f64,
    pub fading: FadingModel,
    pub hpn_wireless_fronthaul: bool,
    pub hpn_max_power_w: f64,
    pub lpn_max_power_w: f64,
    pub association: AssociationRule,
    pub max_resample_attempts: usize,
}

impl Default for DropSection {
    fn default() -> Self {
        let d = DropSpec::<f64>::default();
        Self {
            num_lpns: d.num_lpns,
            num_ues: d.num_ues,
            num_wireless_fronthaul: d.num_wireless_fronthaul,
            isd_m: d.isd_m,
            min_ue_dbs_distance_m: d.min_ue_dbs_distance_m,
            shadowing_hpn_db: d.shadowing_std_db.hpn_db,
            shadowing_lpn_db: d.shadowing_std_db.lpn_db,
            fading: d.fading,
            hpn_wireless_fronthaul: d.hpn_wireless_fronthaul,
            hpn_max_power_w: d.hpn_max_power_w,
            lpn_max_power_w: d.lpn_max_power_w,
            association: d.association,
            max_resample_attempts: d.max_resample_attempts,
        }
    }
}

pub type PowerSection = PowerProfile<f64>;

/// Experiment description as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentPlan {
    pub plan: PlanSection,
    pub system: SystemSection,
    #[serde(rename = "drop")]
    pub drop_spec: DropSection,
    pub power: PowerSection,
}

fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {x}")))
    }
}

fn check_non_negative(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and >= 0, got {x}")))
    }
}

fn check_count(name: &'static str, x: usize) -> Result<()> {
    if x >= 1 {
        Ok(())
    } else {
        Err(invalid(name, "must be >= 1"))
    }
}

impl ExperimentPlan {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let plan: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical TOML serialisation.
    pub fn config_hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml_string()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.plan;
        if p.sweep_values.is_empty() {
            return Err(invalid("plan.sweep_values", "must not be empty"));
        }
        if p.sweep_values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("plan.sweep_values", "must be finite"));
        }
        if p.sweep_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("plan.sweep_values", "must be strictly increasing"));
        }
        if p.axis.is_count() && p.sweep_values.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
            return Err(invalid(
                "plan.sweep_values",
                format!("{} values must be non-negative integers", p.axis.as_str()),
            ));
        }
        if p.algorithms.is_empty() {
            return Err(invalid("plan.algorithms", "must not be empty"));
        }
        if p.architectures.is_empty() {
            return Err(invalid("plan.architectures", "must not be empty"));
        }
        check_count("plan.drops_per_point", p.drops_per_point)?;
        if let Some(c) = p.per_dbs_fronthaul_cap_bps {
            check_positive("plan.per_dbs_fronthaul_cap_bps", c)?;
        }

        let s = &self.system;
        check_positive("system.bandwidth_hz", s.bandwidth_hz)?;
        check_count("system.num_rbs", s.num_rbs)?;
        if !s.noise_psd_dbm_per_hz.is_finite() {
            return Err(invalid("system.noise_psd_dbm_per_hz", "must be finite"));
        }
        check_positive("system.phi_e", s.phi_e)?;
        check_positive("system.p_static_w", s.p_static_w)?;
        check_positive("system.fronthaul_cap_bps", s.fronthaul_cap_bps)?;
        check_non_negative("system.min_rate_bps", s.min_rate_bps)?;
        check_positive("system.dinkelbach_tol", s.dinkelbach_tol)?;
        check_count("system.dinkelbach_max_iters", s.dinkelbach_max_iters)?;
        check_count("system.dual_max_iters", s.dual_max_iters)?;
        check_positive("system.dual_tol", s.dual_tol)?;
        check_positive("system.constraint_tol", s.constraint_tol)?;
        check_positive("system.step_mu", s.step_mu)?;
        check_positive("system.step_gamma", s.step_gamma)?;
        check_positive("system.step_upsilon", s.step_upsilon)?;

        let d = &self.drop_spec;
        check_count("drop.num_lpns", d.num_lpns)?;
        check_count("drop.num_ues", d.num_ues)?;
        if d.num_wireless_fronthaul > d.num_lpns {
            return Err(invalid(
                "drop.num_wireless_fronthaul",
                format!("{} exceeds drop.num_lpns = {}", d.num_wireless_fronthaul, d.num_lpns),
            ));
        }
        check_positive("drop.isd_m", d.isd_m)?;
        check_non_negative("drop.min_ue_dbs_distance_m", d.min_ue_dbs_distance_m)?;
        check_non_negative("drop.shadowing_hpn_db", d.shadowing_hpn_db)?;
        check_non_negative("drop.shadowing_lpn_db", d.shadowing_lpn_db)?;
        check_positive("drop.hpn_max_power_w", d.hpn_max_power_w)?;
        check_positive("drop.lpn_max_power_w", d.lpn_max_power_w)?;
        check_count("drop.max_resample_attempts", d.max_resample_attempts)?;

        let w = &self.power;
        check_non_negative("power.hpn_static_w", w.hpn_static_w)?;
        check_non_negative("power.lpn_static_w", w.lpn_static_w)?;
        check_non_negative("power.fronthaul_w_per_dbs", w.fronthaul_w_per_dbs)?;
        check_non_negative("power.baseband_per_bs_w", w.baseband_per_bs_w)?;
        if !(0.0..1.0).contains(&w.overhead_fraction) {
            return Err(invalid("power.overhead_fraction", "must lie in [0, 1)"));
        }
        if !(0.0..1.0).contains(&w.fronthaul_saving) {
            return Err(invalid("power.fronthaul_saving", "must lie in [0, 1)"));
        }

        if p.axis == SweepAxis::WirelessDbsCount {
            let max = p.sweep_values.last().copied().unwrap_or(0.0);
            if max > d.num_lpns as f64 {
                return Err(invalid(
                    "plan.sweep_values",
                    format!("{max} wireless stations exceed drop.num_lpns = {}", d.num_lpns),
                ));
            }
        }
        if p.axis == SweepAxis::DbsDensity && p.sweep_values[0] < 1.0 {
            return Err(invalid("plan.sweep_values", "every density point needs an LPN"));
        }
        if p.axis == SweepAxis::FronthaulCapacity && p.sweep_values[0] <= 0.0 {
            return Err(invalid("plan.sweep_values", "fronthaul capacities must be > 0"));
        }
        if p.axis == SweepAxis::MinRate && p.sweep_values[0] < 0.0 {
            return Err(invalid("plan.sweep_values", "rate floors must be >= 0"));
        }
        Ok(())
    }

    pub fn system_config(&self) -> SystemConfig<f64> {
        let s = &self.system;
        SystemConfig {
            total_bandwidth_hz: s.bandwidth_hz,
            num_rbs: s.num_rbs,
            noise_psd_w_per_hz: dbm_per_hz_to_w_per_hz(s.noise_psd_dbm_per_hz),
            phi_e: s.phi_e,
            p_static_w: s.p_static_w,
            fronthaul_cap_bps: s.fronthaul_cap_bps,
            min_rate_bps: s.min_rate_bps,
            min_rate_overrides: None,
            dinkelbach_tol: s.dinkelbach_tol,
            dinkelbach_max_iters: s.dinkelbach_max_iters,
            dual_max_iters: s.dual_max_iters,
            dual_tol: s.dual_tol,
            dual_stall_iters: s.dual_stall_iters,
            constraint_tol: s.constraint_tol,
            step_schedule: StepSchedule {
                mu: s.step_mu,
                gamma: s.step_gamma,
                upsilon: s.step_upsilon,
            },
        }
    }

    pub fn drop_spec(&self, seed: u64) -> DropSpec<f64> {
        let d = &self.drop_spec;
        DropSpec {
            seed,
            num_lpns: d.num_lpns,
            num_ues: d.num_ues,
            num_wireless_fronthaul: d.num_wireless_fronthaul,
            isd_m: d.isd_m,
            min_ue_dbs_distance_m: d.min_ue_dbs_distance_m,
            shadowing_std_db: ShadowingStd {
                hpn_db: d.shadowing_hpn_db,
                lpn_db: d.shadowing_lpn_db,
            },
            fading: d.fading,
            hpn_wireless_fronthaul: d.hpn_wireless_fronthaul,
            hpn_max_power_w: d.hpn_max_power_w,
            lpn_max_power_w: d.lpn_max_power_w,
            association: d.association,
            max_resample_attempts: d.max_resample_attempts,
        }
    }
}

/// Reads and validates an experiment plan; an empty file yields the defaults.
pub fn parse_config(path: &Path) -> Result<ExperimentPlan> {
    let s = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ExperimentPlan::from_toml_str(&s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let p = ExperimentPlan::from_toml_str("").unwrap();
        assert_eq!(p, ExperimentPlan::default());
        let cfg = p.system_config();
        assert_eq!(cfg, SystemConfig::default());
        assert_eq!(p.drop_spec(0), DropSpec::default());
    }

    #[test]
    fn unknown_key_is_rejected() {
        let e = ExperimentPlan::from_toml_str("[system]\nbandwidht_hz = 1.0\n").unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        assert!(e.to_string().contains("bandwidht_hz"));
    }

    #[test]
    fn negative_bandwidth_names_the_field() {
        let e = ExperimentPlan::from_toml_str("[system]\nbandwidth_hz = -1.0\n").unwrap_err();
        assert!(e.to_string().contains("system.bandwidth_hz"), "{e}");
    }

    #[test]
    fn round_trip() {
        let mut p = ExperimentPlan::default();
        p.plan.axis = SweepAxis::MinRate;
        p.plan.sweep_values = vec![1e6, 2.5e6, 8e6];
        p.plan.per_dbs_fronthaul_cap_bps = Some(50e6);
        p.system.noise_psd_dbm_per_hz = -170.5;
        p.drop_spec.association = AssociationRule::Open;
        let s = p.to_toml_string().unwrap();
        assert_eq!(ExperimentPlan::from_toml_str(&s).unwrap(), p);
    }

    #[test]
    fn unsorted_sweep_rejected() {
        let e = ExperimentPlan::from_toml_str("[plan]\nsweep_values = [2.0, 1.0]\n").unwrap_err();
        assert!(e.to_string().contains("plan.sweep_values"));
    }
}
