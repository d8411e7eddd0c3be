#![allow(dead_code)]

use std::path::PathBuf;

use cdsa_ee::channel_gen::{generate_drop, AssociationRule, Drop, DropSpec};
use cdsa_ee::model::{Architecture, PowerModel, SystemConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

/// A drop with its configuration and CDSA power model.
pub struct Case {
    pub cfg: SystemConfig<f64>,
    pub pm: PowerModel<f64>,
    pub drop: Drop<f64>,
}

/// Small instance with at most ten UEs, five stations and ten RBs, drawn
/// from `seed`. Every station may serve every UE.
pub fn small_case(seed: u64) -> Case {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let num_ues = r.random_range(2..=10usize);
    let num_lpns = r.random_range(1..=4usize);
    let num_rbs = r.random_range(2..=10usize);
    let wireless = r.random_range(0..=num_lpns);
    let spec = DropSpec::<f64> {
        seed: seed.wrapping_add(500),
        num_lpns,
        num_ues,
        num_wireless_fronthaul: wireless,
        isd_m: 300.0,
        association: AssociationRule::Open,
        ..DropSpec::default()
    };
    let cfg = SystemConfig::<f64> {
        total_bandwidth_hz: 180e3 * num_rbs as f64,
        num_rbs,
        phi_e: r.random_range(1.0..5.0),
        p_static_w: r.random_range(0.1..20.0),
        min_rate_bps: [0.0, 1e5, 3e5, 1e6][r.random_range(0..4)],
        fronthaul_cap_bps: r.random_range(1e6..2e7),
        ..SystemConfig::default()
    };
    let drop = generate_drop(&spec, &cfg).expect("small drop");
    let pm = PowerModel::new(Architecture::Cdsa, cfg.phi_e, cfg.p_static_w).expect("power model");
    Case { cfg, pm, drop }
}

/// Tiny instance: `num_ues` UEs, one LPN plus the HPN, `num_rbs` RBs and a
/// wireless LPN fronthaul, in a regime where the circuit power is comparable
/// to the radiated power.
pub fn tiny_case(seed: u64, num_ues: usize, num_rbs: usize) -> Case {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let spec = DropSpec::<f64> {
        seed,
        num_lpns: 1,
        num_ues,
        num_wireless_fronthaul: 1,
        isd_m: 300.0,
        association: AssociationRule::Open,
        ..DropSpec::default()
    };
    let cfg = SystemConfig::<f64> {
        total_bandwidth_hz: 200e3 * num_rbs as f64,
        num_rbs,
        phi_e: r.random_range(1.0..4.0),
        p_static_w: r.random_range(0.2..0.5),
        min_rate_bps: [0.0, 2e5][r.random_range(0..2)],
        fronthaul_cap_bps: r.random_range(1e6..4e6),
        ..SystemConfig::default()
    };
    let drop = generate_drop(&spec, &cfg).expect("tiny drop");
    let pm = PowerModel::new(Architecture::Cdsa, cfg.phi_e, cfg.p_static_w).expect("power model");
    Case { cfg, pm, drop }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
