use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::oracle::{brute_force_solve, OracleOptions, OracleResult};
use crate::channel_gen::{generate_drop, AssociationRule, DropSpec};
use crate::error::{Error, Result};
use crate::model::{Architecture, ChannelState, PowerModel, SystemConfig, Topology};

/// Self-contained problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub config: SystemConfig<f64>,
    pub power: PowerModel<f64>,
    pub topology: Topology<f64>,
    pub channel: ChannelState<f64>,
}

impl Instance {
    pub fn validate(&self) -> Result<()> {
        self.config.validate_for(self.channel.num_ues)?;
        self.power.validate()?;
        self.topology.validate()?;
        self.channel.validate()
    }
}

/// Oracle golden record stored next to its instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub instance: Instance,
    pub oracle: OracleResult<f64>,
}

pub const FIXTURE_COUNT: usize = 20;
pub const FIXTURE_GRID_LEVELS: usize = 64;

/// Two UEs, one LPN plus the HPN, three RBs, in a regime where the circuit
/// power is comparable to the radiated power so the power grid matters.
pub fn fixture_instance(index: usize) -> Result<Instance> {
    let num_rbs = 3;
    let wireless = index % 2 == 1;
    let spec = DropSpec::<f64> {
        seed: 9000 + index as u64,
        num_lpns: 1,
        num_ues: 2,
        num_wireless_fronthaul: usize::from(wireless),
        isd_m: 300.0,
        association: AssociationRule::Open,
        ..DropSpec::default()
    };
    let phi = [1.0, 2.0, 4.0][index % 3];
    let p_static = [0.2, 0.35, 0.5][(index / 3) % 3];
    let rmin = [0.0, 2e5, 6e5, 1.2e6][(index / 2) % 4];
    let config = SystemConfig {
        total_bandwidth_hz: 200e3 * num_rbs as f64,
        num_rbs,
        phi_e: phi,
        p_static_w: p_static,
        min_rate_bps: rmin,
        fronthaul_cap_bps: [1.5e6, 3e6][(index / 4) % 2],
        ..SystemConfig::default()
    };
    let drop = generate_drop(&spec, &config)?;
    Ok(Instance {
        power: PowerModel::new(Architecture::Cdsa, phi, p_static)?,
        config,
        topology: drop.topology,
        channel: drop.channel,
    })
}

pub fn make_fixture(index: usize) -> Result<Fixture> {
    let instance = fixture_instance(index)?;
    let oracle = brute_force_solve(
        &instance.channel,
        &instance.topology,
        &instance.config,
        &instance.power,
        OracleOptions {
            grid_levels: FIXTURE_GRID_LEVELS,
            ..OracleOptions::default()
        },
    )?;
    Ok(Fixture {
        name: format!("fixture_{index:02}"),
        instance,
        oracle,
    })
}

pub fn fixture_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("fixture_{index:02}.json"))
}

pub fn save_fixture(f: &Fixture, path: &Path) -> Result<()> {
    let s = serde_json::to_string_pretty(f).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, s).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load_fixture(path: &Path) -> Result<Fixture> {
    let s = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let f: Fixture = serde_json::from_str(&s).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    f.instance.validate()?;
    Ok(f)
}

/// Every `fixture_*.json` in `dir`, sorted by name.
pub fn load_fixtures(dir: &Path) -> Result<Vec<Fixture>> {
    let rd = std::fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("fixture_") && n.ends_with(".json"))
        })
        .collect();
    paths.sort();
    paths.iter().map(|p| load_fixture(p)).collect()
}
