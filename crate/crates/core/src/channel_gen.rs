//! Seeded random drops: hexagonal cell geometry, LPN/UE placement and the
//! per-RB channel-gain tensor.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::config::{non_negative, positive};
use crate::model::{ChannelState, Station, StationKind, SystemConfig, Topology};
use crate::scalar::Scalar;

/// Smallest gain ever emitted.
pub const GAIN_FLOOR: f64 = 1e-30;

const STREAM_GEOMETRY: u64 = 0;
const STREAM_WIRELESS: u64 = 1;
const STREAM_UES: u64 = 2;
const STREAM_CHANNEL: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FadingModel {
    /// Independent unit-mean exponential |h|² per (UE, DBS, RB).
    #[default]
    Rayleigh,
    /// |h|² = 1 everywhere.
    None,
}

/// How UEs may be served by data base stations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AssociationRule {
    /// Any DBS may serve any UE.
    Open,
    /// Each UE is served only by the DBS with the smallest path loss.
    #[default]
    StrongestPathGain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowingStd<T> {
    pub hpn_db: T,
    pub lpn_db: T,
}

impl<T: Scalar> ShadowingStd<T> {
    pub fn of(&self, kind: StationKind) -> T {
        match kind {
            StationKind::Hpn => self.hpn_db,
            StationKind::Lpn => self.lpn_db,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropSpec<T> {
    pub seed: u64,
    pub num_lpns: usize,
    pub num_ues: usize,
    pub num_wireless_fronthaul: usize,
    pub isd_m: T,
    pub min_ue_dbs_distance_m: T,
    pub shadowing_std_db: ShadowingStd<T>,
    pub fading: FadingModel,
    pub hpn_wireless_fronthaul: bool,
    pub hpn_max_power_w: T,
    pub lpn_max_power_w: T,
    pub association: AssociationRule,
    /// Placement attempts per node before giving up.
    pub max_resample_attempts: usize,
}

impl<T: Scalar> Default for DropSpec<T> {
    fn default() -> Self {
        Self {
            seed: 0,
            num_lpns: 20,
            num_ues: 50,
            num_wireless_fronthaul: 10,
            isd_m: T::lit(500.0),
            min_ue_dbs_distance_m: T::lit(10.0),
            shadowing_std_db: ShadowingStd {
                hpn_db: T::lit(8.0),
                lpn_db: T::lit(10.0),
            },
            fading: FadingModel::Rayleigh,
            hpn_wireless_fronthaul: false,
            hpn_max_power_w: T::lit(20.0),
            lpn_max_power_w: T::lit(0.13),
            association: AssociationRule::StrongestPathGain,
            max_resample_attempts: 10_000,
        }
    }
}

impl<T: Scalar> DropSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.num_lpns == 0 {
            return Err(invalid("num_lpns", "must be >= 1"));
        }
        if self.num_ues == 0 {
            return Err(invalid("num_ues", "must be >= 1"));
        }
        if self.num_wireless_fronthaul > self.num_lpns {
            return Err(invalid(
                "num_wireless_fronthaul",
                format!(
                    "{} exceeds num_lpns = {}",
                    self.num_wireless_fronthaul, self.num_lpns
                ),
            ));
        }
        positive("isd_m", self.isd_m)?;
        non_negative("min_ue_dbs_distance_m", self.min_ue_dbs_distance_m)?;
        non_negative("shadowing_std_db.hpn_db", self.shadowing_std_db.hpn_db)?;
        non_negative("shadowing_std_db.lpn_db", self.shadowing_std_db.lpn_db)?;
        positive("hpn_max_power_w", self.hpn_max_power_w)?;
        positive("lpn_max_power_w", self.lpn_max_power_w)?;
        if self.max_resample_attempts == 0 {
            return Err(invalid("max_resample_attempts", "must be >= 1"));
        }
        Ok(())
    }

    /// Circumradius of the hexagonal cell.
    pub fn cell_radius_m(&self) -> T {
        self.isd_m / T::lit(3.0).sqrt()
    }

    pub fn cast<U: Scalar>(&self) -> DropSpec<U> {
        let c = |x: T| U::lit(x.as_f64());
        DropSpec {
            seed: self.seed,
            num_lpns: self.num_lpns,
            num_ues: self.num_ues,
            num_wireless_fronthaul: self.num_wireless_fronthaul,
            isd_m: c(self.isd_m),
            min_ue_dbs_distance_m: c(self.min_ue_dbs_distance_m),
            shadowing_std_db: ShadowingStd {
                hpn_db: c(self.shadowing_std_db.hpn_db),
                lpn_db: c(self.shadowing_std_db.lpn_db),
            },
            fading: self.fading,
            hpn_wireless_fronthaul: self.hpn_wireless_fronthaul,
            hpn_max_power_w: c(self.hpn_max_power_w),
            lpn_max_power_w: c(self.lpn_max_power_w),
            association: self.association,
            max_resample_attempts: self.max_resample_attempts,
        }
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Flat-topped hexagon centred at the origin.
fn in_hexagon(x: f64, y: f64, radius: f64) -> bool {
    let s3 = 3f64.sqrt();
    y.abs() <= s3 / 2.0 * radius && s3 * x.abs() + y.abs() <= s3 * radius
}

fn sample_hexagon<R: Rng>(rng: &mut R, radius: f64) -> [f64; 2] {
    let h = 3f64.sqrt() / 2.0 * radius;
    loop {
        let x = rng.random_range(-radius..=radius);
        let y = rng.random_range(-h..=h);
        if in_hexagon(x, y, radius) {
            return [x, y];
        }
    }
}

/// Path loss in dB for a station kind at `distance_m` metres.
pub fn path_loss_db<T: Scalar>(kind: StationKind, distance_m: T) -> Result<T> {
    if !(distance_m.is_finite() && distance_m > T::zero()) {
        return Err(invalid(
            "distance_m",
            format!("must be finite and > 0, got {distance_m}"),
        ));
    }
    let d_km = distance_m / T::lit(1000.0);
    let (a, b) = match kind {
        StationKind::Hpn => (128.1, 37.6),
        StationKind::Lpn => (140.7, 36.7),
    };
    Ok(T::lit(a) + T::lit(b) * d_km.log10())
}

/// Places the HPN at the origin and LPNs and UEs uniformly in the hexagon.
pub fn generate_topology<T: Scalar>(spec: &DropSpec<T>) -> Result<Topology<T>> {
    spec.validate()?;
    let radius = spec.cell_radius_m().as_f64();
    let dmin = spec.min_ue_dbs_distance_m.as_f64();
    if dmin >= 2.0 * radius {
        return Err(Error::Generation(format!(
            "min UE-DBS distance {dmin} m cannot be met inside a cell of radius {radius} m"
        )));
    }

    let mut geo = rng(spec.seed, STREAM_GEOMETRY);
    let mut sites: Vec<[f64; 2]> = (0..spec.num_lpns)
        .map(|_| sample_hexagon(&mut geo, radius))
        .collect();
    sites.push([0.0, 0.0]);

    let mut ue_rng = rng(spec.seed, STREAM_UES);
    let mut ues = Vec::with_capacity(spec.num_ues);
    for k in 0..spec.num_ues {
        let mut placed = None;
        for _ in 0..spec.max_resample_attempts {
            let p = sample_hexagon(&mut ue_rng, radius);
            if sites
                .iter()
                .all(|s| (p[0] - s[0]).hypot(p[1] - s[1]) >= dmin)
            {
                placed = Some(p);
                break;
            }
        }
        match placed {
            Some(p) => ues.push(p),
            None => {
                return Err(Error::Generation(format!(
                    "UE {k} could not be placed {dmin} m from every DBS after {} attempts",
                    spec.max_resample_attempts
                )))
            }
        }
    }

    let mut order: Vec<usize> = (0..spec.num_lpns).collect();
    order.shuffle(&mut rng(spec.seed, STREAM_WIRELESS));
    let mut wireless = vec![false; spec.num_lpns];
    for &m in &order[..spec.num_wireless_fronthaul] {
        wireless[m] = true;
    }

    let mut stations: Vec<Station<T>> = sites[..spec.num_lpns]
        .iter()
        .zip(&wireless)
        .map(|(p, &w)| Station {
            kind: StationKind::Lpn,
            position_m: [T::lit(p[0]), T::lit(p[1])],
            max_power_w: spec.lpn_max_power_w,
            wireless_fronthaul: w,
        })
        .collect();
    stations.push(Station {
        kind: StationKind::Hpn,
        position_m: [T::zero(), T::zero()],
        max_power_w: spec.hpn_max_power_w,
        wireless_fronthaul: spec.hpn_wireless_fronthaul,
    });

    let mut topo = Topology {
        stations,
        ues_m: ues.iter().map(|u| [T::lit(u[0]), T::lit(u[1])]).collect(),
        cell_radius_m: spec.cell_radius_m(),
        association: None,
    };
    if spec.association == AssociationRule::StrongestPathGain {
        topo.association = Some(strongest_path_gain(&topo)?);
    }
    Ok(topo)
}

/// Index of the DBS with the smallest path loss for every UE; ties go to the
/// lower index.
pub fn strongest_path_gain<T: Scalar>(topo: &Topology<T>) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(topo.num_ues());
    for k in 0..topo.num_ues() {
        let mut best = (0, f64::INFINITY);
        for (m, s) in topo.stations.iter().enumerate() {
            let d = topo.distance_m(k, m).max(T::lit(1e-3));
            let pl = path_loss_db(s.kind, d)?.as_f64();
            if pl < best.1 {
                best = (m, pl);
            }
        }
        out.push(best.0);
    }
    Ok(out)
}

/// Gain tensor from path loss, one shadowing draw per UE–DBS pair and one
/// small-scale fade per RB.
pub fn synthesize_channel<T: Scalar>(
    topo: &Topology<T>,
    spec: &DropSpec<T>,
    cfg: &SystemConfig<T>,
) -> Result<ChannelState<T>> {
    spec.validate()?;
    topo.validate()?;
    if cfg.num_rbs == 0 {
        return Err(invalid("num_rbs", "must be >= 1"));
    }
    let (nk, nm, nn) = (topo.num_ues(), topo.num_dbs(), cfg.num_rbs);
    let mut r = rng(spec.seed, STREAM_CHANNEL);
    let mut gains = Vec::with_capacity(nk * nm * nn);
    for k in 0..nk {
        for m in 0..nm {
            let kind = topo.stations[m].kind;
            let d = topo.distance_m(k, m).max(T::lit(1e-3));
            let pl = path_loss_db(kind, d)?.as_f64();
            let z: f64 = r.sample(StandardNormal);
            let shadow = z * spec.shadowing_std_db.of(kind).as_f64();
            let mean = 10f64.powf(-(pl + shadow) / 10.0);
            for _ in 0..nn {
                let fade: f64 = match spec.fading {
                    FadingModel::Rayleigh => r.sample(Exp1),
                    FadingModel::None => 1.0,
                };
                gains.push(T::lit((mean * fade).max(GAIN_FLOOR)));
            }
        }
    }
    ChannelState::new(nk, nm, nn, gains)
}

/// Topology and gains generated from one spec.
pub fn generate_drop<T: Scalar>(
    spec: &DropSpec<T>,
    cfg: &SystemConfig<T>,
) -> Result<Drop<T>> {
    let topology = generate_topology(spec)?;
    let channel = synthesize_channel(&topology, spec, cfg)?;
    Ok(Drop { topology, channel })
}

/// Exported drop file: node positions, fronthaul flags and the gain tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drop<T> {
    pub topology: Topology<T>,
    pub channel: ChannelState<T>,
}

impl<T: Scalar> Drop<T> {
    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        self.channel.validate()?;
        if self.topology.num_ues() != self.channel.num_ues
            || self.topology.num_dbs() != self.channel.num_dbs
        {
            return Err(Error::ShapeMismatch(format!(
                "topology {}x{} vs channel {:?}",
                self.topology.num_ues(),
                self.topology.num_dbs(),
                self.channel.shape()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(s).map_err(|e| invalid("drop", e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }
}
