use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{build_power_model, solve_static_capped};
use crate::channel_gen::{generate_drop, Drop};
use crate::error::{Error, Result};
use crate::model::{AllocationSolution, Architecture, PowerModel, SystemConfig};
use crate::solver::{solve_ee_with_incumbent, FronthaulGroups, SolverReport, SolverStatus};

use super::config::{Algorithm, ArchitectureMode, ExperimentPlan, SweepAxis};

/// Outcome of one (drop, algorithm, architecture) triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropRecord {
    pub point: usize,
    pub axis_value: f64,
    pub drop: usize,
    pub seed: u64,
    pub drop_hash: String,
    pub algorithm: Algorithm,
    pub architecture: Architecture,
    pub status: SolverStatus,
    pub ee_bits_per_joule: f64,
    /// Sum rate over the system bandwidth, bit/s/Hz.
    pub se_bits_per_hz: f64,
    pub total_power_w: f64,
    pub dual_iterations: usize,
    /// The proposed solver returned the static incumbent.
    #[serde(default)]
    pub incumbent_used: bool,
}

impl DropRecord {
    pub fn feasible(&self) -> bool {
        self.status != SolverStatus::Infeasible
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub algorithm: Algorithm,
    pub architecture: Architecture,
    /// Mean over feasible drops only; NaN (JSON `null`) when none is.
    #[serde(deserialize_with = "nan_or_f64")]
    pub mean_ee_bits_per_joule: f64,
    pub std_ee: f64,
    pub feasible_drops: usize,
    pub total_drops: usize,
    #[serde(deserialize_with = "nan_or_f64")]
    pub mean_se_bits_per_hz: f64,
    #[serde(deserialize_with = "nan_or_f64")]
    pub mean_dual_iterations: f64,
    /// Drops of this series feasible at every point of the axis.
    pub paired_drops: usize,
    /// Mean over those drops, so every point averages the same drops.
    #[serde(deserialize_with = "nan_or_f64")]
    pub paired_mean_ee_bits_per_joule: f64,
}

impl SweepRow {
    pub fn feasibility_rate(&self) -> f64 {
        if self.total_drops == 0 {
            0.0
        } else {
            self.feasible_drops as f64 / self.total_drops as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub base_seed: u64,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub provenance: Provenance,
    pub rows: Vec<SweepRow>,
    pub drops: Vec<DropRecord>,
}

impl SweepResult {
    pub fn row(&self, axis_value: f64, alg: Algorithm, arch: Architecture) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.axis_value == axis_value && r.algorithm == alg && r.architecture == arch)
    }

    /// Per-drop records of one series in drop order.
    pub fn series(&self, point: usize, alg: Algorithm, arch: Architecture) -> Vec<&DropRecord> {
        self.drops
            .iter()
            .filter(|d| d.point == point && d.algorithm == alg && d.architecture == arch)
            .collect()
    }
}

fn nan_or_f64<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one drop. With common random numbers the sweep point is ignored.
pub fn drop_seed(base_seed: u64, point: usize, drop: usize, common: bool) -> u64 {
    let mut s = splitmix64(base_seed);
    if !common {
        s = splitmix64(s ^ (point as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93));
    }
    splitmix64(s ^ drop as u64)
}

/// SHA-256 over station layout, association and gain tensor.
pub fn drop_hash(d: &Drop<f64>) -> String {
    let mut h = Sha256::new();
    for s in &d.topology.stations {
        h.update(s.position_m[0].to_le_bytes());
        h.update(s.position_m[1].to_le_bytes());
        h.update(s.max_power_w.to_le_bytes());
        h.update([s.wireless_fronthaul as u8]);
    }
    for u in &d.topology.ues_m {
        h.update(u[0].to_le_bytes());
        h.update(u[1].to_le_bytes());
    }
    if let Some(a) = &d.topology.association {
        for &m in a {
            h.update((m as u64).to_le_bytes());
        }
    }
    for g in &d.channel.gains {
        h.update(g.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Inputs of one sweep point.
struct Point {
    plan: ExperimentPlan,
    cfg: SystemConfig<f64>,
}

fn point_inputs(plan: &ExperimentPlan, value: f64) -> Point {
    let mut p = plan.clone();
    match plan.plan.axis {
        SweepAxis::FronthaulCapacity => p.system.fronthaul_cap_bps = value,
        SweepAxis::WirelessDbsCount => p.drop_spec.num_wireless_fronthaul = value as usize,
        SweepAxis::MinRate => p.system.min_rate_bps = value,
        SweepAxis::DbsDensity => {
            let m = value as usize;
            let base = plan.drop_spec.num_lpns;
            let w = plan.drop_spec.num_wireless_fronthaul;
            p.drop_spec.num_lpns = m;
            p.drop_spec.num_wireless_fronthaul = ((w * m) as f64 / base as f64).round() as usize;
        }
    }
    let cfg = p.system_config();
    Point { plan: p, cfg }
}

fn groups_for(
    alg: Algorithm,
    d: &Drop<f64>,
    cfg: &SystemConfig<f64>,
    per_dbs: Option<f64>,
) -> FronthaulGroups<f64> {
    let w = d.topology.num_wireless().max(1) as f64;
    match (alg, per_dbs) {
        (Algorithm::Proposed, None) => FronthaulGroups::pooled(&d.topology, cfg.fronthaul_cap_bps),
        (Algorithm::Proposed, Some(c)) => FronthaulGroups::pooled(&d.topology, c * w),
        (Algorithm::Static, cap) => FronthaulGroups::per_dbs(&d.topology, cfg.fronthaul_cap_bps, cap),
    }
}

fn run_drop(plan: &ExperimentPlan, pt: &Point, point: usize, value: f64, drop: usize) -> Result<Vec<DropRecord>> {
    let seed = drop_seed(plan.plan.base_seed, point, drop, plan.plan.common_random_numbers);
    let fail = |e: Error| {
        Error::SolverState(format!("point {point} (axis value {value}) drop {drop} seed {seed}: {e}"))
    };
    let d = generate_drop(&pt.plan.drop_spec(seed), &pt.cfg).map_err(fail)?;
    let hash = drop_hash(&d);
    let num_lpns = pt.plan.drop_spec.num_lpns;
    let models: Vec<(Architecture, PowerModel<f64>)> = plan
        .plan
        .architectures
        .iter()
        .map(|&a| build_power_model(a, &pt.cfg, &pt.plan.power, num_lpns).map(|pm| (a, pm)))
        .collect::<Result<_>>()
        .map_err(fail)?;
    let cdsa = build_power_model(Architecture::Cdsa, &pt.cfg, &pt.plan.power, num_lpns).map_err(fail)?;
    let per_dbs = plan.plan.per_dbs_fronthaul_cap_bps;

    let cdsa_only = [(Architecture::Cdsa, cdsa)];
    let solve_targets: &[(Architecture, PowerModel<f64>)] = match plan.plan.architecture_mode {
        ArchitectureMode::SharedAllocation => &cdsa_only,
        ArchitectureMode::Reoptimize => &models,
    };
    // Static first, so its allocation can seed the proposed solver.
    let mut order = plan.plan.algorithms.clone();
    order.sort_by_key(|&a| a != Algorithm::Static);
    let mut solved: Vec<(Algorithm, Architecture, AllocationSolution<f64>, SolverReport<f64>)> = Vec::new();
    for &alg in &order {
        for (arch, pm) in solve_targets {
            let (sol, rep) = match alg {
                Algorithm::Static => solve_static_capped(&d.channel, &d.topology, &pt.cfg, pm, per_dbs),
                Algorithm::Proposed => {
                    let inc = solved
                        .iter()
                        .find(|s| s.0 == Algorithm::Static && s.1 == *arch && s.3.is_feasible())
                        .filter(|_| plan.plan.static_incumbent)
                        .map(|s| &s.2);
                    let groups = groups_for(alg, &d, &pt.cfg, per_dbs);
                    solve_ee_with_incumbent(&d.channel, &d.topology, &pt.cfg, pm, &groups, inc)
                }
            }
            .map_err(fail)?;
            solved.push((alg, *arch, sol, rep));
        }
    }

    let mut out = Vec::new();
    for &alg in &plan.plan.algorithms {
        for (arch, pm) in &models {
            let key = match plan.plan.architecture_mode {
                ArchitectureMode::SharedAllocation => Architecture::Cdsa,
                ArchitectureMode::Reoptimize => *arch,
            };
            let (_, _, sol, rep) = solved
                .iter()
                .find(|s| s.0 == alg && s.1 == key)
                .expect("every requested pair was solved");
            let rate = crate::model::total_rate(sol, &d.channel, &pt.cfg).map_err(fail)?;
            let power = pm.total_for(sol.transmit_power_w());
            out.push(DropRecord {
                point,
                axis_value: value,
                drop,
                seed,
                drop_hash: hash.clone(),
                algorithm: alg,
                architecture: *arch,
                status: rep.status,
                ee_bits_per_joule: rate / power,
                se_bits_per_hz: rate / pt.cfg.total_bandwidth_hz,
                total_power_w: power,
                dual_iterations: rep.dual_iters.iter().sum(),
                incumbent_used: rep.incumbent_used,
            });
        }
    }
    Ok(out)
}

/// Drop indices of one series that are feasible at every point.
fn always_feasible(plan: &ExperimentPlan, records: &[DropRecord], alg: Algorithm, arch: Architecture) -> Vec<bool> {
    let mut ok = vec![true; plan.plan.drops_per_point];
    for r in records {
        if r.algorithm == alg && r.architecture == arch && !r.feasible() {
            ok[r.drop] = false;
        }
    }
    ok
}

fn aggregate(plan: &ExperimentPlan, records: &[DropRecord]) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for (point, &value) in plan.plan.sweep_values.iter().enumerate() {
        for &alg in &plan.plan.algorithms {
            for &arch in &plan.plan.architectures {
                let keep = always_feasible(plan, records, alg, arch);
                let series: Vec<&DropRecord> = records
                    .iter()
                    .filter(|r| r.point == point && r.algorithm == alg && r.architecture == arch)
                    .collect();
                let paired: Vec<f64> = series
                    .iter()
                    .filter(|r| keep[r.drop])
                    .map(|r| r.ee_bits_per_joule)
                    .collect();
                let ok: Vec<&&DropRecord> = series.iter().filter(|r| r.feasible()).collect();
                let n = ok.len();
                let mean = |f: fn(&DropRecord) -> f64| -> f64 {
                    if n == 0 {
                        f64::NAN
                    } else {
                        ok.iter().map(|r| f(r)).sum::<f64>() / n as f64
                    }
                };
                let mean_ee = mean(|r| r.ee_bits_per_joule);
                let std_ee = if n < 2 {
                    0.0
                } else {
                    let ss: f64 = ok
                        .iter()
                        .map(|r| (r.ee_bits_per_joule - mean_ee).powi(2))
                        .sum();
                    (ss / (n - 1) as f64).sqrt()
                };
                rows.push(SweepRow {
                    axis_value: value,
                    algorithm: alg,
                    architecture: arch,
                    mean_ee_bits_per_joule: mean_ee,
                    std_ee,
                    feasible_drops: n,
                    total_drops: series.len(),
                    mean_se_bits_per_hz: mean(|r| r.se_bits_per_hz),
                    mean_dual_iterations: mean(|r| r.dual_iterations as f64),
                    paired_drops: paired.len(),
                    paired_mean_ee_bits_per_joule: if paired.is_empty() {
                        f64::NAN
                    } else {
                        paired.iter().sum::<f64>() / paired.len() as f64
                    },
                });
            }
        }
    }
    rows
}

/// Runs every sweep point on the current rayon pool.
pub fn run_sweep(plan: &ExperimentPlan) -> Result<SweepResult> {
    plan.validate()?;
    let points: Vec<Point> = plan
        .plan
        .sweep_values
        .iter()
        .map(|&v| point_inputs(plan, v))
        .collect();
    for p in &points {
        p.plan.validate()?;
    }
    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..plan.plan.drops_per_point).map(move |d| (p, d)))
        .collect();
    let per_task: Vec<Vec<DropRecord>> = tasks
        .par_iter()
        .map(|&(p, d)| run_drop(plan, &points[p], p, plan.plan.sweep_values[p], d))
        .collect::<Result<_>>()?;
    let drops: Vec<DropRecord> = per_task.into_iter().flatten().collect();
    Ok(SweepResult {
        axis: plan.plan.axis,
        provenance: Provenance {
            config_hash: plan.config_hash()?,
            base_seed: plan.plan.base_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
        rows: aggregate(plan, &drops),
        drops,
    })
}

/// Calibrates `power.baseband_per_bs_w` so the mean CDSA-over-conventional
/// EE gap of the Proposed allocation equals `target` on the drops of the
/// plan's first sweep point.
pub fn calibrate_conventional(plan: &ExperimentPlan, target: f64) -> Result<f64> {
    let mut p = plan.clone();
    p.plan.sweep_values.truncate(1);
    p.plan.algorithms = vec![Algorithm::Proposed];
    p.plan.architectures = vec![Architecture::Cdsa];
    let result = run_sweep(&p)?;
    let pt = point_inputs(&p, p.plan.sweep_values[0]);
    let cdsa = build_power_model(Architecture::Cdsa, &pt.cfg, &pt.plan.power, pt.plan.drop_spec.num_lpns)?;
    let samples: Vec<(f64, f64)> = result
        .drops
        .iter()
        .filter(|d| d.feasible())
        .map(|d| {
            let rate = d.se_bits_per_hz * pt.cfg.total_bandwidth_hz;
            let tx = (d.total_power_w - cdsa.p_static_w) / cdsa.phi_e;
            (rate, tx)
        })
        .collect();
    crate::baselines::calibrate_baseband(&pt.cfg, &pt.plan.power, pt.plan.drop_spec.num_lpns, &samples, target)
}

/// Runs the sweep on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(plan: &ExperimentPlan, threads: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::SolverState(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep(plan))
}
