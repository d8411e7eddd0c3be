mod common;

use cdsa_ee::model::{compute_rate, AllocationSolution, ChannelState, PowerModel, SystemConfig, Topology};
use cdsa_ee::solver::{check_feasibility, solve_ee};
use common::small_case;
use serde::{de::DeserializeOwned, Serialize};

/// Re-reads a value through JSON at another precision.
fn cast<A: Serialize, B: DeserializeOwned>(a: &A) -> B {
    serde_json::from_str(&serde_json::to_string(a).unwrap()).unwrap()
}

#[test]
fn single_precision_rate_matches() {
    let cfg32 = SystemConfig::<f32>::default();
    let cfg64 = SystemConfig::<f64>::default();
    for (p, g) in [(0.13, 1e-10), (20.0, 1e-13), (1e-3, 1e-8)] {
        let a = compute_rate(p as f32, g as f32, &cfg32).unwrap() as f64;
        let b = compute_rate(p, g, &cfg64).unwrap();
        assert!((a / b - 1.0).abs() < 1e-5, "{a} vs {b}");
    }
}

/// Both precisions reach the same verdict and an f32 allocation is feasible
/// in f64 arithmetic. Rounding can steer the RB assignment elsewhere, so the
/// EE match is tight in the typical case and loose in the worst.
#[test]
fn single_precision_solve_tracks_double() {
    let mut diffs = Vec::new();
    for seed in 0..40 {
        let case = small_case(seed);
        let ch32: ChannelState<f32> = cast(&case.drop.channel);
        let topo32: Topology<f32> = cast(&case.drop.topology);
        let cfg32: SystemConfig<f32> = cast(&case.cfg);
        let pm32: PowerModel<f32> = cast(&case.pm);
        let (s64, r64) = solve_ee(&case.drop.channel, &case.drop.topology, &case.cfg, &case.pm).unwrap();
        let (s32, r32) = solve_ee(&ch32, &topo32, &cfg32, &pm32).unwrap();
        assert_eq!(r64.is_feasible(), r32.is_feasible(), "seed {seed}");
        if !r32.is_feasible() {
            continue;
        }
        let back: AllocationSolution<f64> = cast(&s32);
        let rep = check_feasibility(&back, &case.drop.channel, &case.drop.topology, &case.cfg).unwrap();
        assert!(rep.is_feasible(case.cfg.constraint_tol), "seed {seed}");
        let d = (s32.ee_bits_per_joule as f64 / s64.ee_bits_per_joule - 1.0).abs();
        assert!(d < 0.02, "seed {seed}: {d}");
        diffs.push(d);
    }
    diffs.sort_by(f64::total_cmp);
    assert!(diffs[diffs.len() / 2] < 1e-5, "median {}", diffs[diffs.len() / 2]);
}
