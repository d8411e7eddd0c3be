use std::collections::HashMap;

use cdsa_ee::harness::emit::{csv_string, json_string, parse_json, CSV_HEADER};
use cdsa_ee::harness::sweep::drop_seed;
use cdsa_ee::harness::{
    emit_results, parse_config, run_sweep, run_sweep_with_threads, Algorithm, ExperimentPlan, OutputFormat,
    SweepAxis,
};
use cdsa_ee::model::Architecture;
use cdsa_ee::Error;

const SMALL_PLAN: &str = r#"
[plan]
axis = "min_rate"
sweep_values = [0.0, 2e5]
drops_per_point = 3
base_seed = 42

[system]
bandwidth_hz = 1.2e6
num_rbs = 6
fronthaul_cap_bps = 4e6

[drop]
num_lpns = 3
num_ues = 5
num_wireless_fronthaul = 2
"#;

fn small_plan() -> ExperimentPlan {
    ExperimentPlan::from_toml_str(SMALL_PLAN).unwrap()
}

#[test]
fn plan_file_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.toml");
    std::fs::write(&path, SMALL_PLAN).unwrap();
    let plan = parse_config(&path).unwrap();
    assert_eq!(plan.plan.axis, SweepAxis::MinRate);
    assert_eq!(plan.plan.sweep_values, vec![0.0, 2e5]);
    assert_eq!(plan.system.num_rbs, 6);
    assert_eq!(plan.drop_spec.num_ues, 5);
    // untouched keys keep their defaults
    let d = ExperimentPlan::default();
    assert_eq!(plan.system.phi_e, d.system.phi_e);
    assert_eq!(plan.power, d.power);
    assert_eq!(plan.plan.algorithms, vec![Algorithm::Proposed, Algorithm::Static]);
}

#[test]
fn empty_file_gives_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.toml");
    std::fs::write(&path, "").unwrap();
    assert_eq!(parse_config(&path).unwrap(), ExperimentPlan::default());
}

#[test]
fn config_errors_are_reported() {
    assert!(matches!(
        ExperimentPlan::from_toml_str("[plan]\nunknown_key = 1\n"),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        ExperimentPlan::from_toml_str("[system]\nphi_e = -1.0\n"),
        Err(Error::InvalidArgument { name: "system.phi_e", .. })
    ));
    assert!(matches!(
        ExperimentPlan::from_toml_str("[plan]\nsweep_values = [2.0, 1.0]\n"),
        Err(Error::InvalidArgument { .. })
    ));
    assert!(matches!(
        ExperimentPlan::from_toml_str("[drop]\nnum_lpns = 2\nnum_wireless_fronthaul = 3\n"),
        Err(Error::InvalidArgument { .. })
    ));
    assert!(matches!(
        parse_config(std::path::Path::new("/nonexistent/plan.toml")),
        Err(Error::Io(_))
    ));
}

#[test]
fn toml_round_trip_and_hash() {
    let plan = small_plan();
    let back = ExperimentPlan::from_toml_str(&plan.to_toml_string().unwrap()).unwrap();
    assert_eq!(back, plan);
    assert_eq!(back.config_hash().unwrap(), plan.config_hash().unwrap());
    let mut other = plan.clone();
    other.plan.base_seed += 1;
    assert_ne!(other.config_hash().unwrap(), plan.config_hash().unwrap());
}

#[test]
fn seeds_follow_common_random_numbers() {
    for d in 0..50 {
        assert_eq!(drop_seed(9, 0, d, true), drop_seed(9, 4, d, true));
        assert_ne!(drop_seed(9, 0, d, false), drop_seed(9, 4, d, false));
        assert_ne!(drop_seed(9, 0, d, true), drop_seed(9, 0, d + 1, true));
        assert_ne!(drop_seed(9, 0, d, true), drop_seed(10, 0, d, true));
    }
}

#[test]
fn sweep_pairs_drops_and_respects_dominance() {
    let plan = small_plan();
    let result = run_sweep(&plan).unwrap();
    // 2 points × 2 algorithms × 2 architectures
    assert_eq!(result.rows.len(), 8);
    assert_eq!(result.drops.len(), 2 * 3 * 4);
    let mut hashes: HashMap<usize, &str> = HashMap::new();
    for d in &result.drops {
        // common random numbers: one channel per drop index across points
        let h = hashes.entry(d.drop).or_insert(&d.drop_hash);
        assert_eq!(*h, d.drop_hash);
    }
    for point in 0..2 {
        let p = result.series(point, Algorithm::Proposed, Architecture::Cdsa);
        let s = result.series(point, Algorithm::Static, Architecture::Cdsa);
        let c = result.series(point, Algorithm::Proposed, Architecture::Conventional);
        for ((p, s), c) in p.iter().zip(&s).zip(&c) {
            assert_eq!(p.drop, s.drop);
            if p.feasible() && s.feasible() {
                assert!(p.ee_bits_per_joule >= s.ee_bits_per_joule);
            }
            if p.feasible() {
                assert!(p.ee_bits_per_joule > c.ee_bits_per_joule);
                assert_eq!(p.se_bits_per_hz, c.se_bits_per_hz);
            }
        }
    }
    assert_eq!(result.provenance.base_seed, 42);
    assert_eq!(result.provenance.config_hash, plan.config_hash().unwrap());
}

#[test]
fn sweep_output_is_deterministic() {
    let plan = small_plan();
    let a = csv_string(&run_sweep_with_threads(&plan, 1).unwrap()).unwrap();
    let b = csv_string(&run_sweep_with_threads(&plan, 2).unwrap()).unwrap();
    let c = csv_string(&run_sweep(&plan).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn emitted_files_round_trip() {
    let plan = small_plan();
    let result = run_sweep(&plan).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let csv_path = dir.path().join("out.csv");
    emit_results(&result, OutputFormat::Csv, &csv_path).unwrap();
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER.to_vec());
    let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), result.rows.len());
    for (rec, row) in records.iter().zip(&result.rows) {
        assert_eq!(&rec[1], row.algorithm.as_str());
        assert_eq!(&rec[2], row.architecture.as_str());
        let ee: f64 = rec[3].parse().unwrap_or(f64::NAN);
        if row.mean_ee_bits_per_joule.is_finite() {
            assert!((ee / row.mean_ee_bits_per_joule - 1.0).abs() < 1e-8);
        }
        assert_eq!(rec[5].parse::<usize>().unwrap(), row.feasible_drops);
        assert_eq!(rec[6].parse::<usize>().unwrap(), row.total_drops);
    }

    let json_path = dir.path().join("out.json");
    emit_results(&result, OutputFormat::Json, &json_path).unwrap();
    let back = parse_json(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(back.rows.len(), result.rows.len());
    assert_eq!(back.drops.len(), result.drops.len());
    assert_eq!(back.provenance, result.provenance);
    // a second pass through the emitter is a fixed point
    assert_eq!(json_string(&back).unwrap(), json_string(&result).unwrap());
}

#[test]
fn header_only_and_single_row_csv() {
    let result = run_sweep(&small_plan()).unwrap();
    let empty = cdsa_ee::harness::SweepResult { rows: Vec::new(), drops: Vec::new(), ..result.clone() };
    assert_eq!(csv_string(&empty).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
    let one = cdsa_ee::harness::SweepResult { rows: result.rows[..1].to_vec(), ..result };
    let text = csv_string(&one).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("0.00000000e0,proposed,cdsa,"));
}

#[test]
fn shipped_figure_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let load = |name: &str| parse_config(&dir.join(name)).unwrap();
    let fig1 = load("fig1_fronthaul_capacity.toml");
    assert_eq!(fig1.plan.axis, SweepAxis::FronthaulCapacity);
    assert_eq!(fig1.plan.sweep_values.len(), 9);
    assert_eq!(fig1.plan.sweep_values[2], ExperimentPlan::default().system.fronthaul_cap_bps);
    let fig2 = load("fig2_wireless_count.toml");
    assert_eq!(fig2.plan.sweep_values, vec![2.0, 5.0, 10.0, 15.0, 20.0]);
    assert_eq!(fig2.plan.per_dbs_fronthaul_cap_bps, Some(50e6));
    let fig3 = load("fig3_min_rate.toml");
    assert_eq!(fig3.plan.axis, SweepAxis::MinRate);
    assert_eq!(fig3.plan.sweep_values.last(), Some(&10e6));
    let fig4 = load("fig4_density.toml");
    assert_eq!(fig4.plan.axis, SweepAxis::DbsDensity);
    for p in [&fig1, &fig2, &fig3, &fig4] {
        assert_eq!(p.system, ExperimentPlan::default().system);
        assert_eq!(p.plan.drops_per_point, 50);
    }
}
