//! `cdsa-ee` command-line driver.
//!
//! Exit codes: 0 success, 1 oracle verification mismatch, 2 configuration
//! error, 3 infeasible instance, 4 internal error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cdsa_ee::baselines::{build_power_model, solve_static};
use cdsa_ee::channel_gen::{generate_drop, Drop};
use cdsa_ee::harness::emit::{csv_string, json_string};
use cdsa_ee::harness::instance::{
    fixture_path, load_fixtures, make_fixture, save_fixture, FIXTURE_COUNT,
};
use cdsa_ee::harness::{parse_config, run_sweep, run_sweep_with_threads, ExperimentPlan, OutputFormat};
use cdsa_ee::model::{total_rate, AllocationSolution, Architecture};
use cdsa_ee::solver::{check_feasibility, solve_ee, SolverReport, SolverStatus};
use cdsa_ee::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

const EXIT_MISMATCH: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

/// Oracle agreement band on the fixture set.
const ORACLE_BAND: (f64, f64) = (0.98, 1.001);

#[derive(Parser)]
#[command(name = "cdsa-ee", version, about = "Energy-efficient RB and power allocation for CDSA H-CRAN")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment plan (TOML). Omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the plan's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Solves a single drop, loaded from a file or generated from the seed.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Drop JSON written by an earlier run; generated when omitted.
        #[arg(long)]
        drop: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Alg::Proposed)]
        algorithm: Alg,
        #[arg(long, value_enum, default_value_t = Arch::Cdsa)]
        architecture: Arch,
        /// Also writes the drop used to this path.
        #[arg(long)]
        save_drop: Option<PathBuf>,
    },
    /// Runs the Monte Carlo sweep described by the plan.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Checks the solver against the stored oracle fixtures.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Fixture directory.
        #[arg(long, default_value = "crates/core/tests/fixtures")]
        fixtures: PathBuf,
        /// Recomputes every fixture and its oracle value before checking.
        #[arg(long)]
        regenerate: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Alg {
    Proposed,
    Static,
}

#[derive(Clone, Copy, ValueEnum)]
enum Arch {
    Cdsa,
    Conventional,
}

impl From<Arch> for Architecture {
    fn from(a: Arch) -> Self {
        match a {
            Arch::Cdsa => Architecture::Cdsa,
            Arch::Conventional => Architecture::Conventional,
        }
    }
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn config(e: Error) -> Self {
        Self::new(EXIT_CONFIG, e.to_string())
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Self::new(EXIT_INTERNAL, e.to_string())
    }
}

/// Errors raised by library calls on already-validated inputs.
fn classify(e: Error) -> Failure {
    match e {
        Error::InvalidArgument { .. } | Error::Config(_) | Error::Generation(_) | Error::OracleBudget(_) => {
            Failure::config(e)
        }
        _ => Failure::internal(e),
    }
}

fn load_plan(c: &Common) -> Result<ExperimentPlan, Failure> {
    let mut plan = match &c.config {
        Some(p) => parse_config(p).map_err(Failure::config)?,
        None => ExperimentPlan::default(),
    };
    if let Some(seed) = c.seed {
        plan.plan.base_seed = seed;
    }
    plan.validate().map_err(Failure::config)?;
    Ok(plan)
}

fn write_out(out: Option<&Path>, body: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, body).map_err(|e| Failure::internal(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(Failure::internal),
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    status: SolverStatus,
    ee_bits_per_joule: f64,
    total_rate_bps: f64,
    total_power_w: f64,
    min_relative_slack: f64,
    seed: Option<u64>,
    report: &'a SolverReport<f64>,
    solution: &'a AllocationSolution<f64>,
}

fn solve_cmd(
    common: &Common,
    drop_path: Option<&Path>,
    alg: Alg,
    arch: Arch,
    save_drop: Option<&Path>,
) -> Result<(), Failure> {
    let plan = load_plan(common)?;
    let cfg = plan.system_config();
    let (drop, seed) = match drop_path {
        Some(p) => (Drop::load(p).map_err(Failure::config)?, None),
        None => {
            let seed = plan.plan.base_seed;
            (generate_drop(&plan.drop_spec(seed), &cfg).map_err(classify)?, Some(seed))
        }
    };
    if let Some(p) = save_drop {
        drop.save(p).map_err(Failure::internal)?;
    }
    let num_lpns = drop.topology.num_dbs() - 1;
    let pm = build_power_model(arch.into(), &cfg, &plan.power, num_lpns).map_err(Failure::config)?;
    let (sol, report) = match alg {
        Alg::Proposed => solve_ee(&drop.channel, &drop.topology, &cfg, &pm),
        Alg::Static => solve_static(&drop.channel, &drop.topology, &cfg, &pm),
    }
    .map_err(classify)?;
    let rate = total_rate(&sol, &drop.channel, &cfg).map_err(Failure::internal)?;
    let slack = check_feasibility(&sol, &drop.channel, &drop.topology, &cfg)
        .map_err(Failure::internal)?
        .min_relative_slack();
    let out = SolveOutput {
        status: report.status,
        ee_bits_per_joule: sol.ee_bits_per_joule,
        total_rate_bps: rate,
        total_power_w: pm.total_for(sol.transmit_power_w()),
        min_relative_slack: slack,
        seed,
        report: &report,
        solution: &sol,
    };
    let body = match common.format {
        Format::Json => serde_json::to_string_pretty(&out).map_err(Failure::internal)? + "\n",
        Format::Csv => format!(
            "status,ee_bits_per_joule,total_rate_bps,total_power_w,min_relative_slack\n{},{:.8e},{:.8e},{:.8e},{:.8e}\n",
            report.status.as_str(),
            out.ee_bits_per_joule,
            out.total_rate_bps,
            out.total_power_w,
            out.min_relative_slack
        ),
    };
    write_out(common.out.as_deref(), &body)?;
    if report.status == SolverStatus::Infeasible {
        return Err(Failure::new(EXIT_INFEASIBLE, "no feasible allocation found"));
    }
    Ok(())
}

fn sweep_cmd(common: &Common) -> Result<(), Failure> {
    if common.config.is_none() {
        return Err(Failure::new(EXIT_CONFIG, "sweep requires --config"));
    }
    let plan = load_plan(common)?;
    let result = match common.threads {
        0 => run_sweep(&plan),
        n => run_sweep_with_threads(&plan, n),
    }
    .map_err(classify)?;
    let body = match common.format {
        Format::Csv => csv_string(&result),
        Format::Json => json_string(&result).map(|s| s + "\n"),
    }
    .map_err(Failure::internal)?;
    write_out(common.out.as_deref(), &body)
}

#[derive(Serialize)]
struct OracleLine {
    name: String,
    oracle_ee: f64,
    solver_ee: f64,
    ratio: f64,
    status: SolverStatus,
    within: bool,
}

fn oracle_cmd(common: &Common, dir: &Path, regenerate: bool) -> Result<(), Failure> {
    if regenerate {
        std::fs::create_dir_all(dir).map_err(|e| Failure::internal(format!("{}: {e}", dir.display())))?;
        for i in 0..FIXTURE_COUNT {
            let f = make_fixture(i).map_err(classify)?;
            save_fixture(&f, &fixture_path(dir, i)).map_err(Failure::internal)?;
        }
    }
    let fixtures = load_fixtures(dir).map_err(Failure::config)?;
    if fixtures.is_empty() {
        return Err(Failure::new(EXIT_CONFIG, format!("no fixtures in {}", dir.display())));
    }
    let mut lines = Vec::new();
    for f in &fixtures {
        let i = &f.instance;
        let (sol, rep) = solve_ee(&i.channel, &i.topology, &i.config, &i.power).map_err(classify)?;
        let (ratio, within) = if f.oracle.feasible {
            let r = sol.ee_bits_per_joule / f.oracle.best_ee;
            (r, rep.is_feasible() && (ORACLE_BAND.0..=ORACLE_BAND.1).contains(&r))
        } else {
            (f64::NAN, !rep.is_feasible())
        };
        lines.push(OracleLine {
            name: f.name.clone(),
            oracle_ee: f.oracle.best_ee,
            solver_ee: sol.ee_bits_per_joule,
            ratio,
            status: rep.status,
            within,
        });
    }
    let body = match common.format {
        Format::Json => serde_json::to_string_pretty(&lines).map_err(Failure::internal)? + "\n",
        Format::Csv => {
            let mut s = String::from("name,oracle_ee,solver_ee,ratio,status,within\n");
            for l in &lines {
                s += &format!(
                    "{},{:.8e},{:.8e},{:.8e},{},{}\n",
                    l.name,
                    l.oracle_ee,
                    l.solver_ee,
                    l.ratio,
                    l.status.as_str(),
                    l.within
                );
            }
            s
        }
    };
    write_out(common.out.as_deref(), &body)?;
    let misses = lines.iter().filter(|l| !l.within).count();
    if misses > 0 {
        return Err(Failure::new(
            EXIT_MISMATCH,
            format!("{misses} of {} fixtures outside [{}, {}]", lines.len(), ORACLE_BAND.0, ORACLE_BAND.1),
        ));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve {
            common,
            drop,
            algorithm,
            architecture,
            save_drop,
        } => solve_cmd(common, drop.as_deref(), *algorithm, *architecture, save_drop.as_deref()),
        Command::Sweep { common } => sweep_cmd(common),
        Command::Oracle {
            common,
            fixtures,
            regenerate,
        } => oracle_cmd(common, fixtures, *regenerate),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
