mod common;

use cdsa_ee::baselines::power_grid;
use cdsa_ee::harness::instance::{load_fixtures, make_fixture, Fixture, FIXTURE_COUNT, FIXTURE_GRID_LEVELS};
use cdsa_ee::model::{energy_efficiency, AllocationSolution};
use cdsa_ee::solver::{check_feasibility, solve_ee, SolverStatus};
use common::{fixture_dir, rel_diff};

fn fixtures() -> Vec<Fixture> {
    let f = load_fixtures(&fixture_dir()).unwrap();
    assert_eq!(f.len(), FIXTURE_COUNT);
    f
}

fn solve(f: &Fixture) -> AllocationSolution<f64> {
    let i = &f.instance;
    let (sol, rep) = solve_ee(&i.channel, &i.topology, &i.config, &i.power).unwrap();
    assert_ne!(rep.status, SolverStatus::Infeasible, "{}", f.name);
    sol
}

/// Moves every positive power of `sol` onto the oracle's grid, upwards or
/// downwards.
fn snap(f: &Fixture, sol: &AllocationSolution<f64>, up: bool) -> AllocationSolution<f64> {
    let topo = &f.instance.topology;
    let mut out = sol.clone();
    for k in 0..sol.num_ues {
        for m in 0..sol.num_dbs {
            let grid = power_grid(topo.stations[m].max_power_w, FIXTURE_GRID_LEVELS);
            for n in 0..sol.num_rbs {
                let i = sol.index(k, m, n);
                let p = sol.power_w[i];
                if !sol.assignment[i] || p <= 0.0 {
                    continue;
                }
                // grid is descending
                let snapped = if up {
                    grid.iter().rev().copied().find(|&g| g >= p).unwrap_or(grid[0])
                } else {
                    grid.iter().copied().find(|&g| g <= p).unwrap_or(0.0)
                };
                out.power_w[i] = snapped;
                out.assignment[i] = snapped > 0.0;
            }
        }
    }
    out
}

#[test]
fn golden_values_reproduce() {
    let stored = fixtures();
    for (index, old) in stored.iter().enumerate().take(2) {
        let fresh = make_fixture(index).unwrap();
        assert_eq!(fresh.name, old.name);
        assert_eq!(fresh.instance, old.instance);
        assert_eq!(fresh.oracle.feasible, old.oracle.feasible);
        assert!(rel_diff(fresh.oracle.best_ee, old.oracle.best_ee) < 1e-12);
        assert_eq!(fresh.oracle.best_assignment, old.oracle.best_assignment);
    }
}

#[test]
fn fixture_shapes() {
    for f in fixtures() {
        let ch = &f.instance.channel;
        assert_eq!(ch.shape(), [2, 2, 3], "{}", f.name);
        assert_eq!(f.oracle.power_grid_resolution, FIXTURE_GRID_LEVELS);
        assert!(f.oracle.feasible, "{}", f.name);
        let rep = check_feasibility(&f.oracle.to_solution(), ch, &f.instance.topology, &f.instance.config).unwrap();
        assert!(rep.is_feasible(0.0), "{}", f.name);
    }
}

#[test]
fn solver_reaches_98_percent_of_oracle() {
    for f in fixtures() {
        let sol = solve(&f);
        let ratio = sol.ee_bits_per_joule / f.oracle.best_ee;
        assert!(ratio >= 0.98, "{}: {ratio}", f.name);
    }
}

/// The oracle optimum dominates every on-grid allocation, in particular the
/// solver's own allocation snapped onto the grid whenever that stays
/// feasible. So solver / oracle never exceeds solver / snapped.
#[test]
fn oracle_dominates_snapped_solver_allocation() {
    let mut checked = 0;
    for f in fixtures() {
        let i = &f.instance;
        let sol = solve(&f);
        for up in [true, false] {
            let s = snap(&f, &sol, up);
            let rep = check_feasibility(&s, &i.channel, &i.topology, &i.config).unwrap();
            if !rep.is_feasible(0.0) {
                continue;
            }
            let ee = energy_efficiency(&s, &i.channel, &i.config, &i.power).unwrap();
            assert!(f.oracle.best_ee >= ee * (1.0 - 1e-12), "{}: oracle {} < snapped {ee}", f.name, f.oracle.best_ee);
            let bound = sol.ee_bits_per_joule / ee;
            assert!(sol.ee_bits_per_joule / f.oracle.best_ee <= bound * (1.0 + 1e-12));
            checked += 1;
        }
    }
    assert!(checked >= FIXTURE_COUNT / 2, "only {checked} snapped allocations were feasible");
}
