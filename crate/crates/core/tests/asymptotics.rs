mod common;

use common::*;
use loglap::asymptotics::*;
use loglap::numerics::EULER_GAMMA;
use loglap::orlicz::energy_frac;
use loglap::solvers::SolverConfig;
use loglap::Error;
use nalgebra::DVector;

#[test]
fn decreasing_tail_rules() {
    assert!(decreasing_tail(&[5.0, 9.0, 3.0, 2.0, 1.0]));
    assert!(!decreasing_tail(&[5.0, 3.0, 3.0, 1.0]));
    assert!(!decreasing_tail(&[1.0]));
    assert!(!decreasing_tail(&[2.0, f64::NAN, 1.0]));
}

#[test]
fn superlinear_sweep_unit_interval() {
    let schedule = vec![0.1, 0.05, 0.025, 0.0125];
    let ops = ops(512, &schedule);
    let spec = SweepSpec { schedule: schedule.clone(), sigma: 1.0, omega: DVector::zeros(512) };
    let r = run_superlinear_asymptotics(&ops, &spec, &SolverConfig::default()).unwrap();
    assert!(!r.partial());
    assert!(r.holds(), "{:?}", r.trends);
    assert!(r.limit_identity_gap <= 1e-8 * r.energy_target.abs());
    let s: Vec<f64> = r.rows.iter().map(|row| row.s).collect();
    assert_eq!(s, schedule);
    assert!(r.rows.iter().all(|row| row.converged));
}

#[test]
fn superlinear_sweep_with_weight() {
    let schedule = vec![0.08, 0.04, 0.02];
    let ops = ops(256, &schedule);
    let omega = DVector::from_fn(256, |i, _| 0.5 * (i as f64 / 40.0).sin());
    let spec = SweepSpec { schedule, sigma: 1.5, omega };
    let r = run_superlinear_asymptotics(&ops, &spec, &SolverConfig::default()).unwrap();
    assert!(r.trends.l2_gap && r.trends.energy_gap && r.trends.lower_bound, "{:?}", r.trends);
}

#[test]
fn sublinear_sweep_unit_interval() {
    let schedule = vec![0.1, 0.05, 0.025];
    let ops = ops(512, &schedule);
    let spec = SweepSpec { schedule, sigma: -1.0, omega: DVector::zeros(512) };
    let r = run_sublinear_asymptotics(&ops, &spec, &SolverConfig::default()).unwrap();
    assert!(r.holds(), "{:?}", r.trends);
    let ceiling = 4.0 * (0.5 + 2.0 * EULER_GAMMA).exp();
    assert!((r.linf_ceiling - ceiling).abs() < 1e-12 * ceiling);
    assert!((ceiling - 20.920_419_486_318_517_58).abs() < 1e-11);
    assert!(r.solutions.iter().all(|u| u.values.iter().all(|v| *v >= 0.0)));
}

#[test]
fn uniform_energy_bound_is_stable_under_refinement() {
    let schedule = vec![0.1, 0.05, 0.025];
    let mut maxima = Vec::new();
    for n in [256, 512] {
        let ops = ops(n, &schedule);
        let spec = SweepSpec { schedule: schedule.clone(), sigma: -1.0, omega: DVector::zeros(n) };
        let r = run_sublinear_asymptotics(&ops, &spec, &SolverConfig::default()).unwrap();
        maxima.push(r.rows.iter().map(|row| row.h_energy).fold(0.0f64, f64::max));
    }
    assert!(maxima.iter().all(|m| m.is_finite()));
    assert!((maxima[1] - maxima[0]).abs() <= 0.1 * maxima[0], "{maxima:?}");
}

#[test]
fn floor_constant_matches_formula() {
    let ops = ops(128, &[]);
    let eig = ops.log_eigenpair().unwrap();
    let phi = &eig.phi;
    let h = ops.h();
    let ent: f64 = phi.values.iter().map(|v| v * v * v.ln()).sum::<f64>() * h;
    let omega = DVector::from_element(128, 0.3);
    let a = floor_constant(&ops, &omega, -1.0).unwrap();
    let expected = (1.0 - 2.0 * eig.lambda + 2.0 * (0.3 - ent)).exp();
    assert!((a - expected).abs() < 1e-12 * expected);
}

#[test]
fn sandwich_brackets_solution_energy() {
    let ops = ops(128, &[0.05]);
    let a = DVector::from_element(128, 1.0);
    let (lo, hi) = sandwich_bounds(&ops, 0.05, 1.95, &a).unwrap();
    assert!(lo > 0.0 && lo <= hi);
}

#[test]
fn frozen_operator_quotient() {
    // with a ≡ 1 and p ≡ 2, E_s(u)/s = (‖u‖_s² − ‖u‖²)/(2s) tends to ½ℰ_L(u,u)
    let schedule = [0.04, 0.02, 0.01, 0.005];
    let ops = ops(128, &schedule);
    let u = random_fields(&ops.grid, 1, 4).remove(0);
    let a = DVector::from_element(128, 1.0);
    let target = 0.5 * ops.log_form(&u, &u).unwrap();
    let gaps: Vec<f64> = schedule.iter().map(|&s| (energy_frac(&ops, s, 2.0, &a, &u).unwrap() / s - target).abs()).collect();
    assert!(decreasing_tail(&gaps), "{gaps:?}");
    assert!(gaps.windows(2).all(|w| w[1] < 0.6 * w[0]));
}

fn random_fields(grid: &std::sync::Arc<loglap::grid::Grid>, n: usize, seed: u64) -> Vec<loglap::grid::GridFunction> {
    loglap::verify::random_fields(grid, n, seed)
}

#[test]
fn sweep_preconditions() {
    let ops = ops(64, &[0.1, 0.05]);
    let cfg = SolverConfig::default();
    let spec = SweepSpec { schedule: vec![0.1, 0.025], sigma: 1.0, omega: DVector::zeros(64) };
    assert!(matches!(run_superlinear_asymptotics(&ops, &spec, &cfg).unwrap_err(), Error::Config(_)));
    let spec = SweepSpec { schedule: vec![0.05, 0.1], sigma: 1.0, omega: DVector::zeros(64) };
    assert!(matches!(run_superlinear_asymptotics(&ops, &spec, &cfg).unwrap_err(), Error::Config(_)));
    let spec = SweepSpec { schedule: vec![0.1, 0.05], sigma: 1.0, omega: DVector::zeros(64) };
    assert!(matches!(run_sublinear_asymptotics(&ops, &spec, &cfg).unwrap_err(), Error::Precondition(_)));
    let spec = SweepSpec { schedule: vec![0.1, 0.05], sigma: 1.0, omega: DVector::zeros(32) };
    assert!(matches!(run_superlinear_asymptotics(&ops, &spec, &cfg).unwrap_err(), Error::Dimension(_)));
    let spec = SweepSpec { schedule: vec![0.1, 0.05], sigma: 5.0, omega: DVector::zeros(64) };
    assert!(matches!(run_superlinear_asymptotics(&ops, &spec, &cfg).unwrap_err(), Error::Precondition(_)));
}
