//! End-to-end acceptance run: one line per criterion, non-zero exit on any failure.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;
use std::time::Instant;

use loglap::assembly::{assemble, assemble_log_potential_form, quadratic_form, OperatorSet};
use loglap::asymptotics::{run_sublinear_asymptotics, run_superlinear_asymptotics, SweepSpec};
use loglap::grid::{bump_profile, build_grid, Grid, GridFunction, Interval};
use loglap::numerics::{digamma, dimensional_constants, kappa_frac_sobolev, EULER_GAMMA};
use loglap::orlicz::{energy_limit, Family, Nonlinearity, PhiFunction};
use loglap::solvers::{gradient_limit, random_init, solve_sublinear_limit, solve_superlinear_limit, SignPattern, SolverConfig};
use loglap::spectral::eigen_derivative_at_zero;
use loglap::verify::*;
use loglap::Result;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn unit_grid(n: usize) -> Arc<Grid> {
    build_grid(Interval::new(-0.5, 0.5).unwrap(), n).unwrap()
}

fn unit_ops(n: usize, s_list: &[f64]) -> OperatorSet {
    assemble(unit_grid(n), 1, s_list).unwrap()
}

fn constants() -> Result<Outcome> {
    let k = dimensional_constants(1)?;
    let rho_identity = 2.0 * LN_2 + digamma(0.5)? - EULER_GAMMA;
    let rho_err = (k.rho_n + 2.0 * EULER_GAMMA).abs().max((k.rho_n - rho_identity).abs());
    let a_closed = 2.0 * (EULER_GAMMA + LN_2 - PI.ln());
    let a_err = (k.a_n - a_closed).abs();
    let kappa_err = (kappa_frac_sobolev(1, 1e-4)? - 1.0).abs();
    outcome(
        rho_err <= 1e-12 && a_err <= 1e-12 && kappa_err <= 1e-3,
        format!("|ρ₁+2γ|={rho_err:.1e} |a₁−2(γ+ln2−lnπ)|={a_err:.1e} |κ−1|={kappa_err:.1e}"),
    )
}

fn representation() -> Result<Outcome> {
    let ops = unit_ops(256, &[]);
    let route2 = assemble_log_potential_form(&ops.grid, 1)?;
    let mut worst: f64 = 0.0;
    for u in random_fields(&ops.grid, 100, 2) {
        let a = ops.log_form(&u, &u)?;
        let b = quadratic_form(&route2, &u, &u)?;
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
    }
    outcome(worst <= 1e-8, format!("worst relative gap {worst:.2e} over 100 fields"))
}

fn eigen_derivative() -> Result<Outcome> {
    let schedule = [0.02, 0.01, 0.005];
    let ops = unit_ops(1024, &schedule);
    let d = eigen_derivative_at_zero(&ops, &schedule)?;
    let lam = ops.log_eigenpair()?.lambda;
    let rel = (d.limit - lam).abs() / lam.abs();
    let bound = verify_eigen_bound(&ops)?;
    outcome(
        rel <= 0.05 && bound.holds,
        format!("limit {:.6} vs λ₁,L {lam:.6} (rel {rel:.1e}); s·λ₁,L ≤ ln λ₁,s worst slack {:.2e}", d.limit, bound.worst_slack),
    )
}

fn pitt_and_sobolev() -> Result<Outcome> {
    let s_list = [0.05, 0.1, 0.2];
    let ops = unit_ops(256, &s_list);
    let fields = random_fields(&ops.grid, 100, 4);
    let pitt = verify_pitt(&ops, &fields)?;
    let mut detail = format!("pitt slack {:.3e}", pitt.worst_slack);
    let mut pass = pitt.holds && pitt.worst_slack >= -1e-9;
    for s in s_list {
        let v = verify_frac_sobolev(&ops, s, &fields)?;
        pass &= v.holds;
        detail.push_str(&format!("; sobolev s={s} slack {:.3e}", v.worst_slack));
    }
    outcome(pass, detail)
}

fn superlinear_limit() -> Result<Outcome> {
    let ops = unit_ops(256, &[]);
    let nl = Nonlinearity::zero(256, 1.0);
    let cfg = SolverConfig { tol: 1e-8, ..SolverConfig::default() };
    let r1 = solve_superlinear_limit(&ops, &nl, &random_init(&ops.grid, 1), &cfg)?;
    let r2 = solve_superlinear_limit(&ops, &nl, &random_init(&ops.grid, 2), &cfg)?;
    let identity = (r1.energy - 0.25 * r1.u_star.l2_norm_sq()).abs() / r1.energy.abs();
    let seeds = (r1.energy - r2.energy).abs() / r1.energy.abs();
    let pass = r1.converged
        && r2.converged
        && r1.gradient_norm <= 1e-8
        && identity <= 1e-8
        && seeds <= 1e-6
        && r1.sign_pattern != SignPattern::Mixed
        && r2.sign_pattern != SignPattern::Mixed;
    outcome(
        pass,
        format!(
            "E={:.10} grad {:.1e} identity {identity:.1e} seed gap {seeds:.1e} sign {:?}",
            r1.energy, r1.gradient_norm, r1.sign_pattern
        ),
    )
}

fn sublinear_limit() -> Result<Outcome> {
    let cfg = SolverConfig::default();
    let ops = unit_ops(256, &[]);
    let nl = Nonlinearity::zero(256, -1.0);
    let r1 = solve_sublinear_limit(&ops, &nl, &random_init(&ops.grid, 1), &cfg)?;
    let r2 = solve_sublinear_limit(&ops, &nl, &random_init(&ops.grid, 2), &cfg)?;
    let gap = r1.u_star.with_values(&r1.u_star.values - &r2.u_star.values).l2_norm();
    let mut levels = vec![r1.u_star.abs()];
    for n in [512, 1024] {
        let ops = unit_ops(n, &[]);
        let r = solve_sublinear_limit(&ops, &Nonlinearity::zero(n, -1.0), &random_init(&ops.grid, 1), &cfg)?;
        levels.push(r.u_star.abs());
    }
    let fit = verify_boundary_behavior(&levels)?;
    let ceiling = 4.0 * (0.5 + 2.0 * EULER_GAMMA).exp();
    let linf = r1.u_star.linf_norm();
    outcome(
        r1.energy < 0.0 && gap <= 1e-6 && fit.holds && linf < ceiling,
        format!(
            "E={:.8} seed L² gap {gap:.1e} boundary C {:?} spread {:.3} ‖u‖∞ {linf:.4} < {ceiling:.4}",
            r1.energy,
            fit.constants.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>(),
            fit.spread
        ),
    )
}

fn positive_pairs(grid: &Arc<Grid>, count: usize, seed: u64) -> Vec<(GridFunction, GridFunction)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_positive_fields(grid, count, seed + 1)
        .into_iter()
        .map(|w1| {
            let ratio = DVector::from_fn(grid.n_cells, |_, _| 4f64.powf(rng.gen_range(-1.0..1.0)));
            let w2 = w1.with_values(w1.values.component_mul(&ratio));
            (w1, w2)
        })
        .collect()
}

fn diaz_saa() -> Result<Outcome> {
    let ops = unit_ops(256, &[]);
    let pairs = positive_pairs(&ops.grid, 200, 7);
    let q2 = verify_diaz_saa(&ops, &pairs, 2.0)?;
    let mut proportional: f64 = 0.0;
    for (w1, _) in pairs.iter().take(20) {
        let d = diaz_saa_defect(&ops, w1, &w1.scale(2.0), 2.0)?;
        proportional = proportional.max(d.abs());
    }
    let q15 = verify_diaz_saa(&ops, &pairs, 1.5)?;
    outcome(
        q2.holds && q2.worst_slack >= -1e-10 && proportional <= 1e-12 && q15.holds,
        format!("q=2 slack {:.3e}; proportional |D| {proportional:.1e}; q=1.5 slack {:.3e}", q2.worst_slack, q15.worst_slack),
    )
}

fn noncompactness() -> Result<Outcome> {
    let grid = unit_grid(256);
    let bump = GridFunction::from_fn(grid.clone(), |x| bump_profile(&grid.interval, x));
    let u = normalize_critical_modular(&bump)?;
    let r = verify_noncompactness(&u, &[2, 4, 8, 16, 32, 64], PhiFunction::Supercritical { eps: 0.5 }, None)?;
    outcome(
        r.bounded.holds && r.modular_floor.holds && r.l2_identity.holds && r.growth.holds,
        format!(
            "scaling bound slack {:.3e}; floor C={:.4} (k₀={}) slack {:.3e}; L² identity err {:.1e}; γ-modular growth {}",
            r.bounded.worst_slack,
            r.floor,
            r.k0,
            r.modular_floor.worst_slack,
            -r.l2_identity.worst_slack,
            r.growth.holds
        ),
    )
}

fn taylor() -> Result<Outcome> {
    let ops = unit_ops(256, &[]);
    let schedule = [0.08, 0.04, 0.02, 0.01];
    let omega = DVector::from_fn(256, |i, _| 0.5 * (i as f64 * 0.05).cos());
    let mut worst = f64::INFINITY;
    for phi in random_fields(&ops.grid, 10, 9) {
        let t = schedule.iter().map(|&s| taylor_residual(s, &phi, &omega, 1.0)).collect::<Result<Vec<_>>>()?;
        worst = worst.min(loglog_slope(&schedule, &t));
    }
    outcome(worst >= 1.8, format!("smallest log–log slope {worst:.4} over 10 probes"))
}

fn superlinear_sweep() -> Result<Outcome> {
    let schedule = vec![0.1, 0.05, 0.025, 0.0125];
    let ops = unit_ops(512, &schedule);
    let spec = SweepSpec { schedule, sigma: 1.0, omega: DVector::zeros(512) };
    let r = run_superlinear_asymptotics(&ops, &spec, &SolverConfig::default())?;
    let tail: Vec<String> = r.rows.iter().map(|row| format!("{:.2e}", row.l2_gap)).collect();
    outcome(r.holds(), format!("trends {:?}; L² gaps {tail:?}", r.trends))
}

fn sublinear_sweep() -> Result<Outcome> {
    let schedule = vec![0.1, 0.05, 0.025];
    let ops = unit_ops(512, &schedule);
    let spec = SweepSpec { schedule, sigma: -1.0, omega: DVector::zeros(512) };
    let r = run_sublinear_asymptotics(&ops, &spec, &SolverConfig::default())?;
    let t = &r.trends;
    let last = r.rows.last().map(|row| row.hs_norm_sq).unwrap_or(f64::NAN);
    outcome(
        t.l1_gap && t.l2_gap && t.l4_gap && t.sandwich && t.floor && !r.partial(),
        format!("trends {t:?}; ‖u_s‖_s² {last:.4} vs floor (ln2/2)A {:.4}", r.floor),
    )
}

fn gradient() -> Result<Outcome> {
    let ops = unit_ops(128, &[]);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let weight = DVector::from_fn(128, |i, _| 0.3 * (i as f64 / 20.0).sin());
    let families = [
        Nonlinearity::zero(128, 1.0),
        Nonlinearity::linear(weight.clone(), -1.0)?,
        Nonlinearity::new(Family::LogPower { theta: 0.5 }, weight.clone(), 0.5)?,
        Nonlinearity::new(Family::LogLog { mu: 2.0 }, weight, 1.2)?,
    ];
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let nl = &families[k % families.len()];
        let u = GridFunction { grid: ops.grid.clone(), values: DVector::from_fn(128, |_, _| rng.gen_range(-1.0..1.0)) };
        let v = u.with_values(DVector::from_fn(128, |_, _| rng.gen_range(-1.0..1.0)));
        let analytic = gradient_limit(&ops, nl, &u)?.values.dot(&v.values);
        let e = |t: f64| energy_limit(&ops, nl, &u.with_values(&u.values + &v.values * t));
        let fd = (e(1e-5)? - e(-1e-5)?) / 2e-5;
        worst = worst.max((analytic - fd).abs() / analytic.abs().max(1e-300));
    }
    outcome(worst <= 1e-6, format!("worst relative gap {worst:.2e} over 20 pairs"))
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 12] = [
        ("constants", constants),
        ("representation equivalence", representation),
        ("eigen-derivative", eigen_derivative),
        ("pitt and fractional sobolev", pitt_and_sobolev),
        ("superlinear limiting solve", superlinear_limit),
        ("sublinear limiting solve", sublinear_limit),
        ("diaz-saa", diaz_saa),
        ("non-compactness", noncompactness),
        ("taylor expansion", taylor),
        ("superlinear sweep", superlinear_sweep),
        ("sublinear sweep", sublinear_sweep),
        ("gradient", gradient),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<28} {} ({:.2}s) {detail}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
