//! Least-energy solvers: preconditioned quasi-Newton descent with Armijo
//! backtracking, optionally constrained to the Nehari manifold by radial
//! re-projection after every trial step.

use std::collections::VecDeque;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assembly::OperatorSet;
use crate::error::{Error, Result};
use crate::grid::{bump_profile, Grid, GridFunction};
use crate::numerics::{critical_exponent, kappa_frac_sobolev};
use crate::orlicz::{
    energy_frac, energy_limit, entropy_term, fibering_first_root, nehari_project_frac, nehari_project_limit,
    nehari_residual_frac, nehari_residual_limit, weighted_power, Nonlinearity,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Tolerance on the gradient norm in the dual of the near-form metric.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub armijo_c1: f64,
    pub backtrack: f64,
    pub initial_step: f64,
    /// Number of stored curvature pairs.
    pub memory: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iters: 5000, seed: 1, armijo_c1: 1e-4, backtrack: 0.5, initial_step: 1.0, memory: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignPattern {
    Nonnegative,
    Nonpositive,
    Mixed,
}

pub fn sign_pattern(u: &GridFunction) -> SignPattern {
    let pos = u.values.iter().any(|v| *v > 0.0);
    let neg = u.values.iter().any(|v| *v < 0.0);
    match (pos, neg) {
        (true, true) => SignPattern::Mixed,
        (_, false) => SignPattern::Nonnegative,
        (false, true) => SignPattern::Nonpositive,
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub u_star: GridFunction,
    pub energy: f64,
    pub gradient_norm: f64,
    pub nehari_residual: f64,
    pub iterations: usize,
    pub sign_pattern: SignPattern,
    pub converged: bool,
    /// Energies of the accepted iterates, starting with the initial point.
    pub energy_history: Vec<f64>,
    /// The run restarted from a scaled bump after stalling at zero.
    pub restarted: bool,
    /// |u| replaced u because it has no larger energy.
    pub abs_accepted: bool,
    /// The fibering derivative changed sign again past the first root at some projection.
    pub extra_fibering_roots: bool,
    /// ℍ-norm √ℰ(u,u) for the limiting problem, ‖u‖_s for the fractional one.
    pub hs_norm: f64,
    /// Per-order Nehari lower bound M(s) (fractional superlinear runs).
    pub nehari_lower_bound: Option<f64>,
}

/// Objective on nodal values; the gradient is the vector of partial derivatives.
trait Objective {
    fn value(&self, x: &DVector<f64>) -> Result<f64>;
    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>>;
    /// Absolute size of round-off in `value`.
    fn noise(&self, x: &DVector<f64>) -> f64;
    /// Maps a trial point back to the admissible set.
    fn retract(&self, x: DVector<f64>) -> Result<DVector<f64>> {
        Ok(x)
    }
}

struct Outcome {
    x: DVector<f64>,
    value: f64,
    grad_norm: f64,
    iterations: usize,
    history: Vec<f64>,
    converged: bool,
}

fn dual_norm(chol: &Cholesky<f64, Dyn>, g: &DVector<f64>) -> f64 {
    g.dot(&chol.solve(g)).max(0.0).sqrt()
}

fn minimize(obj: &dyn Objective, x0: DVector<f64>, precond: &Cholesky<f64, Dyn>, cfg: &SolverConfig) -> Result<Outcome> {
    let mut x = obj.retract(x0)?;
    let mut value = obj.value(&x)?;
    let mut g = obj.gradient(&x)?;
    let mut grad_norm = dual_norm(precond, &g);
    let mut history = vec![value];
    let mut pairs: VecDeque<(DVector<f64>, DVector<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        if !(value.is_finite() && grad_norm.is_finite()) {
            return Err(Error::Solver(format!("non-finite energy or gradient at iteration {iterations}")));
        }
        if grad_norm <= cfg.tol {
            return Ok(Outcome { x, value, grad_norm, iterations, history, converged: true });
        }
        iterations += 1;
        let mut accepted = None;
        for attempt in 0..2 {
            if attempt == 1 {
                if pairs.is_empty() {
                    break;
                }
                pairs.clear();
            }
            let d = search_direction(&g, &pairs, precond);
            let slope = g.dot(&d);
            if !(slope < 0.0) {
                pairs.clear();
                continue;
            }
            accepted = line_search(obj, &x, value, grad_norm, &d, slope, precond, cfg)?;
            if accepted.is_some() {
                break;
            }
        }
        let Some((xn, vn, gn, gnorm)) = accepted else {
            return Ok(Outcome { x, value, grad_norm, iterations, history, converged: false });
        };
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        if sy > 1e-14 * s.norm() * y.norm() && sy > 0.0 {
            pairs.push_back((s, y, 1.0 / sy));
            if pairs.len() > cfg.memory {
                pairs.pop_front();
            }
        }
        x = xn;
        value = vn;
        g = gn;
        grad_norm = gnorm;
        history.push(value);
    }
    Ok(Outcome { x, value, grad_norm, iterations, history, converged: grad_norm <= cfg.tol })
}

fn search_direction(
    g: &DVector<f64>,
    pairs: &VecDeque<(DVector<f64>, DVector<f64>, f64)>,
    precond: &Cholesky<f64, Dyn>,
) -> DVector<f64> {
    let mut q = g.clone();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * s.dot(&q);
        q.axpy(-a, y, 1.0);
        alphas.push(a);
    }
    let mut r = precond.solve(&q);
    if let Some((s, y, _)) = pairs.back() {
        let py = precond.solve(y);
        let gamma = s.dot(y) / y.dot(&py);
        if gamma.is_finite() && gamma > 0.0 {
            r *= gamma;
        }
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = rho * y.dot(&r);
        r.axpy(a - b, s, 1.0);
    }
    -r
}

type Step = (DVector<f64>, f64, DVector<f64>, f64);

#[allow(clippy::too_many_arguments)]
fn line_search(
    obj: &dyn Objective,
    x: &DVector<f64>,
    value: f64,
    grad_norm: f64,
    d: &DVector<f64>,
    slope: f64,
    precond: &Cholesky<f64, Dyn>,
    cfg: &SolverConfig,
) -> Result<Option<Step>> {
    let noise = obj.noise(x);
    let mut t = cfg.initial_step;
    for _ in 0..60 {
        let trial = obj.retract(x + d * t);
        if let Ok(trial) = trial {
            if let Ok(v) = obj.value(&trial) {
                if v.is_finite() {
                    let armijo = v <= value + cfg.armijo_c1 * t * slope;
                    // near a minimizer the decrease drowns in round-off; fall back on the gradient
                    let flat = v <= value + noise;
                    if armijo || flat {
                        let g = obj.gradient(&trial)?;
                        let gnorm = dual_norm(precond, &g);
                        if armijo || gnorm < grad_norm {
                            return Ok(Some((trial, v, g, gnorm)));
                        }
                    }
                }
            }
        }
        t *= cfg.backtrack;
    }
    Ok(None)
}

fn noise_scale(terms: &[f64]) -> f64 {
    64.0 * f64::EPSILON * terms.iter().map(|t| t.abs()).sum::<f64>().max(f64::MIN_POSITIVE)
}

struct LimitObjective<'a> {
    ops: &'a OperatorSet,
    nl: &'a Nonlinearity,
    nehari: bool,
    extra_roots: std::cell::Cell<bool>,
}

impl LimitObjective<'_> {
    fn gf(&self, x: &DVector<f64>) -> GridFunction {
        GridFunction { grid: self.ops.grid.clone(), values: x.clone() }
    }
}

impl Objective for LimitObjective<'_> {
    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        energy_limit(self.ops, self.nl, &self.gf(x))
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(gradient_limit(self.ops, self.nl, &self.gf(x))?.values)
    }

    fn noise(&self, x: &DVector<f64>) -> f64 {
        let u = self.gf(x);
        let quad = x.dot(&(&self.ops.e_near * x)) + (self.ops.constants.rho_n * u.l2_norm_sq()).abs();
        noise_scale(&[quad, entropy_term(&u), u.l2_norm_sq()])
    }

    fn retract(&self, x: DVector<f64>) -> Result<DVector<f64>> {
        if !self.nehari {
            return Ok(x);
        }
        let u = self.gf(&x);
        if self.nl.is_linear() {
            Ok(nehari_project_limit(self.ops, self.nl, &u)?.values)
        } else {
            let root = fibering_first_root(self.ops, self.nl, &u)?;
            if root.extra_sign_changes {
                self.extra_roots.set(true);
            }
            Ok(x * root.r)
        }
    }
}

/// ∇𝔼(u) = A_L u − M(f(x,u) + σ u ln|u|), as a vector of partial derivatives.
pub fn gradient_limit(ops: &OperatorSet, nl: &Nonlinearity, u: &GridFunction) -> Result<GridFunction> {
    ops.check(u)?;
    if nl.weight.len() != ops.n() {
        return Err(Error::Dimension("nonlinearity weight does not match the grid".into()));
    }
    let h = ops.h();
    let mut g = &ops.a_log * &u.values;
    for i in 0..ops.n() {
        let v = u.values[i];
        let log = if v == 0.0 { 0.0 } else { v * v.abs().ln() };
        g[i] -= h * (nl.f(i, v) + nl.sigma * log);
    }
    Ok(u.with_values(g))
}

/// ∇E_s(u) = A_s u − M a|u|^{p−2}u.
pub fn gradient_frac(ops: &OperatorSet, s: f64, p: f64, a: &DVector<f64>, u: &GridFunction) -> Result<GridFunction> {
    ops.check(u)?;
    let h = ops.h();
    let mut g = &ops.frac(s)?.matrix * &u.values;
    for i in 0..ops.n() {
        let v = u.values[i];
        if v != 0.0 {
            g[i] -= h * a[i] * v.abs().powf(p - 1.0) * v.signum();
        }
    }
    Ok(u.with_values(g))
}

fn preconditioner(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    m.clone().cholesky().ok_or_else(|| Error::Solver("preconditioner is not positive definite".into()))
}

/// Seeded initial guess: a bump with multiplicative noise plus a small sign-indefinite perturbation.
pub fn random_init(grid: &std::sync::Arc<Grid>, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let iv = grid.interval;
    let values = DVector::from_iterator(
        grid.n_cells,
        grid.centers.iter().map(|&x| bump_profile(&iv, x) * (0.5 + rng.gen::<f64>()) + 0.05 * (rng.gen::<f64>() - 0.5)),
    );
    GridFunction { grid: grid.clone(), values }
}

pub fn bump_init(grid: &std::sync::Arc<Grid>) -> GridFunction {
    GridFunction::from_fn(grid.clone(), |x| bump_profile(&grid.interval, x))
}

fn check_init(ops: &OperatorSet, init: &GridFunction) -> Result<()> {
    ops.check(init)?;
    if init.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("initial guess must be finite".into()));
    }
    Ok(())
}

fn limit_report(ops: &OperatorSet, nl: &Nonlinearity, out: Outcome, extra: bool) -> Result<SolveReport> {
    let u = GridFunction { grid: ops.grid.clone(), values: out.x };
    let nehari_residual = if u.linf_norm() > 0.0 { nehari_residual_limit(ops, nl, &u)? } else { 0.0 };
    let hs_norm = ops.near_form(&u, &u)?.max(0.0).sqrt();
    Ok(SolveReport {
        sign_pattern: sign_pattern(&u),
        energy: out.value,
        gradient_norm: out.grad_norm,
        nehari_residual,
        iterations: out.iterations,
        converged: out.converged,
        energy_history: out.history,
        restarted: false,
        abs_accepted: false,
        extra_fibering_roots: extra,
        hs_norm,
        nehari_lower_bound: None,
        u_star: u,
    })
}

/// Least-energy solution of the limiting problem with 0 < σ < 4/N, minimized over the Nehari manifold.
pub fn solve_superlinear_limit(ops: &OperatorSet, nl: &Nonlinearity, init: &GridFunction, cfg: &SolverConfig) -> Result<SolveReport> {
    let n_dim = ops.constants.dimension as f64;
    if !(nl.sigma > 0.0 && nl.sigma < 4.0 / n_dim) {
        return Err(Error::Precondition(format!("superlinear regime needs sigma in (0, 4/N) = (0, {}), got {}", 4.0 / n_dim, nl.sigma)));
    }
    check_init(ops, init)?;
    if init.linf_norm() == 0.0 {
        return Err(Error::Precondition("initial guess must be non-zero".into()));
    }
    let obj = LimitObjective { ops, nl, nehari: true, extra_roots: std::cell::Cell::new(false) };
    let precond = preconditioner(&ops.e_near)?;
    let out = minimize(&obj, init.values.clone(), &precond, cfg)?;
    limit_report(ops, nl, out, obj.extra_roots.get())
}

/// Largest t among 1, 1/2, 1/4, … with 𝔼(t·bump) < 0.
fn negative_energy_seed(value: impl Fn(&DVector<f64>) -> Result<f64>, bump: &DVector<f64>) -> Result<DVector<f64>> {
    let mut t = 1.0;
    for _ in 0..80 {
        let x = bump * t;
        if value(&x)? < 0.0 {
            return Ok(x);
        }
        t *= 0.5;
    }
    Err(Error::Solver("no negative-energy multiple of the bump was found".into()))
}

/// Global minimizer of the coercive energy for σ < 0.
pub fn solve_sublinear_limit(ops: &OperatorSet, nl: &Nonlinearity, init: &GridFunction, cfg: &SolverConfig) -> Result<SolveReport> {
    if !(nl.sigma < 0.0) {
        return Err(Error::Precondition(format!("sublinear regime needs sigma < 0, got {}", nl.sigma)));
    }
    check_init(ops, init)?;
    let obj = LimitObjective { ops, nl, nehari: false, extra_roots: std::cell::Cell::new(false) };
    let precond = preconditioner(&ops.e_near)?;
    let bump = bump_init(&ops.grid).values;
    let value = |x: &DVector<f64>| obj.value(x);
    let mut restarted = false;
    let mut x0 = init.values.clone();
    if x0.amax() == 0.0 {
        x0 = negative_energy_seed(value, &bump)?;
        restarted = true;
    }
    let mut out = minimize(&obj, x0, &precond, cfg)?;
    if !(out.value < 0.0) {
        let x0 = negative_energy_seed(value, &bump)?;
        restarted = true;
        out = minimize(&obj, x0, &precond, cfg)?;
        if !(out.value < 0.0) {
            return Err(Error::Solver("descent stalled at non-negative energy after restart".into()));
        }
    }
    let mut abs_accepted = false;
    let abs = out.x.abs();
    if abs != out.x && obj.value(&abs)? <= out.value {
        let mut history = out.history.clone();
        let rerun = minimize(&obj, abs, &precond, cfg)?;
        history.extend(rerun.history.iter().copied());
        out = Outcome { iterations: out.iterations + rerun.iterations, history, ..rerun };
        abs_accepted = true;
    }
    let mut report = limit_report(ops, nl, out, false)?;
    report.restarted = restarted;
    report.abs_accepted = abs_accepted;
    Ok(report)
}

struct FracObjective<'a> {
    ops: &'a OperatorSet,
    s: f64,
    p: f64,
    a: &'a DVector<f64>,
    matrix: &'a DMatrix<f64>,
    nehari: bool,
}

impl FracObjective<'_> {
    fn gf(&self, x: &DVector<f64>) -> GridFunction {
        GridFunction { grid: self.ops.grid.clone(), values: x.clone() }
    }
}

impl Objective for FracObjective<'_> {
    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        energy_frac(self.ops, self.s, self.p, self.a, &self.gf(x))
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(gradient_frac(self.ops, self.s, self.p, self.a, &self.gf(x))?.values)
    }

    fn noise(&self, x: &DVector<f64>) -> f64 {
        noise_scale(&[x.dot(&(self.matrix * x)), weighted_power(self.a, self.p, &self.gf(x))])
    }

    fn retract(&self, x: DVector<f64>) -> Result<DVector<f64>> {
        if self.nehari {
            Ok(nehari_project_frac(self.ops, self.s, self.p, self.a, &self.gf(&x))?.values)
        } else {
            Ok(x)
        }
    }
}

/// Per-order Nehari lower bound M(s) = (‖a‖_{β}|Ω|^{1−1/β−p/2*}κ_{N,s}^{p/2})^{1/(2−p)}
/// with p(s) = 2 + p'(0)s and β(s) the smallest admissible exponent plus one.
pub fn nehari_lower_bound(grid: &Grid, s: f64, p: f64, a: &DVector<f64>) -> Result<f64> {
    let n_dim = 1.0;
    let crit = critical_exponent(1, s)?;
    let p_prime = (p - 2.0) / s;
    let delta = 1.0 - n_dim * p_prime / 4.0;
    if !(delta > 1e-8) {
        return Err(Error::Precondition(format!("the lower bound needs p'(0) < 4/N, got {p_prime}")));
    }
    let gamma = delta / 2.0;
    let beta = (crit / (crit - p)).max(1.0 + (n_dim - 2.0 * s) / (2.0 * s * (delta - gamma))) + 1.0;
    let omega = grid.interval.length();
    let norm_a = (grid.h * a.iter().map(|w| w.abs().powf(beta)).sum::<f64>()).powf(1.0 / beta);
    let k = kappa_frac_sobolev(1, s)?;
    let base = norm_a * omega.powf(1.0 - 1.0 / beta - p / crit) * k.powf(p / 2.0);
    Ok(base.powf(1.0 / (2.0 - p)))
}

/// Least-energy solution of the fractional problem with exponent p ∈ (1,2) ∪ (2, 2*_s).
pub fn solve_frac(
    ops: &OperatorSet,
    s: f64,
    p: f64,
    a: &DVector<f64>,
    init: &GridFunction,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let frac = ops.frac(s)?;
    if p == 2.0 {
        return Err(Error::Precondition("p = 2 is the linear eigenvalue problem".into()));
    }
    let crit = critical_exponent(1, s)?;
    if !(p > 1.0 && p < crit) {
        return Err(Error::Precondition(format!("p must lie in (1, 2) or (2, {crit}) at s = {s}, got {p}")));
    }
    if a.len() != ops.n() {
        return Err(Error::Dimension("weight does not match the grid".into()));
    }
    check_init(ops, init)?;
    let superlinear = p > 2.0;
    let obj = FracObjective { ops, s, p, a, matrix: &frac.matrix, nehari: superlinear };
    let precond = preconditioner(&(&ops.e_near * s))?;
    let gf = |x: DVector<f64>| GridFunction { grid: ops.grid.clone(), values: x };
    let mut restarted = false;
    let mut abs_accepted = false;
    let out = if superlinear {
        if init.linf_norm() == 0.0 {
            return Err(Error::Precondition("initial guess must be non-zero".into()));
        }
        minimize(&obj, init.values.clone(), &precond, cfg)?
    } else {
        let bump = bump_init(&ops.grid).values;
        let value = |x: &DVector<f64>| obj.value(x);
        let mut x0 = init.values.clone();
        if x0.amax() == 0.0 {
            x0 = negative_energy_seed(value, &bump)?;
            restarted = true;
        }
        let mut out = minimize(&obj, x0, &precond, cfg)?;
        if !(out.value < 0.0) {
            out = minimize(&obj, negative_energy_seed(value, &bump)?, &precond, cfg)?;
            restarted = true;
            if !(out.value < 0.0) {
                return Err(Error::Solver("descent stalled at non-negative energy after restart".into()));
            }
        }
        let abs = out.x.abs();
        if abs != out.x && obj.value(&abs)? <= out.value {
            let mut history = out.history.clone();
            let rerun = minimize(&obj, abs, &precond, cfg)?;
            history.extend(rerun.history.iter().copied());
            out = Outcome { iterations: out.iterations + rerun.iterations, history, ..rerun };
            abs_accepted = true;
        }
        out
    };
    let u = gf(out.x);
    let form = ops.frac_form(s, &u, &u)?;
    // undefined once (p − 2)/s reaches 4/N
    let nehari_lower_bound = if superlinear { nehari_lower_bound(&ops.grid, s, p, a).ok() } else { None };
    Ok(SolveReport {
        sign_pattern: sign_pattern(&u),
        energy: out.value,
        gradient_norm: out.grad_norm,
        nehari_residual: nehari_residual_frac(ops, s, p, a, &u)?,
        iterations: out.iterations,
        converged: out.converged,
        energy_history: out.history,
        restarted,
        abs_accepted,
        extra_fibering_roots: false,
        hs_norm: form.max(0.0).sqrt(),
        nehari_lower_bound,
        u_star: u,
    })
}
