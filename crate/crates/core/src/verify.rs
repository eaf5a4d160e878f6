//! Machine checks of the functional inequalities, the scaling sequence behind
//! the failure of compactness, the Díaz–Saa inequality, boundary fits and the
//! weight expansion at s = 0.

use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assembly::{near_energy_sparse, OperatorSet};
use crate::error::{Error, Result};
use crate::grid::{build_grid, ell_gauge, Grid, GridFunction};
use crate::numerics::{critical_exponent, kappa_frac_sobolev};
use crate::orlicz::{entropy_term, luxemburg_norm, modular, PhiFunction};
use crate::solvers::{nehari_lower_bound, solve_frac, SolverConfig};

/// Largest refined grid built for a scaling sequence.
pub const MAX_REFINED_CELLS: usize = 1 << 17;

/// Factor-4 steps of the growth scan beyond the largest refined k.
pub const GROWTH_EXTENSION: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityVerdict {
    pub name: String,
    pub samples: usize,
    /// Smallest normalized slack over the samples; non-negative when the inequality holds exactly.
    pub worst_slack: f64,
    pub tolerance: f64,
    pub holds: bool,
}

impl InequalityVerdict {
    pub fn from_slacks(name: &str, slacks: &[f64], tolerance: f64) -> Self {
        let worst_slack = slacks.iter().copied().fold(f64::INFINITY, |m, v| if v.is_nan() { f64::NEG_INFINITY } else { m.min(v) });
        let worst_slack = if slacks.is_empty() { 0.0 } else { worst_slack };
        InequalityVerdict {
            name: name.to_string(),
            samples: slacks.len(),
            worst_slack,
            tolerance,
            holds: worst_slack >= -tolerance,
        }
    }
}

/// Seeded test fields: rough uniform samples alternating with smooth sine sums.
pub fn random_fields(grid: &Arc<Grid>, count: usize, seed: u64) -> Vec<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l, len) = (grid.interval.left, grid.interval.length());
    (0..count)
        .map(|k| {
            if k % 2 == 0 {
                let values = DVector::from_fn(grid.n_cells, |_, _| rng.gen_range(-1.0..1.0));
                GridFunction { grid: grid.clone(), values }
            } else {
                let coef: Vec<f64> = (1..=6).map(|j| rng.gen_range(-1.0..1.0) / j as f64).collect();
                GridFunction::from_fn(grid.clone(), |x| {
                    let t = std::f64::consts::PI * (x - l) / len;
                    coef.iter().enumerate().map(|(j, c)| c * ((j + 1) as f64 * t).sin()).sum()
                })
            }
        })
        .collect()
}

/// Positive fields with values in [0.2, 1.2].
pub fn random_positive_fields(grid: &Arc<Grid>, count: usize, seed: u64) -> Vec<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| GridFunction { grid: grid.clone(), values: DVector::from_fn(grid.n_cells, |_, _| 0.2 + rng.gen::<f64>()) })
        .collect()
}

fn nonzero(u: &GridFunction) -> Result<f64> {
    let l2 = u.l2_norm_sq();
    if !(l2 > 0.0) {
        return Err(Error::Precondition("the test field must be non-zero".into()));
    }
    Ok(l2)
}

/// (4/N)∫u² ln|u| ≤ ℰ_L(u,u) + (4/N) ln‖u‖₂ ‖u‖₂² + a_N‖u‖₂², slack divided by ‖u‖₂².
pub fn verify_pitt(ops: &OperatorSet, fields: &[GridFunction]) -> Result<InequalityVerdict> {
    let k = ops.constants;
    let n = k.dimension as f64;
    let mut slacks = Vec::with_capacity(fields.len());
    for u in fields {
        let l2 = nonzero(u)?;
        let rhs = ops.log_form(u, u)? + (4.0 / n) * 0.5 * l2.ln() * l2 + k.a_n * l2;
        slacks.push((rhs - (4.0 / n) * entropy_term(u)) / l2);
    }
    Ok(InequalityVerdict::from_slacks("pitt", &slacks, 1e-9))
}

/// ‖u‖²_{2*_s} ≤ κ_{N,s}‖u‖_s², slack divided by ‖u‖_s².
pub fn verify_frac_sobolev(ops: &OperatorSet, s: f64, fields: &[GridFunction]) -> Result<InequalityVerdict> {
    let kappa = kappa_frac_sobolev(ops.constants.dimension, s)?;
    let crit = critical_exponent(ops.constants.dimension, s)?;
    let mut slacks = Vec::with_capacity(fields.len());
    for u in fields {
        nonzero(u)?;
        let form = ops.frac_form(s, u, u)?;
        let lq = u.lq_norm(crit)?;
        slacks.push((kappa * form - lq * lq) / form);
    }
    Ok(InequalityVerdict::from_slacks(&format!("frac_sobolev[s={s}]"), &slacks, 1e-10))
}

/// s λ_{1,L} ≤ ln λ_{1,s} for every cached order.
pub fn verify_eigen_bound(ops: &OperatorSet) -> Result<InequalityVerdict> {
    let lambda_l = ops.log_eigenpair()?.lambda;
    let mut slacks = Vec::new();
    for s in ops.orders() {
        let lambda_s = ops.frac_eigenpair(s)?.lambda;
        slacks.push(lambda_s.ln() / s - lambda_l);
    }
    Ok(InequalityVerdict::from_slacks("eigen_log_bound", &slacks, 1e-10))
}

/// ‖u‖₂² ≤ S⁻¹ℰ(u,u) with S the first eigenvalue of the near form.
pub fn verify_poincare(ops: &OperatorSet, fields: &[GridFunction]) -> Result<InequalityVerdict> {
    let s_ln = ops.near_form_ground_state()?.lambda;
    let mut slacks = Vec::with_capacity(fields.len());
    for u in fields {
        let l2 = nonzero(u)?;
        slacks.push((ops.near_form(u, u)? / s_ln - l2) / l2);
    }
    Ok(InequalityVerdict::from_slacks("near_form_poincare", &slacks, 1e-10))
}

/// ‖u_s‖_s ≥ M(s) for the superlinear solution at every cached order, p(s) = 2 + σs, a = 1 + sω.
pub fn verify_nehari_lower_bound(ops: &OperatorSet, sigma: f64, omega: &DVector<f64>, cfg: &SolverConfig) -> Result<InequalityVerdict> {
    let mut slacks = Vec::new();
    for s in ops.orders() {
        let p = 2.0 + sigma * s;
        let a = omega.map(|w| 1.0 + s * w);
        let init = ops.frac_eigenpair(s)?.phi;
        let report = solve_frac(ops, s, p, &a, &init, cfg)?;
        if !report.converged {
            return Err(Error::Solver(format!("fractional solve did not converge at s = {s}")));
        }
        let m = nehari_lower_bound(&ops.grid, s, p, &a)?;
        slacks.push((report.hs_norm - m) / m);
    }
    Ok(InequalityVerdict::from_slacks("nehari_lower_bound", &slacks, 0.0))
}

/// Inputs of the aggregated `verify all` ledger.
#[derive(Debug, Clone)]
pub struct LedgerSpec {
    pub fields: usize,
    pub seed: u64,
    pub sigma: f64,
    pub omega: DVector<f64>,
}

pub fn verify_all(ops: &OperatorSet, spec: &LedgerSpec, cfg: &SolverConfig) -> Result<Vec<InequalityVerdict>> {
    let fields = random_fields(&ops.grid, spec.fields, spec.seed);
    let mut ledger = vec![verify_pitt(ops, &fields)?, verify_poincare(ops, &fields)?];
    for s in ops.orders() {
        ledger.push(verify_frac_sobolev(ops, s, &fields)?);
    }
    ledger.push(verify_eigen_bound(ops)?);
    ledger.push(verify_nehari_lower_bound(ops, spec.sigma, &spec.omega, cfg)?);
    Ok(ledger)
}

/// Offset in fine cells of Ω/k inside Ω, or a config error when the grids do not align.
fn scaling_offset(grid: &Grid, k: usize) -> Result<usize> {
    let iv = grid.interval;
    if !(iv.left < 0.0 && iv.right > 0.0) {
        return Err(Error::Precondition("the scaling sequence needs 0 inside the domain".into()));
    }
    if k < 2 {
        return Err(Error::Precondition(format!("scaling factor must be at least 2, got {k}")));
    }
    if grid.n_cells.checked_mul(k).map_or(true, |m| m > MAX_REFINED_CELLS) {
        return Err(Error::Config(format!("k = {k} on {} cells exceeds the refinement budget of {MAX_REFINED_CELLS} cells", grid.n_cells)));
    }
    // Ω/k starts (k − 1)|left|/h fine cells into the refined grid
    let shift = (k - 1) as f64 * (-iv.left) / grid.h;
    let rounded = shift.round();
    if (shift - rounded).abs() > 1e-9 * shift.max(1.0) {
        return Err(Error::Config("0 is not a node of the grid, so Ω/k is not a union of refined cells".into()));
    }
    Ok(rounded as usize)
}

/// u_k(x) = (k^N/ln k)^{1/2} u(kx) on the grid of Ω with k times as many cells.
pub fn build_scaling_sequence(u: &GridFunction, k: usize) -> Result<GridFunction> {
    let grid = &u.grid;
    let offset = scaling_offset(grid, k)?;
    let fine = build_grid(grid.interval, grid.n_cells * k)?;
    let kf = k as f64;
    let amp = (kf / kf.ln()).sqrt();
    let mut values = DVector::zeros(fine.n_cells);
    for i in 0..grid.n_cells {
        values[offset + i] = amp * u.values[i];
    }
    Ok(GridFunction { grid: fine, values })
}

/// ∫φ(|u_k|) by the change of variables x ↦ kx, exact for cell-wise constant u.
pub fn scaled_modular(phi: PhiFunction, u: &GridFunction, k: f64) -> f64 {
    let amp = (k / k.ln()).sqrt();
    u.h() * u.values.iter().map(|v| phi.eval(amp * v)).sum::<f64>() / k
}

/// N + ln β²/ln k − ln(ln k)/ln k.
pub fn floor_exponent(n_dim: f64, beta: f64, k: f64) -> f64 {
    let lk = k.ln();
    n_dim + (beta * beta).ln() / lk - lk.ln() / lk
}

/// Smallest integer k₀ ≥ 2 past which the floor exponent stays positive, and its infimum C₀ there.
pub fn floor_constants(n_dim: f64, beta: f64) -> Result<(usize, f64)> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Precondition(format!("β must lie in (0, 1), got {beta}")));
    }
    // in t = ln k the exponent N + (ln β² − ln t)/t has its only critical point, a minimum, at t* = e^{1 + ln β²}
    let a = (beta * beta).ln();
    let t_star = (1.0 + a).exp();
    let g_min = n_dim - (-(1.0 + a)).exp();
    let mut k0 = 2usize;
    loop {
        let g = floor_exponent(n_dim, beta, k0 as f64);
        let past_min = (k0 as f64).ln() >= t_star;
        if g > 0.0 && (past_min || g_min > 0.0) {
            break;
        }
        k0 += 1;
        if k0 > 1 << 40 {
            return Err(Error::Solver("no k₀ found for the modular floor".into()));
        }
    }
    let c0 = if (k0 as f64).ln() >= t_star { floor_exponent(n_dim, beta, k0 as f64) } else { g_min };
    Ok((k0, c0))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub k: usize,
    /// ℰ(u_k, u_k).
    pub energy: f64,
    pub l2_sq: f64,
    pub modular_critical: f64,
    pub modular_gamma: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoncompactnessReport {
    pub rows: Vec<ScalingRow>,
    /// (k, ∫γ(|u_k|)) over the k list and a geometric continuation past it.
    pub growth_scan: Vec<(f64, f64)>,
    pub beta: f64,
    pub k0: usize,
    pub c0: f64,
    /// C(N,β) = C₀β²|Ω_β|/2.
    pub floor: f64,
    /// ℰ(u_k,u_k) ≤ ℰ(u,u)/ln 2 + 2Nω_N c_N‖u‖₂².
    pub bounded: InequalityVerdict,
    /// ∫γ(|u_k|) strictly increasing over the second half of the growth scan.
    pub growth: InequalityVerdict,
    pub l2_identity: InequalityVerdict,
    pub modular_floor: InequalityVerdict,
}

/// u scaled so that ∫ u² ln(e + |u|) = 1.
pub fn normalize_critical_modular(u: &GridFunction) -> Result<GridFunction> {
    let lux = luxemburg_norm(PhiFunction::Critical, u);
    if lux == 0.0 {
        return Err(Error::Precondition("cannot normalize the zero function".into()));
    }
    Ok(u.scale(1.0 / lux))
}

/// Half the median of |u| over the cells.
pub fn default_beta(u: &GridFunction) -> f64 {
    let mut v: Vec<f64> = u.values.iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
    0.5 * median
}

pub fn verify_noncompactness(u: &GridFunction, k_list: &[usize], gamma: PhiFunction, beta: Option<f64>) -> Result<NoncompactnessReport> {
    let m = modular(PhiFunction::Critical, u);
    if (m - 1.0).abs() > 1e-8 {
        return Err(Error::Precondition(format!("u must satisfy ∫u² ln(e+|u|) = 1, got {m}")));
    }
    if k_list.is_empty() {
        return Err(Error::Precondition("empty list of scaling factors".into()));
    }
    let consts = crate::numerics::dimensional_constants(1)?;
    let n_dim = 1.0;
    let energy_u = near_energy_sparse(u, consts.c_n);
    let l2 = u.l2_norm_sq();
    let bound = energy_u / std::f64::consts::LN_2 + 2.0 * n_dim * consts.omega_n * consts.c_n * l2;
    let beta = beta.unwrap_or_else(|| default_beta(u).min(0.5));
    let (k0, c0) = floor_constants(n_dim, beta)?;
    let measure = u.h() * u.values.iter().filter(|v| v.abs() >= beta).count() as f64;
    if measure == 0.0 {
        return Err(Error::Precondition(format!("Ω_β is empty for β = {beta}")));
    }
    let floor = c0 * beta * beta * measure / 2.0;

    let mut rows = Vec::with_capacity(k_list.len());
    let (mut bounded, mut identity, mut floors) = (Vec::new(), Vec::new(), Vec::new());
    for &k in k_list {
        let uk = build_scaling_sequence(u, k)?;
        let kf = k as f64;
        let energy = near_energy_sparse(&uk, consts.c_n);
        let l2_sq = uk.l2_norm_sq();
        let row = ScalingRow {
            k,
            energy,
            l2_sq,
            modular_critical: modular(PhiFunction::Critical, &uk),
            modular_gamma: modular(gamma, &uk),
        };
        bounded.push((bound - energy) / bound);
        identity.push(-((l2_sq - l2 / kf.ln()) / l2).abs());
        if k >= k0 {
            floors.push((row.modular_critical - floor) / floor);
        }
        rows.push(row);
    }
    // beyond the refinement budget the modulars still follow from the change of variables
    let k_max = k_list.iter().copied().max().unwrap_or(2) as f64;
    let mut k = k_max.max(k0 as f64);
    for _ in 0..8 {
        k *= 4.0;
        floors.push((scaled_modular(PhiFunction::Critical, u, k) - floor) / floor);
    }
    let mut growth_scan: Vec<(f64, f64)> = rows.iter().map(|r| (r.k as f64, r.modular_gamma)).collect();
    let mut k = k_max;
    for _ in 0..GROWTH_EXTENSION {
        k *= 4.0;
        growth_scan.push((k, scaled_modular(gamma, u, k)));
    }
    let tail = &growth_scan[growth_scan.len() / 2..];
    let growth: Vec<f64> = tail.windows(2).map(|w| (w[1].1 - w[0].1) / w[0].1).collect();
    let mut growth_verdict = InequalityVerdict::from_slacks("gamma_modular_growth", &growth, 0.0);
    growth_verdict.holds = growth.len() >= 2 && growth.iter().all(|d| *d > 0.0);
    Ok(NoncompactnessReport {
        rows,
        growth_scan,
        beta,
        k0,
        c0,
        floor,
        bounded: InequalityVerdict::from_slacks("scaling_bounded", &bounded, 1e-12),
        growth: growth_verdict,
        l2_identity: InequalityVerdict::from_slacks("scaling_l2_identity", &identity, 1e-10),
        modular_floor: InequalityVerdict::from_slacks("critical_modular_floor", &floors, 0.0),
    })
}

fn check_positive(w: &GridFunction) -> Result<()> {
    if w.values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Precondition("fields must be finite and strictly positive".into()));
    }
    Ok(())
}

fn check_q(ops: &OperatorSet, q: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&q) {
        return Err(Error::Precondition(format!("q must lie in [1, 2], got {q}")));
    }
    if q < 2.0 {
        let rho = ops.constants.rho_n;
        let min = ops.h_omega.iter().fold(f64::INFINITY, |m, v| m.min(v + rho));
        if min < 0.0 {
            return Err(Error::Precondition(format!(
                "q < 2 needs h_Ω(x) + ρ_N ≥ 0 in Ω, but its minimum on the grid is {min}"
            )));
        }
    }
    Ok(())
}

/// D = ℰ_L(w₂, (w₂^q − w₁^q)/w₂^{q−1}) − ℰ_L(w₁, (w₂^q − w₁^q)/w₁^{q−1}).
pub fn diaz_saa_defect(ops: &OperatorSet, w1: &GridFunction, w2: &GridFunction, q: f64) -> Result<f64> {
    check_positive(w1)?;
    check_positive(w2)?;
    w1.same_grid(w2)?;
    check_q(ops, q)?;
    let diff = DVector::from_fn(w1.len(), |i, _| w2.values[i].powf(q) - w1.values[i].powf(q));
    let t2 = w2.with_values(DVector::from_fn(w1.len(), |i, _| diff[i] / w2.values[i].powf(q - 1.0)));
    let t1 = w1.with_values(DVector::from_fn(w1.len(), |i, _| diff[i] / w1.values[i].powf(q - 1.0)));
    Ok(ops.log_form(w2, &t2)? - ops.log_form(w1, &t1)?)
}

/// D ≥ −tol over the pairs, each defect divided by ℰ(w₁,w₁) + ℰ(w₂,w₂).
pub fn verify_diaz_saa(ops: &OperatorSet, pairs: &[(GridFunction, GridFunction)], q: f64) -> Result<InequalityVerdict> {
    let mut slacks = Vec::with_capacity(pairs.len());
    for (w1, w2) in pairs {
        let d = diaz_saa_defect(ops, w1, w2, q)?;
        let scale = ops.near_form(w1, w1)? + ops.near_form(w2, w2)?;
        slacks.push(d / scale);
    }
    Ok(InequalityVerdict::from_slacks(&format!("diaz_saa[q={q}]"), &slacks, 1e-10))
}

/// Φ(θ) = ℰ_L(v_θ^{1/q}, v_θ^{1/q}) with v_θ = (1 − θ)u₁^q + θu₂^q.
pub fn wq_profile(ops: &OperatorSet, u1: &GridFunction, u2: &GridFunction, q: f64, theta: f64) -> Result<f64> {
    let v = u1.with_values(DVector::from_fn(u1.len(), |i, _| {
        ((1.0 - theta) * u1.values[i].powf(q) + theta * u2.values[i].powf(q)).powf(1.0 / q)
    }));
    ops.log_form(&v, &v)
}

/// Midpoint convexity of Φ over all pairs of the θ grid.
pub fn verify_wq_convexity(ops: &OperatorSet, u1: &GridFunction, u2: &GridFunction, q: f64, thetas: &[f64]) -> Result<InequalityVerdict> {
    check_positive(u1)?;
    check_positive(u2)?;
    u1.same_grid(u2)?;
    check_q(ops, q)?;
    if thetas.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::Precondition("θ must lie in [0, 1]".into()));
    }
    let values = thetas.iter().map(|&t| wq_profile(ops, u1, u2, q, t)).collect::<Result<Vec<_>>>()?;
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut slacks = Vec::new();
    for i in 0..thetas.len() {
        for j in i + 1..thetas.len() {
            let mid = wq_profile(ops, u1, u2, q, 0.5 * (thetas[i] + thetas[j]))?;
            slacks.push((0.5 * (values[i] + values[j]) - mid) / scale);
        }
    }
    Ok(InequalityVerdict::from_slacks(&format!("wq_convexity[q={q}]"), &slacks, 1e-10))
}

/// Two-sided fit constant of u against ℓ^{1/2}(δ(x)).
pub fn boundary_constant(u: &GridFunction) -> Result<f64> {
    if u.values.iter().any(|v| *v < 0.0) {
        return Err(Error::Precondition("the boundary fit needs u ≥ 0".into()));
    }
    if u.linf_norm() == 0.0 {
        return Err(Error::Precondition("the boundary fit needs u ≠ 0".into()));
    }
    let mut c: f64 = 0.0;
    for (v, d) in u.values.iter().zip(u.grid.boundary_distances()) {
        if *v < 1e-12 {
            continue;
        }
        let g = ell_gauge(d)?.sqrt();
        c = c.max(v / g).max(g / v);
    }
    Ok(c)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryFit {
    pub constants: Vec<f64>,
    /// (max − min)/min over the refinement levels.
    pub spread: f64,
    pub holds: bool,
}

/// Fit constants across refinements; stable when they stay within 20% of each other.
pub fn verify_boundary_behavior(levels: &[GridFunction]) -> Result<BoundaryFit> {
    let constants = levels.iter().map(boundary_constant).collect::<Result<Vec<_>>>()?;
    let max = constants.iter().fold(0.0f64, |m, v| m.max(*v));
    let min = constants.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let spread = (max - min) / min;
    Ok(BoundaryFit { holds: max.is_finite() && spread <= 0.2, spread, constants })
}

/// eˣ − 1 − x without cancellation.
fn expm1_minus_x(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let mut term = x * x / 2.0;
        let mut acc = term;
        for k in 3..12 {
            term *= x / k as f64;
            acc += term;
        }
        acc
    } else {
        x.exp_m1() - x
    }
}

/// T(s) = ∫a(s)|φ|^{p(s)} − ‖φ‖₂² − s∫(ω + p'(0) ln|φ|)φ² for a = 1 + sω, p = 2 + p'(0)s.
pub fn taylor_residual(s: f64, phi: &GridFunction, omega: &DVector<f64>, p_prime: f64) -> Result<f64> {
    if omega.len() != phi.len() {
        return Err(Error::Dimension("weight does not match the grid".into()));
    }
    let mut acc = 0.0;
    for (v, w) in phi.values.iter().zip(omega.iter()) {
        if *v == 0.0 {
            continue;
        }
        let eps = p_prime * s * v.abs().ln();
        // (1 + sω)e^ε − 1 − sω − ε = (e^ε − 1 − ε) + sω(e^ε − 1)
        acc += v * v * (expm1_minus_x(eps) + s * w * eps.exp_m1());
    }
    Ok(acc * phi.h())
}

/// Least-squares slope of ln|y| against ln x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.abs().ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
