//! Small-order sweeps: fractional solutions at a decreasing schedule of
//! orders compared with the solution of the limiting logarithmic problem.

use nalgebra::DVector;
use serde::Serialize;

use crate::assembly::OperatorSet;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::orlicz::{energy_frac, entropy_term, limit_projection_radius, weighted_power, Nonlinearity};
use crate::solvers::{solve_frac, solve_sublinear_limit, solve_superlinear_limit, SolveReport, SolverConfig};
use crate::verify::taylor_residual;

/// p(s) = 2 + σs, a(s,x) = 1 + sω(x).
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub schedule: Vec<f64>,
    pub sigma: f64,
    pub omega: DVector<f64>,
}

impl SweepSpec {
    fn check(&self, ops: &OperatorSet) -> Result<()> {
        if self.schedule.is_empty() {
            return Err(Error::Config("empty s schedule".into()));
        }
        if self.schedule.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("the s schedule must be strictly decreasing".into()));
        }
        if self.omega.len() != ops.n() {
            return Err(Error::Dimension("ω does not match the grid".into()));
        }
        for &s in &self.schedule {
            ops.frac(s)?;
        }
        Ok(())
    }

    pub fn exponent(&self, s: f64) -> f64 {
        2.0 + self.sigma * s
    }

    pub fn weight(&self, s: f64) -> DVector<f64> {
        self.omega.map(|w| 1.0 + s * w)
    }
}

/// Indices of the last three rows, or all when fewer.
fn tail(len: usize) -> std::ops::Range<usize> {
    len.saturating_sub(3)..len
}

/// Strictly decreasing over the tail of the schedule.
pub fn decreasing_tail(values: &[f64]) -> bool {
    let t = &values[tail(values.len())];
    t.len() >= 2 && t.iter().all(|v| v.is_finite()) && t.windows(2).all(|w| w[1] < w[0])
}

fn aligned(u: &GridFunction, reference: &GridFunction) -> GridFunction {
    if u.values.dot(&reference.values) < 0.0 {
        u.scale(-1.0)
    } else {
        u.clone()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperRow {
    pub s: f64,
    pub l2_gap: f64,
    /// E_s(u_s)/s.
    pub energy_quotient: f64,
    pub energy_gap: f64,
    pub hs_norm: f64,
    pub norm_gap: f64,
    pub r_gap: f64,
    pub taylor_residual: f64,
    pub lower_bound: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperlinearReport {
    pub rows: Vec<SuperRow>,
    /// 𝔼(u₀).
    pub energy_target: f64,
    /// ‖u₀‖₂.
    pub norm_target: f64,
    /// |𝔼(u₀) − (σ/4)‖u₀‖₂²|.
    pub limit_identity_gap: f64,
    pub r_limit: f64,
    /// Orders whose solve failed, with the error.
    pub failures: Vec<(f64, String)>,
    pub trends: SuperTrends,
    #[serde(skip)]
    pub limit: Option<SolveReport>,
    #[serde(skip)]
    pub solutions: Vec<GridFunction>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperTrends {
    pub l2_gap: bool,
    pub energy_gap: bool,
    pub norm_gap: bool,
    pub r_gap: bool,
    pub lower_bound: bool,
}

impl SuperlinearReport {
    pub fn partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn holds(&self) -> bool {
        let t = &self.trends;
        !self.partial() && t.l2_gap && t.energy_gap && t.norm_gap && t.r_gap && t.lower_bound
    }
}

pub fn run_superlinear_asymptotics(ops: &OperatorSet, spec: &SweepSpec, cfg: &SolverConfig) -> Result<SuperlinearReport> {
    spec.check(ops)?;
    let nl = Nonlinearity::linear(spec.omega.clone(), spec.sigma)?;
    let eig = ops.log_eigenpair()?;
    let limit = solve_superlinear_limit(ops, &nl, &eig.phi, cfg)?;
    if !limit.converged {
        return Err(Error::Solver(format!("limiting solve stopped at gradient norm {:e}", limit.gradient_norm)));
    }
    let u0 = &limit.u_star;
    let norm_target = u0.l2_norm();
    let energy_target = limit.energy;
    let probe = &eig.phi;
    let r_limit = limit_projection_radius(ops, &spec.omega, spec.sigma, probe)?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut solutions = Vec::new();
    for &s in &spec.schedule {
        let p = spec.exponent(s);
        let a = spec.weight(s);
        let outcome = ops.frac_eigenpair(s).and_then(|e| solve_frac(ops, s, p, &a, &e.phi, cfg));
        let report = match outcome {
            Ok(r) => r,
            Err(e) => {
                failures.push((s, e.to_string()));
                continue;
            }
        };
        let us = aligned(&report.u_star, u0);
        let diff = us.with_values(&us.values - &u0.values);
        let form = ops.frac_form(s, probe, probe)?;
        let r_s = ((form.ln() - weighted_power(&a, p, probe).ln()) / (p - 2.0)).exp();
        rows.push(SuperRow {
            s,
            l2_gap: diff.l2_norm(),
            energy_quotient: report.energy / s,
            energy_gap: (report.energy / s - energy_target).abs(),
            hs_norm: report.hs_norm,
            norm_gap: (report.hs_norm - norm_target).abs(),
            r_gap: (r_s - r_limit).abs(),
            taylor_residual: taylor_residual(s, probe, &spec.omega, spec.sigma)?,
            lower_bound: report.nehari_lower_bound,
            converged: report.converged,
        });
        solutions.push(us);
    }
    let col = |f: fn(&SuperRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let trends = SuperTrends {
        l2_gap: decreasing_tail(&col(|r| r.l2_gap)),
        energy_gap: decreasing_tail(&col(|r| r.energy_gap)),
        norm_gap: decreasing_tail(&col(|r| r.norm_gap)),
        r_gap: decreasing_tail(&col(|r| r.r_gap)),
        lower_bound: !rows.is_empty() && rows.iter().all(|r| r.lower_bound.is_some_and(|m| r.hs_norm >= m)),
    };
    Ok(SuperlinearReport {
        energy_target,
        norm_target,
        limit_identity_gap: (energy_target - 0.25 * spec.sigma * u0.l2_norm_sq()).abs(),
        r_limit,
        failures,
        trends,
        rows,
        limit: Some(limit),
        solutions,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SubRow {
    pub s: f64,
    pub l1_gap: f64,
    pub l2_gap: f64,
    pub l4_gap: f64,
    /// ℰ(u_s, u_s).
    pub h_energy: f64,
    /// ‖u_s‖_s².
    pub hs_norm_sq: f64,
    pub sandwich_lower: f64,
    pub sandwich_upper: f64,
    pub linf: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SublinearReport {
    pub rows: Vec<SubRow>,
    pub energy_target: f64,
    pub norm_target: f64,
    /// A from the first logarithmic eigenpair.
    pub floor_a: f64,
    /// (ln 2/2)A.
    pub floor: f64,
    /// c₃(R²e^{1/2−ρ_N})^{−1/p'(0)} with R = 2 diam Ω.
    pub linf_ceiling: f64,
    pub failures: Vec<(f64, String)>,
    pub trends: SubTrends,
    #[serde(skip)]
    pub limit: Option<SolveReport>,
    #[serde(skip)]
    pub solutions: Vec<GridFunction>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubTrends {
    pub l1_gap: bool,
    pub l2_gap: bool,
    pub l4_gap: bool,
    pub sandwich: bool,
    /// ‖u_s‖_s² ≥ 0.85·(ln 2/2)A at the smallest order.
    pub floor: bool,
    /// ‖u_s‖_∞ ≤ 1.1·ceiling at the smallest order.
    pub linf: bool,
}

impl SublinearReport {
    pub fn partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn holds(&self) -> bool {
        let t = &self.trends;
        !self.partial() && t.l1_gap && t.l2_gap && t.l4_gap && t.sandwich && t.floor && t.linf
    }
}

/// A = exp(1 + 2λ_{1,L}/p'(0) − (2/p'(0))(∫ωφ_L² + p'(0)∫φ_L² ln φ_L)).
pub fn floor_constant(ops: &OperatorSet, omega: &DVector<f64>, p_prime: f64) -> Result<f64> {
    let eig = ops.log_eigenpair()?;
    let phi = &eig.phi;
    let weighted: f64 = phi.values.iter().zip(omega.iter()).map(|(v, w)| w * v * v).sum::<f64>() * phi.h();
    Ok((1.0 + 2.0 * eig.lambda / p_prime - (2.0 / p_prime) * (weighted + p_prime * entropy_term(phi))).exp())
}

/// Lower and upper bounds on ‖u_s‖_s² built from the first fractional eigenpair.
pub fn sandwich_bounds(ops: &OperatorSet, s: f64, p: f64, a: &DVector<f64>) -> Result<(f64, f64)> {
    let eig = ops.frac_eigenpair(s)?;
    let phi = &eig.phi;
    let l2 = phi.l2_norm_sq();
    let t_s = ((2.0 / p) * weighted_power(a, p, phi) / (eig.lambda * l2)).powf(1.0 / (2.0 - p));
    let lower = 2.0 * p / (p - 2.0) * energy_frac(ops, s, p, a, &phi.scale(0.5 * t_s))?;
    let c3_s = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let c_s = eig.lambda.powf(-0.5) * ops.grid.interval.length().powf((2.0 - p) / (2.0 * p));
    let upper = (c3_s * c_s.powf(p)).powf(2.0 / (2.0 - p));
    Ok((lower, upper))
}

pub fn run_sublinear_asymptotics(ops: &OperatorSet, spec: &SweepSpec, cfg: &SolverConfig) -> Result<SublinearReport> {
    spec.check(ops)?;
    if !(spec.sigma < 0.0) {
        return Err(Error::Precondition(format!("the sublinear sweep needs sigma < 0, got {}", spec.sigma)));
    }
    let nl = Nonlinearity::linear(spec.omega.clone(), spec.sigma)?;
    let eig = ops.log_eigenpair()?;
    let limit = solve_sublinear_limit(ops, &nl, &eig.phi, cfg)?;
    if !limit.converged {
        return Err(Error::Solver(format!("limiting solve stopped at gradient norm {:e}", limit.gradient_norm)));
    }
    let u0 = &limit.u_star;
    let floor_a = floor_constant(ops, &spec.omega, spec.sigma)?;
    let r = 2.0 * ops.grid.interval.diameter();
    let c3 = spec.omega.iter().fold(0.0f64, |m, v| m.max(*v)).exp();
    let linf_ceiling = c3 * (r * r * (0.5 - ops.constants.rho_n).exp()).powf(-1.0 / spec.sigma);

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut solutions = Vec::new();
    for &s in &spec.schedule {
        let p = spec.exponent(s);
        let a = spec.weight(s);
        let outcome = ops.frac_eigenpair(s).and_then(|e| solve_frac(ops, s, p, &a, &e.phi, cfg));
        let report = match outcome {
            Ok(r) => r,
            Err(e) => {
                failures.push((s, e.to_string()));
                continue;
            }
        };
        let us = aligned(&report.u_star, u0);
        let diff = us.with_values(&us.values - &u0.values);
        let (lower, upper) = sandwich_bounds(ops, s, p, &a)?;
        rows.push(SubRow {
            s,
            l1_gap: diff.lq_norm(1.0)?,
            l2_gap: diff.l2_norm(),
            l4_gap: diff.lq_norm(4.0)?,
            h_energy: ops.near_form(&us, &us)?,
            hs_norm_sq: report.hs_norm * report.hs_norm,
            sandwich_lower: lower,
            sandwich_upper: upper,
            linf: us.linf_norm(),
            converged: report.converged,
        });
        solutions.push(us);
    }
    let floor = 0.5 * std::f64::consts::LN_2 * floor_a;
    let col = |f: fn(&SubRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let last = rows.last();
    let trends = SubTrends {
        l1_gap: decreasing_tail(&col(|r| r.l1_gap)),
        l2_gap: decreasing_tail(&col(|r| r.l2_gap)),
        l4_gap: decreasing_tail(&col(|r| r.l4_gap)),
        sandwich: !rows.is_empty()
            && rows.iter().all(|r| {
                let tol = 1e-8 * r.hs_norm_sq;
                r.sandwich_lower <= r.hs_norm_sq + tol && r.hs_norm_sq <= r.sandwich_upper + tol
            }),
        floor: last.is_some_and(|r| r.hs_norm_sq >= floor * (1.0 - 0.15)),
        linf: last.is_some_and(|r| r.linf <= linf_ceiling * 1.1),
    };
    Ok(SublinearReport {
        energy_target: limit.energy,
        norm_target: u0.l2_norm(),
        floor_a,
        floor,
        linf_ceiling,
        failures,
        trends,
        rows,
        limit: Some(limit),
        solutions,
    })
}
