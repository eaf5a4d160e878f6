//! Orlicz Φ-functions, nonlinearities, energies and Nehari projections.

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::Serialize;

use crate::assembly::OperatorSet;
use crate::error::{Error, Result};
use crate::grid::{bump_profile, cosine_profile, Grid, GridFunction};
use crate::numerics::{critical_exponent, integrate_gl16};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PhiFunction {
    /// t² ln(e + t).
    Critical,
    /// t² ln^θ(e + t).
    LogPower { theta: f64 },
    /// t² ln(e + ln(1 + t)).
    LogLog,
    /// t² ln^{1+ε}(e + t).
    Supercritical { eps: f64 },
}

impl PhiFunction {
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        let t2 = t * t;
        match *self {
            PhiFunction::Critical => t2 * (E + t).ln(),
            PhiFunction::LogPower { theta } => t2 * (E + t).ln().powf(theta),
            PhiFunction::LogLog => t2 * (E + t.ln_1p()).ln(),
            PhiFunction::Supercritical { eps } => t2 * (E + t).ln().powf(1.0 + eps),
        }
    }
}

/// ∫_Ω φ(|u|).
pub fn modular(phi: PhiFunction, u: &GridFunction) -> f64 {
    u.h() * u.values.iter().map(|v| phi.eval(*v)).sum::<f64>()
}

/// inf{λ > 0 : ∫ φ(|u|/λ) ≤ 1}.
pub fn luxemburg_norm(phi: PhiFunction, u: &GridFunction) -> f64 {
    let m = u.linf_norm();
    if m == 0.0 {
        return 0.0;
    }
    let over = |lambda: f64| {
        let inv = 1.0 / lambda;
        u.h() * u.values.iter().map(|v| phi.eval(v * inv)).sum::<f64>() > 1.0
    };
    let mut hi = m.max(1.0) * u.grid.interval.length().max(1.0);
    while over(hi) {
        hi *= 2.0;
    }
    let mut lo = 1e-14 * hi.min(1.0);
    while !over(lo) && lo > f64::MIN_POSITIVE {
        lo *= 0.5;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if over(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn xlogx_sq(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * v * v.abs().ln()
    }
}

/// ∫ u² ln|u| with 0·ln 0 = 0.
pub fn entropy_term(u: &GridFunction) -> f64 {
    u.h() * u.values.iter().map(|v| xlogx_sq(*v)).sum::<f64>()
}

/// A bounded weight given as a constant or a named profile scaled by an amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum WeightProfile {
    Const(f64),
    Bump(f64),
    Cosine(f64),
}

impl WeightProfile {
    pub fn sample(&self, grid: &Grid) -> DVector<f64> {
        let iv = grid.interval;
        DVector::from_iterator(
            grid.n_cells,
            grid.centers.iter().map(|&x| match *self {
                WeightProfile::Const(c) => c,
                WeightProfile::Bump(a) => a * bump_profile(&iv, x),
                WeightProfile::Cosine(a) => a * cosine_profile(&iv, x),
            }),
        )
    }
}

impl FromStr for WeightProfile {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, amp) = match text.split_once(':') {
            Some((n, a)) => {
                let a: f64 = a.trim().parse().map_err(|_| Error::Config(format!("bad profile amplitude in {text:?}")))?;
                (n.trim(), Some(a))
            }
            None => (text, None),
        };
        match name {
            "const" => Ok(WeightProfile::Const(amp.unwrap_or(0.0))),
            "bump" => Ok(WeightProfile::Bump(amp.unwrap_or(1.0))),
            "cosine" => Ok(WeightProfile::Cosine(amp.unwrap_or(1.0))),
            _ => name
                .parse::<f64>()
                .ok()
                .filter(|_| amp.is_none())
                .map(WeightProfile::Const)
                .ok_or_else(|| Error::Config(format!("unknown weight profile {text:?}; use const|bump|cosine[:amplitude]"))),
        }
    }
}

impl fmt::Display for WeightProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightProfile::Const(c) => write!(f, "const:{c}"),
            WeightProfile::Bump(a) => write!(f, "bump:{a}"),
            WeightProfile::Cosine(a) => write!(f, "cosine:{a}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Family {
    /// f(x,t) = ω(x) t.
    LinearWeight,
    /// f(x,t) = g(x) t ln^θ(e + |t|), θ ∈ [0, 1).
    LogPower { theta: f64 },
    /// f(x,t) = g(x) t ln(μ + ln(1 + |t|)), μ > 0.
    LogLog { mu: f64 },
}

/// Subcritical perturbation f together with the coefficient σ of the logarithmic term.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    pub family: Family,
    /// ω or g, one value per cell.
    pub weight: DVector<f64>,
    pub sigma: f64,
}

impl Nonlinearity {
    pub fn new(family: Family, weight: DVector<f64>, sigma: f64) -> Result<Self> {
        match family {
            Family::LogPower { theta } if !(0.0..1.0).contains(&theta) => {
                return Err(Error::Config(format!("theta must lie in [0, 1), got {theta}")))
            }
            Family::LogLog { mu } if !(mu > 0.0) => return Err(Error::Config(format!("mu must be positive, got {mu}"))),
            _ => {}
        }
        if !sigma.is_finite() || weight.iter().any(|w| !w.is_finite()) {
            return Err(Error::Config("nonlinearity parameters must be finite".into()));
        }
        Ok(Self { family, weight, sigma })
    }

    pub fn linear(weight: DVector<f64>, sigma: f64) -> Result<Self> {
        Self::new(Family::LinearWeight, weight, sigma)
    }

    pub fn zero(n: usize, sigma: f64) -> Self {
        Self { family: Family::LinearWeight, weight: DVector::zeros(n), sigma }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.family, Family::LinearWeight)
    }

    pub fn f(&self, i: usize, t: f64) -> f64 {
        let g = self.weight[i];
        match self.family {
            Family::LinearWeight => g * t,
            Family::LogPower { theta } => g * t * (E + t.abs()).ln().powf(theta),
            Family::LogLog { mu } => g * t * (mu + t.abs().ln_1p()).ln(),
        }
    }

    /// ∂_t f(x_i, t).
    pub fn df(&self, i: usize, t: f64) -> f64 {
        let g = self.weight[i];
        let a = t.abs();
        match self.family {
            Family::LinearWeight => g,
            Family::LogPower { theta } => {
                let l = (E + a).ln();
                let lower = if theta == 0.0 { 0.0 } else { theta * a * l.powf(theta - 1.0) / (E + a) };
                g * (l.powf(theta) + lower)
            }
            Family::LogLog { mu } => {
                let inner = mu + a.ln_1p();
                g * (inner.ln() + a / ((1.0 + a) * inner))
            }
        }
    }

    /// F(x_i, t) = ∫_0^t f(x_i, z) dz.
    pub fn big_f(&self, i: usize, t: f64) -> f64 {
        if let Family::LinearWeight = self.family {
            return 0.5 * self.weight[i] * t * t;
        }
        let a = t.abs();
        if a == 0.0 {
            return 0.0;
        }
        // geometric panels keep the singularity of the logarithm at −e well separated
        let mut acc = integrate_gl16(0.0, a.min(1.0), |z| self.f(i, z));
        let mut lo = 1.0;
        while lo < a {
            let hi = (2.0 * lo).min(a);
            acc += integrate_gl16(lo, hi, |z| self.f(i, z));
            lo = hi;
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FsigmaCheck {
    pub holds: bool,
    pub worst_margin: f64,
}

/// Minimum over cells and t of t² ∂_t f + δ t² − t f.
pub fn check_fsigma(nl: &Nonlinearity, delta: f64, t_grid: &[f64]) -> Result<FsigmaCheck> {
    if !(delta < nl.sigma) {
        return Err(Error::Precondition(format!("the constant delta = {delta} must be below sigma = {}", nl.sigma)));
    }
    let mut worst = f64::INFINITY;
    for i in 0..nl.weight.len() {
        for &t in t_grid {
            let m = t * t * nl.df(i, t) + delta * t * t - t * nl.f(i, t);
            worst = worst.min(m);
        }
    }
    Ok(FsigmaCheck { holds: worst >= 0.0, worst_margin: worst })
}

fn check_nl(ops: &OperatorSet, nl: &Nonlinearity, u: &GridFunction) -> Result<()> {
    ops.check(u)?;
    if nl.weight.len() != ops.n() {
        return Err(Error::Dimension("nonlinearity weight does not match the grid".into()));
    }
    Ok(())
}

/// 𝔼(u) = ½ℰ_L(u,u) − ∫F(x,u) − (σ/4)∫u²(ln u² − 1).
pub fn energy_limit(ops: &OperatorSet, nl: &Nonlinearity, u: &GridFunction) -> Result<f64> {
    check_nl(ops, nl, u)?;
    let quad = 0.5 * ops.log_form(u, u)?;
    let h = ops.h();
    let prim: f64 = (0..ops.n()).map(|i| nl.big_f(i, u.values[i])).sum::<f64>() * h;
    let log_term = 2.0 * entropy_term(u) - u.l2_norm_sq();
    Ok(quad - prim - 0.25 * nl.sigma * log_term)
}

/// ℰ_L(u,u) − ∫f(x,u)u − σ∫u² ln|u|.
pub fn nehari_residual_limit(ops: &OperatorSet, nl: &Nonlinearity, u: &GridFunction) -> Result<f64> {
    check_nl(ops, nl, u)?;
    if u.linf_norm() == 0.0 {
        return Err(Error::Precondition("the Nehari residual needs u ≠ 0".into()));
    }
    let h = ops.h();
    let fu: f64 = (0..ops.n()).map(|i| nl.f(i, u.values[i]) * u.values[i]).sum::<f64>() * h;
    Ok(ops.log_form(u, u)? - fu - nl.sigma * entropy_term(u))
}

/// Closed-form fibering projection for the linear family.
pub fn nehari_project_limit(ops: &OperatorSet, nl: &Nonlinearity, u: &GridFunction) -> Result<GridFunction> {
    if !nl.is_linear() {
        return Err(Error::Precondition("closed-form projection needs the linear family".into()));
    }
    if nl.sigma == 0.0 {
        return Err(Error::Precondition("projection needs sigma ≠ 0".into()));
    }
    let l2 = u.l2_norm_sq();
    if l2 == 0.0 {
        return Err(Error::Precondition("cannot project the zero function".into()));
    }
    check_nl(ops, nl, u)?;
    let weighted: f64 = u.values.iter().zip(nl.weight.iter()).map(|(v, w)| w * v * v).sum::<f64>() * ops.h();
    let ln_r = (ops.log_form(u, u)? - weighted - nl.sigma * entropy_term(u)) / (nl.sigma * l2);
    Ok(u.scale(ln_r.exp()))
}

/// Result of a fibering root search along r ↦ r u.
#[derive(Debug, Clone)]
pub struct FiberingRoot {
    pub r: f64,
    /// n_u' changes sign again beyond the first root.
    pub extra_sign_changes: bool,
}

/// (n_u'(r)/r) for the fibering map n_u(r) = 𝔼(r u).
fn fibering_slope(ops_form: f64, nl: &Nonlinearity, u: &GridFunction, entropy: f64, l2: f64, r: f64) -> f64 {
    let h = u.h();
    let fu: f64 = (0..u.len()).map(|i| nl.f(i, r * u.values[i]) * u.values[i]).sum::<f64>() * h / r;
    ops_form - fu - nl.sigma * entropy - nl.sigma * r.ln() * l2
}

/// First positive critical point of the fibering map, for any family.
pub fn fibering_first_root(ops: &OperatorSet, nl: &Nonlinearity, u: &GridFunction) -> Result<FiberingRoot> {
    check_nl(ops, nl, u)?;
    let l2 = u.l2_norm_sq();
    if l2 == 0.0 {
        return Err(Error::Precondition("cannot project the zero function".into()));
    }
    let form = ops.log_form(u, u)?;
    let entropy = entropy_term(u);
    let g = |ln_r: f64| fibering_slope(form, nl, u, entropy, l2, ln_r.exp());
    let step = 0.25;
    let (start, stop) = (-40.0, 40.0);
    let mut a = start;
    let mut ga = g(a);
    let mut bracket = None;
    let mut b = a + step;
    while b <= stop {
        let gb = g(b);
        if ga.signum() != gb.signum() && ga != 0.0 {
            bracket = Some((a, b, ga));
            break;
        }
        a = b;
        ga = gb;
        b += step;
    }
    let (mut lo, mut hi, glo) = bracket.ok_or_else(|| Error::Solver("fibering root not bracketed on r ∈ [e^-40, e^40]".into()))?;
    let mut extra = false;
    let mut x = hi;
    let mut gx = g(x);
    while x + step <= stop {
        let gn = g(x + step);
        if gn != 0.0 && gx != 0.0 && gn.signum() != gx.signum() {
            extra = true;
            break;
        }
        x += step;
        gx = gn;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if gm.signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(FiberingRoot { r: (0.5 * (lo + hi)).exp(), extra_sign_changes: extra })
}

/// Nehari projection for any family: closed form when linear, root search otherwise.
pub fn nehari_project(ops: &OperatorSet, nl: &Nonlinearity, u: &GridFunction) -> Result<GridFunction> {
    if nl.is_linear() {
        nehari_project_limit(ops, nl, u)
    } else {
        let root = fibering_first_root(ops, nl, u)?;
        Ok(u.scale(root.r))
    }
}

fn check_exponent(s: f64, p: f64) -> Result<()> {
    let crit = critical_exponent(1, s)?;
    if !(p > 1.0 && p < crit) {
        return Err(Error::Precondition(format!("exponent p = {p} must lie in (1, {crit}) at s = {s}")));
    }
    Ok(())
}

/// ∫ a |u|^p.
pub fn weighted_power(a: &DVector<f64>, p: f64, u: &GridFunction) -> f64 {
    u.h() * u.values.iter().zip(a.iter()).map(|(v, w)| if *v == 0.0 { 0.0 } else { w * v.abs().powf(p) }).sum::<f64>()
}

/// E_s(u) = ½‖u‖_s² − (1/p)∫a|u|^p.
pub fn energy_frac(ops: &OperatorSet, s: f64, p: f64, a: &DVector<f64>, u: &GridFunction) -> Result<f64> {
    let form = ops.frac_form(s, u, u)?;
    check_exponent(s, p)?;
    if a.len() != u.len() {
        return Err(Error::Dimension("weight does not match the grid".into()));
    }
    Ok(0.5 * form - weighted_power(a, p, u) / p)
}

/// ‖u‖_s² − ∫a|u|^p.
pub fn nehari_residual_frac(ops: &OperatorSet, s: f64, p: f64, a: &DVector<f64>, u: &GridFunction) -> Result<f64> {
    Ok(ops.frac_form(s, u, u)? - weighted_power(a, p, u))
}

/// r_{s,u} u with r_{s,u} = (‖u‖_s²/∫a|u|^p)^{1/(p−2)}.
pub fn nehari_project_frac(ops: &OperatorSet, s: f64, p: f64, a: &DVector<f64>, u: &GridFunction) -> Result<GridFunction> {
    if p == 2.0 {
        return Err(Error::Precondition("the fractional projection needs p ≠ 2".into()));
    }
    let w = weighted_power(a, p, u);
    if !(w > 0.0) {
        return Err(Error::Precondition("∫ a|u|^p must be positive".into()));
    }
    let form = ops.frac_form(s, u, u)?;
    let r = ((form.ln() - w.ln()) / (p - 2.0)).exp();
    Ok(u.scale(r))
}

/// r_{0,φ} = exp((ℰ_L(φ,φ) − ∫(a'(0)+p'(0) ln|φ|)φ²) / (p'(0)‖φ‖²)), the s → 0 limit of r_{s,φ}.
pub fn limit_projection_radius(ops: &OperatorSet, omega: &DVector<f64>, p_prime: f64, phi: &GridFunction) -> Result<f64> {
    let l2 = phi.l2_norm_sq();
    let weighted: f64 = phi.values.iter().zip(omega.iter()).map(|(v, w)| w * v * v).sum::<f64>() * phi.h();
    Ok(((ops.log_form(phi, phi)? - weighted - p_prime * entropy_term(phi)) / (p_prime * l2)).exp())
}
