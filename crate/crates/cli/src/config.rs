//! Run configuration in a flat sectioned `key = value` text format.
//!
//! Top-level keys come before the first `[section]` header. Lists are comma
//! separated. Every key has a default, so an empty file is a valid config.

use std::fmt::Write as _;
use std::str::FromStr;

use loglap::orlicz::{Family, WeightProfile};
use loglap::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyName {
    Linear,
    LogPower,
    LogLog,
}

impl FromStr for FamilyName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(FamilyName::Linear),
            "logpower" => Ok(FamilyName::LogPower),
            "loglog" => Ok(FamilyName::LogLog),
            _ => Err(Error::Config(format!("unknown family {s:?}; use linear|logpower|loglog"))),
        }
    }
}

impl FamilyName {
    fn as_str(self) -> &'static str {
        match self {
            FamilyName::Linear => "linear",
            FamilyName::LogPower => "logpower",
            FamilyName::LogLog => "loglog",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainConfig {
    pub left: f64,
    pub right: f64,
    pub n_cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearityConfig {
    pub family: FamilyName,
    pub theta: f64,
    pub mu: f64,
    pub sigma: f64,
    pub omega: WeightProfile,
}

impl NonlinearityConfig {
    pub fn family(&self) -> Family {
        match self.family {
            FamilyName::Linear => Family::LinearWeight,
            FamilyName::LogPower => Family::LogPower { theta: self.theta },
            FamilyName::LogLog => Family::LogLog { mu: self.mu },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub s_schedule: Vec<f64>,
    pub sigma: f64,
    pub omega_profile: WeightProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: String,
    pub emit_svg: bool,
}

/// Single fractional problem for `solve-frac`.
#[derive(Debug, Clone, PartialEq)]
pub struct FracConfig {
    pub s: f64,
    pub p: f64,
    pub a: WeightProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub fields: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedConfig {
    pub k_list: Vec<usize>,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dimension: u32,
    pub domain: DomainConfig,
    pub s_list: Vec<f64>,
    pub nonlinearity: NonlinearityConfig,
    pub solver: SolverSection,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
    pub frac: FracConfig,
    pub verify: VerifyConfig,
    pub embed: EmbedConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let schedule = vec![0.1, 0.05, 0.025, 0.0125];
        RunConfig {
            dimension: 1,
            domain: DomainConfig { left: -0.5, right: 0.5, n_cells: 256 },
            s_list: schedule.clone(),
            nonlinearity: NonlinearityConfig {
                family: FamilyName::Linear,
                theta: 0.5,
                mu: 2.0,
                sigma: 1.0,
                omega: WeightProfile::Const(0.0),
            },
            solver: SolverSection { tol: 1e-8, max_iters: 5000, seed: 1 },
            sweep: SweepConfig { s_schedule: schedule, sigma: 1.0, omega_profile: WeightProfile::Const(0.0) },
            output: OutputConfig { dir: "runs".into(), emit_svg: false },
            frac: FracConfig { s: 0.1, p: 2.2, a: WeightProfile::Const(1.0) },
            verify: VerifyConfig { fields: 100 },
            embed: EmbedConfig { k_list: vec![2, 4, 8, 16, 32, 64], eps: 0.5 },
        }
    }
}

/// Every accepted key, as `section.key` (top-level keys have no section).
pub const KEYS: &[&str] = &[
    "dimension",
    "domain.left",
    "domain.right",
    "domain.n_cells",
    "operator.s_list",
    "nonlinearity.family",
    "nonlinearity.theta",
    "nonlinearity.mu",
    "nonlinearity.sigma",
    "nonlinearity.omega",
    "solver.tol",
    "solver.max_iters",
    "solver.seed",
    "sweep.s_schedule",
    "sweep.sigma",
    "sweep.omega_profile",
    "output.dir",
    "output.emit_svg",
    "frac.s",
    "frac.p",
    "frac.a",
    "verify.fields",
    "embed.k_list",
    "embed.eps",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("cannot parse {key} = {value:?}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(|v| parse_value(key, v.trim())).collect()
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Assigns one key. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "dimension" => self.dimension = parse_value(key, v)?,
            "domain.left" => self.domain.left = parse_value(key, v)?,
            "domain.right" => self.domain.right = parse_value(key, v)?,
            "domain.n_cells" => self.domain.n_cells = parse_value(key, v)?,
            "operator.s_list" => self.s_list = parse_list(key, v)?,
            "nonlinearity.family" => self.nonlinearity.family = v.parse()?,
            "nonlinearity.theta" => self.nonlinearity.theta = parse_value(key, v)?,
            "nonlinearity.mu" => self.nonlinearity.mu = parse_value(key, v)?,
            "nonlinearity.sigma" => self.nonlinearity.sigma = parse_value(key, v)?,
            "nonlinearity.omega" => self.nonlinearity.omega = v.parse()?,
            "solver.tol" => self.solver.tol = parse_value(key, v)?,
            "solver.max_iters" => self.solver.max_iters = parse_value(key, v)?,
            "solver.seed" => self.solver.seed = parse_value(key, v)?,
            "sweep.s_schedule" => self.sweep.s_schedule = parse_list(key, v)?,
            "sweep.sigma" => self.sweep.sigma = parse_value(key, v)?,
            "sweep.omega_profile" => self.sweep.omega_profile = v.parse()?,
            "output.dir" => self.output.dir = v.to_string(),
            "output.emit_svg" => self.output.emit_svg = parse_value(key, v)?,
            "frac.s" => self.frac.s = parse_value(key, v)?,
            "frac.p" => self.frac.p = parse_value(key, v)?,
            "frac.a" => self.frac.a = v.parse()?,
            "verify.fields" => self.verify.fields = parse_value(key, v)?,
            "embed.k_list" => self.embed.k_list = parse_list(key, v)?,
            "embed.eps" => self.embed.eps = parse_value(key, v)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config(format!("line {}: malformed section header", lineno + 1)))?;
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = if section.is_empty() { k.trim().to_string() } else { format!("{section}.{}", k.trim()) };
            if seen.contains(&key) {
                return Err(Error::Config(format!("line {}: duplicate key {key:?}", lineno + 1)));
            }
            cfg.set(&key, v).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", lineno + 1)),
                other => other,
            })?;
            seen.push(key);
        }
        Ok(cfg)
    }

    /// Canonical text; `parse(emit())` reproduces the config exactly.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let n = &self.nonlinearity;
        // writing into a String cannot fail
        let _ = write!(
            out,
            "dimension = {}\n\n\
             [domain]\nleft = {}\nright = {}\nn_cells = {}\n\n\
             [operator]\ns_list = {}\n\n\
             [nonlinearity]\nfamily = {}\ntheta = {}\nmu = {}\nsigma = {}\nomega = {}\n\n\
             [solver]\ntol = {}\nmax_iters = {}\nseed = {}\n\n\
             [sweep]\ns_schedule = {}\nsigma = {}\nomega_profile = {}\n\n\
             [output]\ndir = {}\nemit_svg = {}\n\n\
             [frac]\ns = {}\np = {}\na = {}\n\n\
             [verify]\nfields = {}\n\n\
             [embed]\nk_list = {}\neps = {}\n",
            self.dimension,
            self.domain.left,
            self.domain.right,
            self.domain.n_cells,
            join(&self.s_list),
            n.family.as_str(),
            n.theta,
            n.mu,
            n.sigma,
            n.omega,
            self.solver.tol,
            self.solver.max_iters,
            self.solver.seed,
            join(&self.sweep.s_schedule),
            self.sweep.sigma,
            self.sweep.omega_profile,
            self.output.dir,
            self.output.emit_svg,
            self.frac.s,
            self.frac.p,
            self.frac.a,
            self.verify.fields,
            join(&self.embed.k_list),
            self.embed.eps,
        );
        out
    }

    /// Range checks shared by every subcommand.
    pub fn validate(&self) -> Result<()> {
        if self.dimension != 1 {
            return Err(Error::Config(format!("only one-dimensional domains are supported, got dimension = {}", self.dimension)));
        }
        let d = &self.domain;
        if !(d.left.is_finite() && d.right.is_finite() && d.left < d.right) {
            return Err(Error::Config(format!("domain needs finite left < right, got ({}, {})", d.left, d.right)));
        }
        if d.n_cells < 2 {
            return Err(Error::Config("domain.n_cells must be at least 2".into()));
        }
        for &s in self.s_list.iter().chain(&self.sweep.s_schedule).chain(std::iter::once(&self.frac.s)) {
            if !(s > 0.0 && s < 0.25) {
                return Err(Error::Config(format!("fractional orders must lie in (0, 1/4), got {s}")));
            }
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iters == 0 {
            return Err(Error::Config("solver.tol must be positive and solver.max_iters nonzero".into()));
        }
        if self.verify.fields == 0 {
            return Err(Error::Config("verify.fields must be nonzero".into()));
        }
        if self.embed.k_list.is_empty() || self.embed.k_list.iter().any(|&k| k < 2) {
            return Err(Error::Config("embed.k_list needs integer factors k ≥ 2".into()));
        }
        if !(self.embed.eps > 0.0) {
            return Err(Error::Config("embed.eps must be positive".into()));
        }
        Ok(())
    }
}
