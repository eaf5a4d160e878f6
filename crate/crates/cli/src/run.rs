//! Pipelines behind each subcommand and the run directory they write into.

use std::collections::hash_map::DefaultHasher;
use std::fs;
use std::hash::Hasher;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;
use loglap::assembly::{assemble, write_triples, OperatorSet};
use loglap::asymptotics::{run_sublinear_asymptotics, run_superlinear_asymptotics, SweepSpec};
use loglap::grid::{build_grid, bump_profile, GridFunction, Interval};
use loglap::orlicz::{Nonlinearity, PhiFunction};
use loglap::solvers::{random_init, solve_frac, solve_sublinear_limit, solve_superlinear_limit, SolveReport, SolverConfig};
use loglap::spectral::eigen_derivative_at_zero;
use loglap::verify::{normalize_critical_modular, verify_all, verify_noncompactness, InequalityVerdict, LedgerSpec};
use loglap::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::svg::{line_plot, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Assemble,
    Eig,
    SolveLimit,
    SolveFrac,
    SweepSuper,
    SweepSub,
    Verify,
    EmbedDemo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Assemble => "assemble",
            Command::Eig => "eig",
            Command::SolveLimit => "solve-limit",
            Command::SolveFrac => "solve-frac",
            Command::SweepSuper => "sweep-super",
            Command::SweepSub => "sweep-sub",
            Command::Verify => "verify",
            Command::EmbedDemo => "embed-demo",
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Precondition(_) | Error::Domain(_) | Error::Dimension(_) => EXIT_CONFIG,
        Error::Assembly(_) | Error::Spectral(_) | Error::Solver(_) | Error::Io(_) => EXIT_NUMERICAL,
    }
}

/// Order-sensitive hash of every matrix and vector in an operator set.
pub fn checksum(ops: &OperatorSet) -> u64 {
    let mut h = DefaultHasher::new();
    let mut feed = |values: &[f64]| values.iter().for_each(|v| h.write_u64(v.to_bits()));
    feed(ops.e_near.as_slice());
    feed(ops.j_far.as_slice());
    feed(ops.a_log.as_slice());
    feed(ops.mass.as_slice());
    feed(ops.h_omega.as_slice());
    feed(ops.h_omega_cell.as_slice());
    feed(ops.exterior_near.as_slice());
    for f in &ops.frac {
        feed(&[f.s, f.c_s]);
        feed(f.matrix.as_slice());
        feed(f.exterior.as_slice());
    }
    h.finish()
}

#[derive(Debug, Clone, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

impl From<&InequalityVerdict> for Verdict {
    fn from(v: &InequalityVerdict) -> Self {
        Verdict {
            name: v.name.clone(),
            holds: v.holds,
            detail: format!("worst slack {:e} over {} samples, tolerance {:e}", v.worst_slack, v.samples, v.tolerance),
        }
    }
}

/// Output directory of one invocation plus everything the manifest records.
pub struct Run {
    pub dir: PathBuf,
    pub emit_svg: bool,
    pub stages: Vec<Stage>,
    pub verdicts: Vec<Verdict>,
    pub files: Vec<String>,
    pub failure_stage: Option<String>,
    /// Solver non-convergence, reported with exit code 3 after all outputs are written.
    pub numerical_failures: Vec<String>,
}

impl Run {
    pub fn new(dir: PathBuf, emit_svg: bool) -> Self {
        Run { dir, emit_svg, stages: Vec::new(), verdicts: Vec::new(), files: Vec::new(), failure_stage: None, numerical_failures: Vec::new() }
    }

    /// Times `f` and remembers the stage name if it fails.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Run) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self);
        self.stages.push(Stage { name: name.to_string(), seconds: start.elapsed().as_secs_f64() });
        if out.is_err() && self.failure_stage.is_none() {
            self.failure_stage = Some(name.to_string());
        }
        out
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        self.write(name, &(text + "\n"))
    }

    pub fn write_svg(&mut self, name: &str, svg: impl FnOnce() -> String) -> Result<()> {
        if self.emit_svg {
            self.write(name, &svg())?;
        }
        Ok(())
    }

    pub fn verdict(&mut self, name: &str, holds: bool, detail: String) {
        self.verdicts.push(Verdict { name: name.to_string(), holds, detail });
    }

    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }
}

/// Creates `{subcommand}_{timestamp}` under `root`, suffixing a counter on collision.
pub fn create_run_dir(root: &Path, command: Command) -> Result<PathBuf> {
    fs::create_dir_all(root)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%3fZ");
    let base = format!("{}_{stamp}", command.name());
    for k in 0.. {
        let name = if k == 0 { base.clone() } else { format!("{base}_{k}") };
        let dir = root.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!()
}

/// Writes `manifest.json` through a temporary file and a rename.
pub fn write_manifest(dir: &Path, manifest: &Value) -> Result<()> {
    let tmp = dir.join("manifest.json.tmp");
    let mut f = fs::File::create(&tmp)?;
    let text = serde_json::to_string_pretty(manifest).map_err(|e| Error::Io(e.to_string()))?;
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    f.sync_all()?;
    fs::rename(&tmp, dir.join("manifest.json"))?;
    Ok(())
}

pub fn solver_config(cfg: &RunConfig) -> SolverConfig {
    SolverConfig { tol: cfg.solver.tol, max_iters: cfg.solver.max_iters, seed: cfg.solver.seed, ..SolverConfig::default() }
}

/// Orders the subcommand needs cached in its operator set.
pub fn orders_for(command: Command, cfg: &RunConfig) -> Vec<f64> {
    match command {
        Command::SweepSuper | Command::SweepSub => cfg.sweep.s_schedule.clone(),
        Command::SolveFrac => vec![cfg.frac.s],
        Command::SolveLimit | Command::EmbedDemo => Vec::new(),
        Command::Assemble | Command::Eig | Command::Verify => cfg.s_list.clone(),
    }
}

/// Checks that depend on the subcommand, run before any assembly.
pub fn precheck(command: Command, cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let bound = 4.0 / cfg.dimension as f64;
    match command {
        Command::SolveLimit => {
            let sigma = cfg.nonlinearity.sigma;
            if sigma == 0.0 || !sigma.is_finite() {
                return Err(Error::Precondition(format!("sigma must be nonzero and finite, got {sigma}")));
            }
            if sigma > 0.0 && sigma >= bound {
                return Err(Error::Precondition(format!(
                    "the superlinear problem needs sigma in (0, 4/N) = (0, {bound}), got sigma = {sigma}"
                )));
            }
        }
        Command::SweepSuper | Command::Verify => {
            let sigma = cfg.sweep.sigma;
            if !(sigma > 0.0 && sigma < bound) {
                return Err(Error::Precondition(format!("sweep.sigma must lie in (0, 4/N) = (0, {bound}), got {sigma}")));
            }
        }
        Command::SweepSub => {
            if !(cfg.sweep.sigma < 0.0) {
                return Err(Error::Precondition(format!("sweep-sub needs sweep.sigma < 0, got {}", cfg.sweep.sigma)));
            }
        }
        Command::Eig => {
            if cfg.s_list.is_empty() {
                return Err(Error::Config("operator.s_list is empty".into()));
            }
        }
        Command::EmbedDemo => {
            let k_max = cfg.embed.k_list.iter().copied().max().unwrap_or(1);
            if cfg.domain.n_cells.saturating_mul(k_max) > loglap::verify::MAX_REFINED_CELLS {
                return Err(Error::Config(format!(
                    "n_cells·max(k) = {} exceeds the refinement budget {}",
                    cfg.domain.n_cells * k_max,
                    loglap::verify::MAX_REFINED_CELLS
                )));
            }
        }
        Command::Assemble | Command::SolveFrac => {}
    }
    Ok(())
}

pub fn build_operators(command: Command, cfg: &RunConfig) -> Result<OperatorSet> {
    let grid = build_grid(Interval::new(cfg.domain.left, cfg.domain.right)?, cfg.domain.n_cells)?;
    assemble(grid, cfg.dimension, &orders_for(command, cfg))
}

/// Runs one pipeline on an already assembled operator set.
pub fn run_pipeline(command: Command, cfg: &RunConfig, ops: &OperatorSet, run: &mut Run) -> Result<()> {
    match command {
        Command::Assemble => pipeline_assemble(ops, run),
        Command::Eig => pipeline_eig(cfg, ops, run),
        Command::SolveLimit => pipeline_solve_limit(cfg, ops, run),
        Command::SolveFrac => pipeline_solve_frac(cfg, ops, run),
        Command::SweepSuper => pipeline_sweep_super(cfg, ops, run),
        Command::SweepSub => pipeline_sweep_sub(cfg, ops, run),
        Command::Verify => pipeline_verify(cfg, ops, run),
        Command::EmbedDemo => pipeline_embed(cfg, ops, run),
    }
}

fn pipeline_assemble(ops: &OperatorSet, run: &mut Run) -> Result<()> {
    let rho = ops.constants.rho_n;
    let potential_min = ops.h_omega.iter().fold(f64::INFINITY, |m, v| m.min(v + rho));
    let summary = json!({
        "n_cells": ops.n(),
        "h": ops.h(),
        "interval": [ops.grid.interval.left, ops.grid.interval.right],
        "constants": ops.constants,
        "orders": ops.orders(),
        "checksum": format!("{:016x}", checksum(ops)),
        "min_h_omega_plus_rho": potential_min,
    });
    run.stage("emit", |run| {
        run.write_json("operators.json", &summary)?;
        let mut buf = Vec::new();
        write_triples(&ops.a_log, &mut buf)?;
        run.write("a_log.txt", &String::from_utf8_lossy(&buf))?;
        for f in &ops.frac {
            let mut buf = Vec::new();
            write_triples(&f.matrix, &mut buf)?;
            run.write(&format!("frac_s{}.txt", f.s), &String::from_utf8_lossy(&buf))?;
        }
        Ok(())
    })
}

fn pipeline_eig(cfg: &RunConfig, ops: &OperatorSet, run: &mut Run) -> Result<()> {
    let log = run.stage("log_eigenpair", |_| ops.log_eigenpair())?;
    let mut schedule = cfg.s_list.clone();
    schedule.sort_by(|a, b| b.total_cmp(a));
    schedule.dedup();
    let rows = run.stage("frac_eigenpairs", |_| {
        schedule.iter().map(|&s| ops.frac_eigenpair(s).map(|e| (s, e.lambda))).collect::<Result<Vec<_>>>()
    })?;
    let derivative = if schedule.len() >= 3 { Some(run.stage("derivative", |_| eigen_derivative_at_zero(ops, &schedule))?) } else { None };
    run.stage("emit", |run| {
        let mut csv = String::from("s,lambda_1s,quotient\n");
        for (s, l) in &rows {
            csv.push_str(&format!("{s},{l:e},{:e}\n", (l - 1.0) / s));
        }
        run.write("eig.csv", &csv)?;
        let mut buf = Vec::new();
        log.phi.write_csv(&mut buf)?;
        run.write("phi_log.csv", &String::from_utf8_lossy(&buf))?;
        run.write_json(
            "eig.json",
            &json!({
                "lambda_log": log.lambda,
                "log_residual": log.residual,
                "derivative_limit": derivative.as_ref().map(|d| d.limit),
                "non_monotone": derivative.as_ref().map(|d| d.non_monotone),
            }),
        )?;
        let profile: Vec<(f64, f64)> = ops.grid.centers.iter().copied().zip(log.phi.values.iter().copied()).collect();
        run.write_svg("phi_log.svg", || line_plot("first eigenfunction", "x", "phi", &[Series { label: "phi_L", points: profile }], false))
    })
}

fn solve_summary(r: &SolveReport) -> Result<Value> {
    Ok(json!({
        "energy": r.energy,
        "gradient_norm": r.gradient_norm,
        "nehari_residual": r.nehari_residual,
        "iterations": r.iterations,
        "converged": r.converged,
        "sign_pattern": r.sign_pattern,
        "restarted": r.restarted,
        "abs_accepted": r.abs_accepted,
        "extra_fibering_roots": r.extra_fibering_roots,
        "nehari_lower_bound": r.nehari_lower_bound,
        "norms": { "L2": r.u_star.l2_norm(), "Hs": r.hs_norm, "Linf": r.u_star.linf_norm() },
    }))
}

fn emit_solution(run: &mut Run, report: &SolveReport, tol: f64) -> Result<()> {
    run.write_json("solve.json", &solve_summary(report)?)?;
    let mut buf = Vec::new();
    report.u_star.write_csv(&mut buf)?;
    run.write("u_star.csv", &String::from_utf8_lossy(&buf))?;
    let profile: Vec<(f64, f64)> = report.u_star.grid.centers.iter().copied().zip(report.u_star.values.iter().copied()).collect();
    run.write_svg("u_star.svg", || line_plot("least-energy solution", "x", "u", &[Series { label: "u*", points: profile }], false))?;
    if !report.converged {
        run.numerical_failures.push(format!(
            "solver stopped after {} iterations with gradient norm {:e} > {tol:e}",
            report.iterations, report.gradient_norm
        ));
    }
    Ok(())
}

fn pipeline_solve_limit(cfg: &RunConfig, ops: &OperatorSet, run: &mut Run) -> Result<()> {
    let n = &cfg.nonlinearity;
    let nl = Nonlinearity::new(n.family(), n.omega.sample(&ops.grid), n.sigma)?;
    let scfg = solver_config(cfg);
    let init = random_init(&ops.grid, cfg.solver.seed);
    let report = run.stage("solve", |_| {
        if nl.sigma > 0.0 {
            solve_superlinear_limit(ops, &nl, &init, &scfg)
        } else {
            solve_sublinear_limit(ops, &nl, &init, &scfg)
        }
    })?;
    run.stage("emit", |run| emit_solution(run, &report, scfg.tol))
}

fn pipeline_solve_frac(cfg: &RunConfig, ops: &OperatorSet, run: &mut Run) -> Result<()> {
    let f = &cfg.frac;
    let a = f.a.sample(&ops.grid);
    let scfg = solver_config(cfg);
    let init = run.stage("init", |_| ops.frac_eigenpair(f.s).map(|e| e.phi))?;
    let report = run.stage("solve", |_| solve_frac(ops, f.s, f.p, &a, &init, &scfg))?;
    if let Some(m) = report.nehari_lower_bound {
        run.verdict("nehari_lower_bound", report.hs_norm >= m, format!("‖u‖_s = {:e} against M(s) = {m:e}", report.hs_norm));
    }
    run.stage("emit", |run| emit_solution(run, &report, scfg.tol))
}

fn sweep_spec(cfg: &RunConfig, ops: &OperatorSet) -> SweepSpec {
    SweepSpec { schedule: cfg.sweep.s_schedule.clone(), sigma: cfg.sweep.sigma, omega: cfg.sweep.omega_profile.sample(&ops.grid) }
}

fn gap_plot(title: &str, xs: &[f64], columns: &[(&'static str, Vec<f64>)]) -> String {
    let series: Vec<Series> =
        columns.iter().map(|(label, ys)| Series { label, points: xs.iter().copied().zip(ys.iter().copied()).collect() }).collect();
    line_plot(title, "s", "gap", &series, true)
}

fn pipeline_sweep_super(cfg: &RunConfig, ops: &OperatorSet, run: &mut Run) -> Result<()> {
    let spec = sweep_spec(cfg, ops);
    let report = run.stage("sweep", |_| run_superlinear_asymptotics(ops, &spec, &solver_config(cfg)))?;
    for (s, e) in &report.failures {
        run.numerical_failures.push(format!("s = {s}: {e}"));
    }
    let t = &report.trends;
    for (name, holds) in [("l2_gap", t.l2_gap), ("energy_gap", t.energy_gap), ("norm_gap", t.norm_gap), ("r_gap", t.r_gap), ("lower_bound", t.lower_bound)] {
        run.verdict(&format!("super_{name}"), holds, "decreasing over the last three orders".into());
    }
    run.stage("emit", |run| {
        let mut csv = String::from("s,l2_gap,energy_gap,norm_gap,r_gap\n");
        for r in &report.rows {
            csv.push_str(&format!("{},{:e},{:e},{:e},{:e}\n", r.s, r.l2_gap, r.energy_gap, r.norm_gap, r.r_gap));
        }
        run.write("sweep.csv", &csv)?;
        run.write_json("sweep.json", &report)?;
        let xs: Vec<f64> = report.rows.iter().map(|r| r.s).collect();
        let col = |f: fn(&loglap::asymptotics::SuperRow) -> f64| report.rows.iter().map(f).collect::<Vec<_>>();
        let columns =
            [("l2_gap", col(|r| r.l2_gap)), ("energy_gap", col(|r| r.energy_gap)), ("norm_gap", col(|r| r.norm_gap)), ("r_gap", col(|r| r.r_gap))];
        run.write_svg("sweep.svg", || gap_plot("superlinear gaps", &xs, &columns))
    })
}

fn pipeline_sweep_sub(cfg: &RunConfig, ops: &OperatorSet, run: &mut Run) -> Result<()> {
    let spec = sweep_spec(cfg, ops);
    let report = run.stage("sweep", |_| run_sublinear_asymptotics(ops, &spec, &solver_config(cfg)))?;
    for (s, e) in &report.failures {
        run.numerical_failures.push(format!("s = {s}: {e}"));
    }
    let t = &report.trends;
    for (name, holds) in [
        ("l1_gap", t.l1_gap),
        ("l2_gap", t.l2_gap),
        ("l4_gap", t.l4_gap),
        ("sandwich", t.sandwich),
        ("floor", t.floor),
        ("linf", t.linf),
    ] {
        run.verdict(&format!("sub_{name}"), holds, String::new());
    }
    run.stage("emit", |run| {
        let mut csv = String::from("s,l1_gap,l2_gap,l4_gap,hs_norm_sq,sandwich_lower,sandwich_upper,linf\n");
        for r in &report.rows {
            csv.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                r.s, r.l1_gap, r.l2_gap, r.l4_gap, r.hs_norm_sq, r.sandwich_lower, r.sandwich_upper, r.linf
            ));
        }
        run.write("sweep.csv", &csv)?;
        run.write_json("sweep.json", &report)?;
        let xs: Vec<f64> = report.rows.iter().map(|r| r.s).collect();
        let col = |f: fn(&loglap::asymptotics::SubRow) -> f64| report.rows.iter().map(f).collect::<Vec<_>>();
        let columns = [("l1_gap", col(|r| r.l1_gap)), ("l2_gap", col(|r| r.l2_gap)), ("l4_gap", col(|r| r.l4_gap))];
        run.write_svg("sweep.svg", || gap_plot("sublinear gaps", &xs, &columns))
    })
}

fn pipeline_verify(cfg: &RunConfig, ops: &OperatorSet, run: &mut Run) -> Result<()> {
    let spec = LedgerSpec {
        fields: cfg.verify.fields,
        seed: cfg.solver.seed,
        sigma: cfg.sweep.sigma,
        omega: cfg.sweep.omega_profile.sample(&ops.grid),
    };
    let ledger = run.stage("ledger", |_| verify_all(ops, &spec, &solver_config(cfg)))?;
    for v in &ledger {
        run.verdicts.push(v.into());
    }
    run.stage("emit", |run| run.write_json("ledger.json", &ledger))
}

fn pipeline_embed(cfg: &RunConfig, ops: &OperatorSet, run: &mut Run) -> Result<()> {
    let grid = ops.grid.clone();
    let bump = GridFunction::from_fn(grid.clone(), |x| bump_profile(&grid.interval, x));
    let report = run.stage("scaling", |_| {
        let u = normalize_critical_modular(&bump)?;
        verify_noncompactness(&u, &cfg.embed.k_list, PhiFunction::Supercritical { eps: cfg.embed.eps }, None)
    })?;
    for v in [&report.bounded, &report.l2_identity, &report.modular_floor, &report.growth] {
        run.verdicts.push(v.into());
    }
    run.stage("emit", |run| {
        let mut csv = String::from("k,energy,l2_sq,modular_critical,modular_gamma\n");
        for r in &report.rows {
            csv.push_str(&format!("{},{:e},{:e},{:e},{:e}\n", r.k, r.energy, r.l2_sq, r.modular_critical, r.modular_gamma));
        }
        run.write("scaling.csv", &csv)?;
        let mut growth = String::from("k,modular_gamma\n");
        for (k, m) in &report.growth_scan {
            growth.push_str(&format!("{k},{m:e}\n"));
        }
        run.write("growth.csv", &growth)?;
        run.write_json("embed.json", &report)?;
        let points = report.growth_scan.clone();
        run.write_svg("growth.svg", || line_plot("supercritical modular of u_k", "k", "modular", &[Series { label: "gamma", points }], true))
    })
}
