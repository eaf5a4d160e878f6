//! Configuration, run manifests and file emission for the `loglap` binary.

pub mod config;
pub mod run;
pub mod svg;

use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;
use loglap::{Error, Result};
use serde_json::json;

use config::RunConfig;
use run::{build_operators, create_run_dir, exit_code, precheck, run_pipeline, write_manifest, Command, Run};

/// Environment variable that overrides `output.dir`.
pub const OUTPUT_DIR_ENV: &str = "LOGLAP_OUTPUT_DIR";

/// Logarithmic and small-order fractional Laplacians on an interval.
///
/// Any config key can be overridden with `--section.key value`
/// (top-level keys as `--key value`); `--sigma` and `--N` are short for
/// `--nonlinearity.sigma` and `--dimension`.
#[derive(Debug, Parser)]
#[command(name = "loglap", version)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Config file in sectioned key = value format.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `--section.key value` overrides.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
    pub overrides: Vec<String>,
}

fn alias(flag: &str) -> &str {
    match flag {
        "sigma" => "nonlinearity.sigma",
        "N" => "dimension",
        other => other,
    }
}

/// Splits `--key value` pairs, pulling out a `--config` that appeared among them.
pub fn split_overrides(args: &[String]) -> Result<(Option<PathBuf>, Vec<(String, String)>)> {
    let mut config = None;
    let mut pairs = Vec::new();
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let key = flag.strip_prefix("--").ok_or_else(|| Error::Config(format!("expected --key, got {flag:?}")))?;
        let (key, value) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| Error::Config(format!("missing value for --{key}")))?;
                (key.to_string(), v.clone())
            }
        };
        if key == "config" {
            config = Some(PathBuf::from(value));
        } else {
            pairs.push((alias(&key).to_string(), value));
        }
    }
    Ok((config, pairs))
}

/// File, then the output-dir environment variable, then flags.
pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let (extra_config, pairs) = split_overrides(&cli.overrides)?;
    let path = cli.config.clone().or(extra_config);
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
        cfg.output.dir = dir;
    }
    for (k, v) in &pairs {
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

fn fail(stage: &str, e: &Error) -> i32 {
    eprintln!("loglap: {stage}: {e}");
    exit_code(e)
}

/// Runs one invocation and returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { run::EXIT_CONFIG } else { run::EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => return fail("config", &e),
    };
    let start = Instant::now();
    let started_at = chrono::Utc::now().to_rfc3339();
    let dir = match create_run_dir(std::path::Path::new(&cfg.output.dir), cli.command) {
        Ok(d) => d,
        Err(e) => return fail("output", &e),
    };
    let mut run = Run::new(dir.clone(), cfg.output.emit_svg);
    let result = run
        .stage("validate", |_| precheck(cli.command, &cfg))
        .and_then(|_| run.stage("assemble", |_| build_operators(cli.command, &cfg)))
        .and_then(|ops| run_pipeline(cli.command, &cfg, &ops, &mut run));

    let (code, status, error) = match &result {
        Err(e) => (exit_code(e), if exit_code(e) == run::EXIT_CONFIG { "config_error" } else { "numerical_failure" }, Some(e.to_string())),
        Ok(()) if !run.numerical_failures.is_empty() => (run::EXIT_NUMERICAL, "numerical_failure", Some(run.numerical_failures.join("; "))),
        Ok(()) if !run.all_hold() => (run::EXIT_VERDICT, "verdict_failed", None),
        Ok(()) => (run::EXIT_OK, "ok", None),
    };
    let manifest = json!({
        "subcommand": cli.command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "started_at": started_at,
        "wall_clock_seconds": start.elapsed().as_secs_f64(),
        "config": cfg.emit(),
        "solver": run::solver_config(&cfg),
        "stages": run.stages,
        "verdicts": run.verdicts,
        "files": run.files,
        "status": status,
        "exit_code": code,
        "failure_stage": run.failure_stage,
        "error": error,
    });
    if let Err(e) = write_manifest(&dir, &manifest) {
        return fail("manifest", &e);
    }
    if let Some(msg) = &error {
        eprintln!("loglap: {}: {msg}", run.failure_stage.as_deref().unwrap_or("solve"));
    }
    for v in run.verdicts.iter().filter(|v| !v.holds) {
        eprintln!("loglap: verdict {} failed: {}", v.name, v.detail);
    }
    println!("{}", dir.display());
    code
}
