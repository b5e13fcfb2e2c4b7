//! `airybeam` command-line driver.
//!
//! Exit status is 0 on success. Failures print
//! `{"error": "...", "kind": "..."}` on stderr and exit with status 1.

use std::path::PathBuf;
use std::process::ExitCode;

use airybeam::experiments::{boundary_check, run_field_map, run_height_sweep, run_monte_carlo, Context};
use airybeam::{Error, ExperimentConfig, Result, Strategy};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "airybeam", version, about = "Near-field Airy beam training experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Field maps of each strategy's winning beam on the configured scene.
    Fieldmap(Common),
    /// Spectral efficiency versus blockage height.
    Heights(Common),
    /// Random blockage scenarios with per-scenario and aggregate tables.
    Montecarlo(Common),
    /// Feasibility oracle suite; prints the measured critical ratio.
    BoundaryCheck(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// TOML config file; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of nupc,fs1c,hfac,focusing.
    #[arg(long)]
    strategies: Option<String>,
    /// Number of Monte Carlo scenarios.
    #[arg(long, allow_negative_numbers = true)]
    scenarios: Option<i64>,
}

impl Common {
    fn resolve(&self) -> Result<(ExperimentConfig, PathBuf)> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(s) = &self.strategies {
            cfg.strategies = Strategy::parse_list(s)?;
        }
        if let Some(k) = self.scenarios {
            if k <= 0 {
                return Err(Error::Config(format!("--scenarios must be positive, got {k}")));
            }
            cfg.scenarios = k as usize;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.display().to_string();
        }
        cfg.validate()?;
        let out = PathBuf::from(&cfg.out_dir);
        Ok((cfg, out))
    }
}

fn run(cli: Cli) -> Result<serde_json::Value> {
    match cli.command {
        Command::Fieldmap(c) => {
            let (cfg, out) = c.resolve()?;
            let ctx = Context::new(cfg)?;
            let summary = run_field_map(&ctx, &out)?;
            Ok(serde_json::to_value(summary)?)
        }
        Command::Heights(c) => {
            let (cfg, out) = c.resolve()?;
            let ctx = Context::new(cfg)?;
            let rows = run_height_sweep(&ctx, &out)?;
            Ok(json!({
                "rows": rows.len(),
                "file": out.join("heights.csv").display().to_string(),
                "rho": ctx.budget.rho,
            }))
        }
        Command::Montecarlo(c) => {
            let (cfg, out) = c.resolve()?;
            let ctx = Context::new(cfg)?;
            let mc = run_monte_carlo(&ctx, &out)?;
            Ok(json!({
                "scenarios": mc.scenarios.len(),
                "aggregate": mc.aggregate,
                "rho": ctx.budget.rho,
            }))
        }
        Command::BoundaryCheck(c) => {
            let (cfg, _) = c.resolve()?;
            let ctx = Context::new(cfg)?;
            Ok(serde_json::to_value(boundary_check(&ctx)?)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("json output"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.to_string(), "kind": e.kind() }));
            ExitCode::FAILURE
        }
    }
}
