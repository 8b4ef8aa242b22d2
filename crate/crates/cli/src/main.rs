//! `fucik`: batch driver for resonance tables, zero searches, contraction
//! and invariance certificates, orbits and the three reference scenarios.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fucik_core::dynamics::Direction;
use fucik_core::Execution;

use config::{parse_override, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] fucik_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Precondition(_) => 2,
            CliError::Core(e) if !e.is_numerical() => 2,
            CliError::Core(_) | CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

#[derive(Parser)]
#[command(name = "fucik", version, about = "Unbounded orbits of coupled asymmetric oscillators at resonance")]
struct Cli {
    /// TOML run configuration; every section is optional.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Seed for every Monte Carlo sampler.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Sample budget (contraction or invariance).
    #[arg(long, global = true, value_name = "N")]
    samples: Option<usize>,
    /// Zero-search grid side (torus grid for `resonance`).
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,
    /// Newton residual tolerance.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Map direction; D- zeros always use the backward map.
    #[arg(long, global = true, value_name = "forward|backward")]
    direction: Option<Direction>,
    /// Disable data parallelism (outputs are identical either way).
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate Λ, Σ, Φ, Φ' and L.
    Resonance,
    /// Locate and classify the zeros of L.
    Zeros,
    /// Cone parameters and sampled contraction check for a 2×2 matrix.
    Contraction,
    /// Build and verify an invariant set around a zero.
    Invariance {
        /// Zero index as listed by `zeros`.
        #[arg(long)]
        zero: Option<usize>,
    },
    /// Iterate the Poincaré map.
    Orbit {
        #[arg(long)]
        iterates: Option<usize>,
        /// Start state; defaults to a point of the certified set.
        #[arg(long, num_args = 4, value_names = ["THETA1", "THETA2", "R1", "R2"], allow_negative_numbers = true)]
        start: Option<Vec<f64>>,
        #[arg(long)]
        zero: Option<usize>,
    },
    /// Run a reference scenario: small-coupling, phi1-null or linear-symmetric.
    Scenario {
        name: Option<String>,
        /// Scenario parameter override, e.g. `--param k=3`.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.samples {
        cfg.contraction.samples = n;
        cfg.invariance.samples = n;
    }
    if let Some(g) = cli.grid {
        cfg.zeros.grid = g;
        cfg.resonance.torus_grid = g;
    }
    if let Some(t) = cli.tol {
        cfg.zeros.tol = t;
    }
    if let Some(d) = cli.direction {
        cfg.orbit.direction = d;
    }
    match &cli.command {
        Command::Invariance { zero } => cfg.invariance.zero_index = zero.or(cfg.invariance.zero_index),
        Command::Orbit { iterates, start, zero } => {
            if let Some(n) = iterates {
                cfg.orbit.iterates = *n;
            }
            if let Some(s) = start {
                cfg.orbit.start = Some([s[0], s[1], s[2], s[3]]);
            }
            cfg.invariance.zero_index = zero.or(cfg.invariance.zero_index);
        }
        Command::Scenario { name, params } => {
            if let Some(n) = name {
                cfg.scenario.name = Some(n.clone());
            }
            for kv in params {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| CliError::Config(format!("expected KEY=VALUE, got {kv:?}")))?;
                cfg.scenario.params.insert(k.trim().to_string(), parse_override(v.trim()));
            }
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve(cli)?;
    let ctx = commands::Context {
        cfg: &cfg,
        out: &cli.out,
        exec: if cli.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
    };
    let out = match &cli.command {
        Command::Resonance => commands::resonance(&ctx)?,
        Command::Zeros => commands::zeros(&ctx)?,
        Command::Contraction => commands::contraction(&ctx)?,
        Command::Invariance { .. } => commands::invariance(&ctx, cli.direction)?,
        Command::Orbit { .. } => commands::orbit(&ctx, cli.direction)?,
        Command::Scenario { .. } => {
            let name = cfg
                .scenario
                .name
                .as_deref()
                .ok_or_else(|| CliError::Config("scenario name missing".into()))?;
            commands::scenario(&ctx, name)?
        }
    };
    log::info!("{} file(s) written to {}", out.written().len(), cli.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
