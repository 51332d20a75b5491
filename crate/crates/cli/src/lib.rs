//! Command-line driver: scenario files, CSV output and the validation suite.

pub mod config;
pub mod output;
pub mod validation;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use contact_bar::experiments::{
    compare_mods, run_scenario, spatial_refinement_study, temporal_order_study, ScenarioConfig,
};

use crate::config::{ConfigError, Settings};
use crate::output::OutputError;

pub const THREADS_ENV: &str = "CONTACT_BAR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "contact-bar", version, about = "Elastic bar with unilateral contact: simulations and studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ScenarioArgs {
    /// Scenario file with key=value lines
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override a setting, e.g. --set scheme=hybrid (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Write CSV here instead of standard output
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and emit the trajectory CSV
    Simulate(ScenarioArgs),
    /// Run the scenario's scheme with every applicable mass redistribution
    CompareMods(ScenarioArgs),
    /// Time-step convergence of the reduced Crank–Nicolson scheme
    TemporalOrder {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated time steps (default: dt, dt/2, dt/4, dt/8)
        #[arg(long, value_delimiter = ',')]
        dts: Vec<f64>,
        /// Reference time step (default: dt/128)
        #[arg(long)]
        dt_ref: Option<f64>,
    },
    /// Rerun the scenario on several meshes
    SpatialRefine {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated element counts
        #[arg(long, value_delimiter = ',', default_value = "6,12,24")]
        ms: Vec<usize>,
    },
    /// Tabulate the exact benchmark solution on the scenario grid
    OracleDump(ScenarioArgs),
    /// Run the acceptance checks; exit 1 if any fails
    Validate,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    ConfigFile {
        path: PathBuf,
        #[source]
        source: ConfigError,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("run failed: {0}")]
    Solver(#[from] contact_bar::Error),
}

impl CliError {
    /// 2 for anything the user can fix in the invocation, 1 for a failed run.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(e) if !matches!(e, contact_bar::Error::Config(_) | contact_bar::Error::InvalidArgument(_)) => 1,
            _ => 2,
        }
    }
}

/// Reads `CONTACT_BAR_THREADS` and sizes the global worker pool.
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    // a pool that is already initialised keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn load_scenario(args: &ScenarioArgs) -> Result<ScenarioConfig, CliError> {
    let mut settings = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| OutputError::Io {
                path: path.clone(),
                source,
            })?;
            Settings::parse(&text).map_err(|source| CliError::ConfigFile {
                path: path.clone(),
                source,
            })?
        }
        None => Settings::default(),
    };
    settings.apply_overrides(&args.overrides)?;
    match (&args.config, settings.build()) {
        (_, Ok(cfg)) => Ok(cfg),
        (Some(path), Err(source)) => Err(CliError::ConfigFile {
            path: path.clone(),
            source,
        }),
        (None, Err(e)) => Err(e.into()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => output::write_atomic(path, text)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(|source| OutputError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
        }
    }
    Ok(())
}

/// Executes `command`, writing CSV to the requested destination and
/// summaries to standard error. Returns the process exit code.
pub fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Simulate(args) => {
            let cfg = load_scenario(&args)?;
            let run = run_scenario(&cfg)?;
            if cfg.outputs.energy {
                let e0 = run.ledger.energies.first().copied().unwrap_or(0.0);
                let emax = run.ledger.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let dmax = run.ledger.increments().fold(f64::NEG_INFINITY, f64::max);
                eprintln!("energy: initial {e0:.6e}, max {emax:.6e}, largest increment {dmax:.3e}");
            }
            if cfg.outputs.errors {
                let e = run.errors;
                eprintln!(
                    "errors: linf_l2 {:.6e}, contact l2 {:.6e}, multiplier l2 {:.6e}, energy drift {:.6e}",
                    e.linf_l2_displacement, e.l2_contact_displacement, e.l2_multiplier, e.energy_drift
                );
            }
            if cfg.outputs.trajectory {
                emit(args.out.as_deref(), &output::trajectory_csv(&run))?;
            }
            Ok(0)
        }
        Command::CompareMods(args) => {
            let cfg = load_scenario(&args)?;
            let rows = compare_mods(&cfg)?;
            emit(args.out.as_deref(), &output::compare_mods_csv(&rows))?;
            Ok(0)
        }
        Command::TemporalOrder { scenario, dts, dt_ref } => {
            let cfg = load_scenario(&scenario)?;
            let dts = if dts.is_empty() {
                vec![cfg.dt, cfg.dt / 2.0, cfg.dt / 4.0, cfg.dt / 8.0]
            } else {
                dts
            };
            let dt_ref = dt_ref.unwrap_or(cfg.dt / 128.0);
            let study = temporal_order_study(cfg.m, cfg.mode, &dts, dt_ref, cfg.t_final)?;
            eprintln!("observed order {:.4}", study.slope);
            emit(scenario.out.as_deref(), &output::temporal_order_csv(&study.points))?;
            Ok(0)
        }
        Command::SpatialRefine { scenario, ms } => {
            let cfg = load_scenario(&scenario)?;
            if let Some(bad) = ms.iter().find(|m| **m < 3) {
                return Err(CliError::Usage(format!("mesh sizes must be at least 3, got {bad}")));
            }
            let points = spatial_refinement_study(&cfg, &ms)?;
            emit(scenario.out.as_deref(), &output::spatial_refinement_csv(&points))?;
            Ok(0)
        }
        Command::OracleDump(args) => {
            let cfg = load_scenario(&args)?;
            let csv = output::oracle_csv(cfg.m, cfg.dt, cfg.steps()?)?;
            emit(args.out.as_deref(), &csv)?;
            Ok(0)
        }
        Command::Validate => {
            let results = validation::run_all();
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} of {} criteria passed", results.len() - failed, results.len());
            Ok(if failed == 0 { 0 } else { 1 })
        }
    }
}
