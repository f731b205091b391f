//! Configuration handling and experiment drivers for the `darkcav` command.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::ExperimentConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "darkcav", version, about = "Stationary states of driven cavity QED arrays")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output file; overrides `output.path`. Standard output when neither is set.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Seed for the localized coupling generator; overrides the config value.
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,

    /// Worker threads for parallel sweeps.
    #[arg(long, global = true, value_name = "INT")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Stationary populations along a detuning grid (CSV).
    Sweep,
    /// Dark-state residual, stationary fidelity and observability.
    Darkstate,
    /// Observability conditions per collective mode.
    Observability,
    /// Weak-excitation versus full Fock solver on a drive ladder (CSV).
    Oracle,
    /// Collective decomposition of the coupling matrix.
    Svd,
}

impl Cli {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Validation("--config <PATH> is required".into()))?;
        Ok(ExperimentConfig::from_path(path)?.with_seed(self.seed))
    }

    fn out_path(&self, config: &ExperimentConfig) -> Option<PathBuf> {
        self.out.clone().or_else(|| config.output.path.as_ref().map(PathBuf::from))
    }
}

/// Runs one invocation and returns the process exit code; diagnostics go to stderr.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(()) => error::exit::SUCCESS,
        Err(e) => {
            eprintln!("darkcav: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        // A second initialization in the same process keeps the existing pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let config = cli.load()?;
    let out = cli.out_path(&config);
    let out = out.as_deref();
    match cli.command {
        Command::Sweep => {
            let result = experiments::run_sweep(&config)?;
            output::emit(out, &result.csv)?;
            if result.failures() > 0 {
                return Err(CliError::Check(format!(
                    "{} of {} sweep points failed",
                    result.failures(),
                    result.result.rows.len()
                )));
            }
        }
        Command::Oracle => {
            let result = experiments::run_oracle(&config)?;
            output::emit(out, &result.csv)?;
            if let Some(order) = result.order {
                eprintln!("fitted convergence order: {order}");
            }
            if !result.order_ok() {
                return Err(CliError::Check(format!(
                    "fitted convergence order {:?} deviates from 2 by more than {}",
                    result.order,
                    experiments::ORDER_TOLERANCE
                )));
            }
        }
        Command::Darkstate => report(out, experiments::run_darkstate(&config)?.0)?,
        Command::Observability => report(out, experiments::run_observability(&config)?)?,
        Command::Svd => report(out, experiments::run_svd(&config)?.0)?,
    }
    Ok(())
}

/// Text goes to stdout; the JSON form goes to the output file when one is set.
fn report(out: Option<&std::path::Path>, report: experiments::Report) -> Result<(), CliError> {
    output::emit(None, &report.text)?;
    if let Some(path) = out {
        output::emit(Some(path), &(report.json + "\n"))?;
    }
    Ok(())
}
