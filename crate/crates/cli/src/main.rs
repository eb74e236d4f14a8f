mod commands;
mod config;
mod io;
mod manifest;
mod models;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use msv_core::ErrorClass;

use config::{BacktestConfig, FitConfig, ForecastConfig, Layered, McsConfig, SimulateConfig};
use manifest::Manifest;

#[derive(Debug, Parser)]
#[command(name = "msv", version, about = "Sparse multivariate stochastic volatility: simulate, fit, forecast, compare")]
struct Cli {
    /// TOML file with the command's settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Where to write the run manifest (defaults next to the outputs).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate return panels and their true covariances.
    Simulate(SimulateConfig),
    /// Fit a stochastic volatility model or a GARCH-type baseline.
    Fit(FitConfig),
    /// Forecast covariances from a fitted model.
    Forecast(ForecastConfig),
    /// Compare models out of sample (DM tests) or against simulated truth.
    Backtest(BacktestConfig),
    /// Model confidence set over a loss table.
    Mcs(McsConfig),
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Io(String),
    Core { context: Option<String>, source: msv_core::Error },
}

impl CliError {
    pub fn in_file(path: &Path, source: msv_core::Error) -> Self {
        Self::Core { context: Some(path.display().to_string()), source }
    }

    fn class(&self) -> ErrorClass {
        match self {
            Self::Config(_) => ErrorClass::Config,
            Self::Data(_) | Self::Io(_) => ErrorClass::Data,
            Self::Core { source, .. } => source.class(),
        }
    }

    pub fn class_name(&self) -> &'static str {
        match self.class() {
            ErrorClass::Config => "config",
            ErrorClass::Data => "data",
            ErrorClass::Numerical => "numerical",
            ErrorClass::Infeasible => "infeasible",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numerical => 4,
            ErrorClass::Infeasible => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Data(m) => write!(f, "data error: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
            Self::Core { context: Some(c), source } => write!(f, "{c}: {source}"),
            Self::Core { context: None, source } => write!(f, "{source}"),
        }
    }
}

impl From<msv_core::Error> for CliError {
    fn from(source: msv_core::Error) -> Self {
        Self::Core { context: None, source }
    }
}

/// Resolves the config, runs the command and always writes the manifest.
fn run<C, F>(name: &str, flags: C, cli: &Cli, default_out: fn(&C) -> Option<PathBuf>, body: F) -> Result<(), CliError>
where
    C: Layered + serde::Serialize + Clone,
    F: FnOnce(&C, &mut Manifest) -> Result<(), CliError>,
{
    let mut manifest = Manifest::new(name);
    let (outcome, out) = match flags.clone().resolve(cli.config.as_deref()) {
        Ok(cfg) => {
            manifest.set_config(&cfg);
            (body(&cfg, &mut manifest), default_out(&cfg))
        }
        Err(e) => {
            manifest.set_config(&flags);
            (Err(e), default_out(&flags))
        }
    };
    manifest.finish(&outcome);
    let path = cli.manifest.clone().or(out).unwrap_or_else(|| PathBuf::from(format!("msv-{name}-manifest.json")));
    if let Err(e) = manifest.write(&path) {
        eprintln!("warning: could not write manifest {}: {e}", path.display());
    }
    outcome
}

/// Manifest next to a directory output or a file output.
fn in_dir(out: &Option<PathBuf>) -> Option<PathBuf> {
    out.as_ref().map(|d| d.join("manifest.json"))
}

fn beside(out: &Option<PathBuf>) -> Option<PathBuf> {
    out.as_ref().map(|f| {
        let mut name = f.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        f.with_file_name(name)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(c) => run("simulate", c.clone(), &cli, |c| in_dir(&c.out), commands::simulate),
        Command::Fit(c) => run("fit", c.clone(), &cli, |c| beside(&c.out), commands::fit),
        Command::Forecast(c) => run("forecast", c.clone(), &cli, |c| beside(&c.out), commands::forecast),
        Command::Backtest(c) => run("backtest", c.clone(), &cli, |c| in_dir(&c.out), commands::backtest),
        Command::Mcs(c) => run("mcs", c.clone(), &cli, |c| beside(&c.out), commands::mcs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
