//! Command parameters. Every field can come from a TOML file or a flag;
//! flags win. Unknown TOML keys are rejected.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Fills every unset field of `$a` from `$b`.
macro_rules! overlay {
    ($a:expr, $b:expr, [$($f:ident),* $(,)?]) => {{
        let (mut a, b) = ($a, $b);
        $(if a.$f.is_none() { a.$f = b.$f; })*
        a
    }};
}

pub trait Layered: Sized + Default + DeserializeOwned {
    /// `self` takes precedence over `file`.
    fn over(self, file: Self) -> Self;

    fn resolve(self, config: Option<&Path>) -> Result<Self, CliError> {
        match config {
            None => Ok(self),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
                let file: Self =
                    toml::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
                Ok(self.over(file))
            }
        }
    }
}

pub fn required<T>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing required setting `{name}` (flag --{} or config key)", name.replace('_', "-"))))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    /// Data generating process: march, bekk or msv.
    #[arg(long)]
    pub kind: Option<String>,
    /// Number of assets.
    #[arg(long)]
    pub p: Option<usize>,
    /// Sample length.
    #[arg(long = "T", visible_alias = "t")]
    pub t: Option<usize>,
    /// ARCH order of the march process.
    #[arg(long)]
    pub q_star: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of replications, each on its own generator stream.
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Largest share of periods whose innovation may be redrawn (march).
    #[arg(long)]
    pub max_pd_share: Option<f64>,
    /// Output directory; replication `k` goes to `rep-k`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Layered for SimulateConfig {
    fn over(self, file: Self) -> Self {
        overlay!(self, file, [kind, p, t, q_star, seed, reps, burn_in, max_pd_share, out, jobs])
    }
}

/// Estimation settings shared by `fit` and `backtest`.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationConfig {
    /// VAR order of the first step.
    #[arg(long)]
    pub lags: Option<usize>,
    /// Fixed penalty level; cross-validated when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// SCAD `a` or MCP `b`.
    #[arg(long)]
    pub shape: Option<f64>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub grid_len: Option<usize>,
    /// Smallest grid level relative to the largest.
    #[arg(long)]
    pub grid_ratio: Option<f64>,
    /// Clamp an infeasible variance split instead of failing.
    #[arg(long)]
    pub clamp_split: Option<bool>,
    /// rescale or error.
    #[arg(long)]
    pub stability: Option<String>,
    /// error or half-min-nonzero.
    #[arg(long)]
    pub zero_policy: Option<String>,
    /// Largest `p T` smoothed with a dense factorization.
    #[arg(long)]
    pub dense_threshold: Option<usize>,
    #[arg(long)]
    pub cg_tol: Option<f64>,
}

impl EstimationConfig {
    pub fn over(self, file: Self) -> Self {
        overlay!(
            self,
            file,
            [lags, lambda, shape, folds, grid_len, grid_ratio, clamp_split, stability, zero_policy, dense_threshold, cg_tol]
        )
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Returns CSV with a header row of asset labels.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// scad, mcp, lasso, ols, dcc, ccc or ogarch.
    #[arg(long)]
    pub model: Option<String>,
    /// The `[estimation]` table of a config file.
    #[command(flatten)]
    #[serde(rename = "estimation", default)]
    pub est: EstimationConfig,
    /// Model JSON to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write in-sample covariances as CSV.
    #[arg(long)]
    pub fitted: Option<PathBuf>,
}

impl Layered for FitConfig {
    fn over(self, file: Self) -> Self {
        let est = self.est.clone().over(file.est.clone());
        Self { est, ..overlay!(self, file, [data, model, out, fitted]) }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastConfig {
    /// Model JSON written by `fit`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Sample the model was fitted on; needed by stochastic volatility models.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Forecast CSV in long format.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional binary dump of the same forecasts.
    #[arg(long)]
    pub binary: Option<PathBuf>,
    /// dense or cg; chosen by size when absent.
    #[arg(long)]
    pub backend: Option<String>,
    #[arg(long)]
    pub dense_threshold: Option<usize>,
    #[arg(long)]
    pub cg_tol: Option<f64>,
    /// Must match the policy used by the fit.
    #[arg(long)]
    pub zero_policy: Option<String>,
}

impl Layered for ForecastConfig {
    fn over(self, file: Self) -> Self {
        overlay!(self, file, [model, data, horizon, out, binary, backend, dense_threshold, cg_tol, zero_policy])
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BacktestConfig {
    /// Returns CSV for an out-of-sample backtest.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Directory written by `simulate`: compares in-sample fits against the
    /// true covariances of every replication.
    #[arg(long)]
    pub sim_dir: Option<PathBuf>,
    /// Comma-separated model list.
    #[arg(long)]
    pub models: Option<String>,
    /// Observations in the first estimation window.
    #[arg(long)]
    pub window: Option<usize>,
    /// Periods between refits; forecasts in between are multi-step.
    #[arg(long)]
    pub refit_every: Option<usize>,
    /// Keep the window length fixed instead of expanding it.
    #[arg(long)]
    pub rolling: Option<bool>,
    /// Newey-West lag of the DM tests.
    #[arg(long)]
    pub hac_lag: Option<usize>,
    /// The `[estimation]` table of a config file.
    #[command(flatten)]
    #[serde(rename = "estimation", default)]
    pub est: EstimationConfig,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Layered for BacktestConfig {
    fn over(self, file: Self) -> Self {
        let est = self.est.clone().over(file.est.clone());
        Self { est, ..overlay!(self, file, [data, sim_dir, models, window, refit_every, rolling, hac_lag, out, jobs]) }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McsConfig {
    /// Loss CSV: header of model names, one row per period.
    #[arg(long)]
    pub losses: Option<PathBuf>,
    /// semi-quadratic or range.
    #[arg(long)]
    pub statistic: Option<String>,
    #[arg(long)]
    pub bootstrap_reps: Option<usize>,
    #[arg(long)]
    pub block_len: Option<usize>,
    /// Comma-separated confidence levels.
    #[arg(long)]
    pub levels: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Layered for McsConfig {
    fn over(self, file: Self) -> Self {
        overlay!(self, file, [losses, statistic, bootstrap_reps, block_len, levels, seed, out, jobs])
    }
}
