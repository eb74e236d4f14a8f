use std::path::Path;

use msv_core::baselines::{fit_ccc, fit_dcc_scalar, fit_ogarch, forecast_baseline, BaselineFit};
use msv_core::covseq::CovSequence;
use msv_core::estimator::{fit_msv, LambdaChoice, MsvFit, MsvOptions, StabilityPolicy};
use msv_core::panel::{log_square_transform, ReturnPanel, ZeroPolicy};
use msv_core::penalty::{PenaltyFamily, PenaltySpec};
use msv_core::smoother::{SmootherOpts, SolveBackend};
use msv_core::var::{log_grid, CvPlan};

use crate::config::EstimationConfig;
use crate::io::write_atomic;
use crate::CliError;

pub const DEFAULT_LAGS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    /// Penalized stochastic volatility fit.
    Msv(PenaltyFamily),
    /// Unpenalized stochastic volatility fit.
    Ols,
    Dcc,
    Ccc,
    Ogarch,
}

impl ModelChoice {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "ols" => Self::Ols,
            "dcc" => Self::Dcc,
            "ccc" => Self::Ccc,
            "ogarch" | "o-garch" => Self::Ogarch,
            other => Self::Msv(
                other
                    .parse()
                    .map_err(|_| CliError::Config(format!("unknown model `{other}` (scad, mcp, lasso, ols, dcc, ccc, ogarch)")))?,
            ),
        })
    }

    pub fn list(s: &str) -> Result<Vec<Self>, CliError> {
        let models = s.split(',').filter(|m| !m.trim().is_empty()).map(Self::parse).collect::<Result<Vec<_>, _>>()?;
        if models.is_empty() {
            return Err(CliError::Config("empty model list".into()));
        }
        for (i, m) in models.iter().enumerate() {
            if models[..i].contains(m) {
                return Err(CliError::Config(format!("model `{}` listed twice", m.name())));
            }
        }
        Ok(models)
    }

    pub fn name(&self) -> String {
        match self {
            Self::Msv(f) => f.to_string(),
            Self::Ols => "ols".into(),
            Self::Dcc => "dcc".into(),
            Self::Ccc => "ccc".into(),
            Self::Ogarch => "ogarch".into(),
        }
    }
}

pub enum Fitted {
    Msv(Box<MsvFit<f64>>),
    Baseline(BaselineFit<f64>),
}

impl Fitted {
    pub fn in_sample(&self) -> CovSequence<f64> {
        match self {
            Self::Msv(f) => f.smoothed_covariances(),
            Self::Baseline(b) => b.fitted.clone(),
        }
    }

    pub fn forecast(&self, horizon: usize) -> Result<CovSequence<f64>, CliError> {
        Ok(match self {
            Self::Msv(f) => f.forecast(horizon)?,
            Self::Baseline(b) => {
                if horizon == 0 {
                    return Err(CliError::Config("forecast horizon must be at least 1".into()));
                }
                forecast_baseline(&b.model, horizon)
            }
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        match self {
            Self::Msv(f) => write_atomic(path, |w| Ok(f.model.to_json(w)?)),
            Self::Baseline(b) => write_atomic(path, |w| Ok(b.model.to_json(w)?)),
        }
    }

    pub fn summary(&self) -> serde_json::Value {
        match self {
            Self::Msv(f) => {
                let m = &f.model.meta;
                serde_json::json!({
                    "lambda": m.lambda,
                    "support_size": m.support_size,
                    "var_converged": m.var_converged,
                    "raw_spectral_radius": m.raw_spectral_radius,
                    "phi_rescaled": m.phi_rescaled,
                    "psd_shrink": m.psd_shrink,
                    "split_clamped": m.split_clamped,
                    "gamma_ridge": m.gamma_ridge,
                })
            }
            Self::Baseline(b) => serde_json::json!({ "kind": b.model.name() }),
        }
    }
}

pub fn zero_policy(s: Option<&str>) -> Result<ZeroPolicy, CliError> {
    match s {
        None => Ok(ZeroPolicy::default()),
        Some("error") => Ok(ZeroPolicy::Error),
        Some("half-min-nonzero") => Ok(ZeroPolicy::HalfMinNonzero),
        Some(other) => Err(CliError::Config(format!("unknown zero policy `{other}` (error, half-min-nonzero)"))),
    }
}

pub fn smoother_opts(
    backend: Option<&str>,
    dense_threshold: Option<usize>,
    cg_tol: Option<f64>,
) -> Result<SmootherOpts<f64>, CliError> {
    let mut o = SmootherOpts::default();
    o.backend = match backend {
        None => None,
        Some("dense") => Some(SolveBackend::DenseCholesky),
        Some("cg") => Some(SolveBackend::ConjugateGradient),
        Some(other) => return Err(CliError::Config(format!("unknown backend `{other}` (dense, cg)"))),
    };
    if let Some(t) = dense_threshold {
        o.dense_threshold = t;
    }
    if let Some(t) = cg_tol {
        if !(t > 0.0) {
            return Err(CliError::Config("cg_tol must be positive".into()));
        }
        o.cg_tol = t;
    }
    Ok(o)
}

/// Estimator options for a stochastic volatility fit of `panel`.
pub fn msv_options(
    choice: ModelChoice,
    est: &EstimationConfig,
    panel: &ReturnPanel<f64>,
) -> Result<MsvOptions<f64>, CliError> {
    let family = match choice {
        ModelChoice::Msv(f) => f,
        ModelChoice::Ols => PenaltyFamily::Lasso,
        _ => unreachable!("baselines take no estimator options"),
    };
    let lags = est.lags.unwrap_or(DEFAULT_LAGS);
    let mut o = MsvOptions::new(lags, family);
    if let Some(a) = est.shape {
        o.shape = a;
    }
    PenaltySpec { family, lambda: 0.0, shape: o.shape }.validate()?;
    o.zero_policy = zero_policy(est.zero_policy.as_deref())?;
    o.clamp_split = est.clamp_split.unwrap_or(false);
    o.stability = match est.stability.as_deref() {
        None | Some("rescale") => StabilityPolicy::Rescale,
        Some("error") => StabilityPolicy::Error,
        Some(other) => return Err(CliError::Config(format!("unknown stability policy `{other}` (rescale, error)"))),
    };
    o.smoother = smoother_opts(None, est.dense_threshold, est.cg_tol)?;
    let custom_plan = est.folds.is_some() || est.grid_len.is_some() || est.grid_ratio.is_some();
    o.lambda = match (choice, est.lambda) {
        (ModelChoice::Ols, Some(l)) if l != 0.0 => {
            return Err(CliError::Config("ols is the unpenalized fit and takes no lambda".into()))
        }
        (ModelChoice::Ols, _) => LambdaChoice::Fixed(0.0),
        (_, Some(l)) => LambdaChoice::Fixed(l),
        (_, None) if custom_plan => {
            let x = log_square_transform(panel, o.zero_policy)?;
            let base = CvPlan::default_for(&x, lags)?;
            let len = est.grid_len.unwrap_or(base.lambda_grid.len());
            let ratio = est.grid_ratio.unwrap_or(msv_core::var::DEFAULT_GRID_RATIO);
            if !(ratio > 0.0 && ratio < 1.0) || len == 0 {
                return Err(CliError::Config("grid_len must be positive and grid_ratio in (0, 1)".into()));
            }
            let plan = CvPlan {
                n_folds: est.folds.unwrap_or(base.n_folds),
                gap: base.gap,
                lambda_grid: log_grid(base.lambda_grid[0], len, ratio),
            };
            plan.validate()?;
            LambdaChoice::CrossValidate(Some(plan))
        }
        (_, None) => LambdaChoice::CrossValidate(None),
    };
    Ok(o)
}

pub fn fit_model(choice: ModelChoice, est: &EstimationConfig, panel: &ReturnPanel<f64>) -> Result<Fitted, CliError> {
    Ok(match choice {
        ModelChoice::Dcc => Fitted::Baseline(fit_dcc_scalar(panel)?),
        ModelChoice::Ccc => Fitted::Baseline(fit_ccc(panel)?),
        ModelChoice::Ogarch => Fitted::Baseline(fit_ogarch(panel)?),
        _ => Fitted::Msv(Box::new(fit_msv(panel, &msv_options(choice, est, panel)?)?)),
    })
}

/// Fit inside a multi-model run: a shared `lambda` applies to the penalized
/// fits only, so the unpenalized one ignores it instead of failing.
pub fn fit_shared(choice: ModelChoice, est: &EstimationConfig, panel: &ReturnPanel<f64>) -> Result<Fitted, CliError> {
    if choice == ModelChoice::Ols && est.lambda.is_some() {
        let est = EstimationConfig { lambda: None, ..est.clone() };
        return fit_model(choice, &est, panel);
    }
    fit_model(choice, est, panel)
}
