//! Second to fourth estimation steps and the end-to-end fit.

use std::f64::consts::PI;
use std::io::{Read, Write};

use ndarray::{s, Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, cov_to_corr, inverse, min_eigenvalue, sample_cov, spectral_radius, sym_eigen, trace, Lu};
use crate::panel::{log_square_transform, LogSqPanel, ReturnPanel, ZeroPolicy};
use crate::penalty::{PenaltyFamily, PenaltySpec};
use crate::scalar::Real;
use crate::covseq::CovSequence;
use crate::smoother::{
    forecast_from_terminal, mmsle_smooth, path_covariances, scale_factors, standardized_returns, SmootherOpts, SmoothedPath,
};
use crate::var::{fit_penalized_var, fit_penalized_var_cv, CvPlan, CvResult, SolverOpts, VarFit};

pub const MODEL_FORMAT_VERSION: u32 = 1;
/// Smallest eigenvalue allowed in the correlation estimate.
pub const GAMMA_EIG_FLOOR: f64 = 1e-8;
/// Target spectral radius after rescaling an unstable autoregressive matrix.
pub const RESCALE_TARGET: f64 = 0.995;
/// Split ratio used when clamping is enabled and the calibrated ratio is infeasible.
pub const CLAMPED_RATIO: f64 = 0.99;

/// Mean of `log(e^2)` variance for standard normal `e`: `pi^2 / 2`.
pub fn log_chi2_variance<T: Real>() -> T {
    T::lit(PI * PI / 2.0)
}

/// Coefficients of the regression of `y^l_t` on `1, y^l_{t-1}, u_{t-1}`.
#[derive(Debug, Clone)]
pub struct Step2Fit<T> {
    pub c_star: Array1<T>,
    pub phi: Array2<T>,
    pub xi: Array2<T>,
    /// Regression residuals for `t = m+1 .. T-1` (zero-based).
    pub residuals: Array2<T>,
}

/// Cholesky-based least squares `B = (X'X)^{-1} X'Y`, rejecting a design
/// whose Gram matrix is numerically rank deficient.
pub(crate) fn least_squares<T: Real>(x: ArrayView2<T>, y: ArrayView2<T>, what: &'static str) -> Result<Array2<T>> {
    let gram = x.t().dot(&x);
    let l = cholesky(gram.view()).ok_or(Error::SingularDesign(what))?;
    let tol = T::lit(1e-11);
    for j in 0..gram.nrows() {
        let pivot = l[[j, j]] * l[[j, j]];
        if !(pivot > tol * gram[[j, j]]) {
            return Err(Error::SingularDesign(what));
        }
    }
    let xty = x.t().dot(&y);
    let mut b = Array2::zeros(xty.raw_dim());
    for k in 0..xty.ncols() {
        b.column_mut(k).assign(&cholesky_solve(l.view(), xty.column(k)));
    }
    Ok(b)
}

/// Multi-response OLS over `t = m+1 .. T-1` (zero-based); residual row `k`
/// of `varfit` belongs to time `m + k`.
pub fn fit_step2<T: Real>(ylog: &LogSqPanel<T>, varfit: &VarFit<T>) -> Result<Step2Fit<T>> {
    let n = ylog.len();
    let p = ylog.dim();
    let m = varfit.lags;
    if varfit.residuals.dim() != (n - m, p) {
        return Err(Error::LengthMismatch { expected: n - m, got: varfit.residuals.nrows() });
    }
    let rows = n - m - 1;
    if rows < 2 * (1 + 2 * p) {
        return Err(Error::InsufficientSample { needed: 2 * (1 + 2 * p) + m, got: n });
    }
    let mut design = Array2::zeros((rows, 1 + 2 * p));
    design.column_mut(0).fill(T::one());
    design.slice_mut(s![.., 1..=p]).assign(&ylog.ylog.slice(s![m..n - 1, ..]));
    design.slice_mut(s![.., p + 1..]).assign(&varfit.residuals.slice(s![..rows, ..]));
    let resp = ylog.ylog.slice(s![m + 1.., ..]);
    let b = least_squares(design.view(), resp, "second-step regression")?;
    let residuals = &resp - &design.dot(&b);
    Ok(Step2Fit {
        c_star: b.row(0).to_owned(),
        phi: b.slice(s![1..=p, ..]).t().to_owned(),
        xi: b.slice(s![p + 1.., ..]).t().to_owned(),
        residuals,
    })
}

#[derive(Debug, Clone)]
pub struct VarianceSplit<T> {
    pub sigma_zeta: Array2<T>,
    pub sigma_alpha: Array2<T>,
    pub r: T,
    pub clamped: bool,
}

/// Splits `S_x` into `r S_x` and `(1 - r) S_x` with
/// `r = (pi^2 / 2) / (tr(S_x) / p)`.
pub fn split_variance<T: Real>(x: &LogSqPanel<T>, clamp: bool) -> Result<VarianceSplit<T>> {
    split_covariance(sample_cov(x.xcentered.view()).view(), clamp)
}

pub fn split_covariance<T: Real>(s_x: ArrayView2<T>, clamp: bool) -> Result<VarianceSplit<T>> {
    let p = T::from_usize_lossy(s_x.nrows());
    let tr = trace(s_x);
    let target = log_chi2_variance::<T>();
    let mut r = target / (tr / p);
    let mut clamped = false;
    if !(r < T::one()) || !r.is_finite() {
        if !clamp {
            return Err(Error::SplitInfeasible { trace: tr.as_f64(), threshold: (p * target).as_f64() });
        }
        r = T::lit(CLAMPED_RATIO);
        clamped = true;
    }
    Ok(VarianceSplit {
        sigma_zeta: s_x.mapv(|v| v * r),
        sigma_alpha: s_x.mapv(|v| v * (T::one() - r)),
        r,
        clamped,
    })
}

#[derive(Debug, Clone)]
pub struct GammaEstimate<T> {
    pub gamma: Array2<T>,
    /// Diagonal ridge added before renormalizing, if any.
    pub ridge: Option<T>,
}

/// Sample correlation of the raw returns, made positive definite by the
/// smallest diagonal ridge that lifts its eigenvalues to `1e-8`.
pub fn estimate_gamma<T: Real>(panel: &ReturnPanel<T>) -> Result<GammaEstimate<T>> {
    let cov = sample_cov(panel.data());
    let corr = cov_to_corr(cov.view()).map_err(Error::ZeroVarianceColumn)?;
    Ok(floor_correlation(corr))
}

pub(crate) fn floor_correlation<T: Real>(mut corr: Array2<T>) -> GammaEstimate<T> {
    let floor = T::lit(GAMMA_EIG_FLOOR);
    let lmin = min_eigenvalue(corr.view());
    if lmin >= floor {
        return GammaEstimate { gamma: corr, ridge: None };
    }
    // (lmin + d) / (1 + d) = floor
    let ridge = (floor - lmin) / (T::one() - floor);
    let scale = T::one() / (T::one() + ridge);
    for i in 0..corr.nrows() {
        corr[[i, i]] = corr[[i, i]] + ridge;
    }
    corr.mapv_inplace(|v| v * scale);
    for i in 0..corr.nrows() {
        corr[[i, i]] = T::one();
    }
    GammaEstimate { gamma: corr, ridge: Some(ridge) }
}

/// Moment-implied noise covariances, reported but never used downstream.
#[derive(Debug, Clone)]
pub struct MomentMatchReport<T> {
    /// `-(Phi^{-1} Xi S_u + S_u Xi' Phi'^{-1}) / 2`
    pub s_zeta: Array2<T>,
    /// `S_u + Xi S_u Xi' - S_zeta - Phi S_zeta Phi'`
    pub sigma_eta: Array2<T>,
    pub is_szeta_pd: bool,
    pub is_sx_minus_szeta_pd: bool,
}

pub const PHI_CONDITION_LIMIT: f64 = 1e10;

pub fn moment_match_report<T: Real>(
    phi: ArrayView2<T>,
    xi: ArrayView2<T>,
    varfit: &VarFit<T>,
    s_x: ArrayView2<T>,
) -> Result<MomentMatchReport<T>> {
    let cond = condition_1norm(phi);
    if !(cond < T::lit(PHI_CONDITION_LIMIT)) {
        return Err(Error::PhiSingular { condition: cond.as_f64() });
    }
    let phi_inv = inverse(phi).ok_or(Error::PhiSingular { condition: f64::INFINITY })?;
    let s_u = sample_cov(varfit.residuals.view());
    let a = phi_inv.dot(&xi).dot(&s_u);
    let half = T::lit(-0.5);
    let s_zeta = (&a + &a.t()).mapv(|v| v * half);
    let sigma_eta = &s_u + &xi.dot(&s_u).dot(&xi.t()) - &s_zeta - phi.dot(&s_zeta).dot(&phi.t());
    let sigma_eta = crate::linalg::symmetrize(sigma_eta.view());
    let is_szeta_pd = cholesky(s_zeta.view()).is_some();
    let diff = &s_x - &s_zeta;
    let is_sx_minus_szeta_pd = cholesky(diff.view()).is_some();
    Ok(MomentMatchReport { s_zeta, sigma_eta, is_szeta_pd, is_sx_minus_szeta_pd })
}

fn condition_1norm<T: Real>(a: ArrayView2<T>) -> T {
    let norm1 = |m: ArrayView2<T>| m.columns().into_iter().map(|c| c.iter().map(|v| v.abs()).sum::<T>()).fold(T::zero(), T::max);
    match Lu::new(a) {
        Some(lu) => norm1(a) * norm1(lu.inverse().view()),
        None => T::infinity(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityPolicy {
    /// Scale `Phi` to spectral radius 0.995 and flag the model.
    #[default]
    Rescale,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", bound = "T: Real")]
pub enum LambdaChoice<T> {
    Fixed(T),
    /// Cross-validate over the given plan, or the default plan when `None`.
    CrossValidate(Option<CvPlan<T>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MsvOptions<T> {
    pub lags: usize,
    pub family: PenaltyFamily,
    pub shape: T,
    pub lambda: LambdaChoice<T>,
    pub solver: SolverOpts<T>,
    pub zero_policy: ZeroPolicy,
    pub stability: StabilityPolicy,
    pub clamp_split: bool,
    /// Shrink `Phi` until `Sigma_alpha - Phi Sigma_alpha Phi'` is positive
    /// semidefinite, so the stacked state covariance is a valid covariance.
    #[serde(default = "yes")]
    pub enforce_state_psd: bool,
    pub smoother: SmootherOpts<T>,
}

fn yes() -> bool {
    true
}

impl<T: Real> MsvOptions<T> {
    /// Cross-validated fit with the family's default shape.
    pub fn new(lags: usize, family: PenaltyFamily) -> Self {
        Self {
            lags,
            family,
            shape: PenaltySpec::<T>::with_default_shape(family, T::zero()).shape,
            lambda: LambdaChoice::CrossValidate(None),
            solver: SolverOpts::default(),
            zero_policy: ZeroPolicy::default(),
            stability: StabilityPolicy::default(),
            clamp_split: false,
            enforce_state_psd: true,
            smoother: SmootherOpts::default(),
        }
    }

    pub fn with_lambda(mut self, lambda: T) -> Self {
        self.lambda = LambdaChoice::Fixed(lambda);
        self
    }
}

/// Provenance and flags of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ModelMeta<T> {
    pub labels: Vec<String>,
    pub n_obs: usize,
    pub penalty: PenaltyFamily,
    pub lambda: T,
    pub shape: T,
    pub support_size: usize,
    pub var_converged: bool,
    /// Spectral radius of the unadjusted second-step estimate.
    pub raw_spectral_radius: T,
    pub phi_rescaled: bool,
    /// Factor applied to `Phi` to keep the implied state innovation
    /// covariance positive semidefinite, if any.
    #[serde(default)]
    pub psd_shrink: Option<T>,
    pub gamma_ridge: Option<T>,
    pub split_clamped: bool,
    pub cv_grid: Option<Vec<T>>,
    pub cv_curve: Option<Vec<T>>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MsvModel<T> {
    pub version: u32,
    pub kind: String,
    pub p: usize,
    pub m: usize,
    /// Intercept with `(I - Phi) c = c_star`. Equals the second-step
    /// intercept unless `Phi` was scaled, in which case `c` is the sample
    /// mean of the log-squared returns.
    #[serde(with = "crate::serde_mat::vector")]
    pub c_star: Array1<T>,
    #[serde(with = "crate::serde_mat::vector")]
    pub c: Array1<T>,
    #[serde(with = "crate::serde_mat::matrix")]
    pub phi: Array2<T>,
    #[serde(with = "crate::serde_mat::matrix")]
    pub xi: Array2<T>,
    #[serde(with = "crate::serde_mat::matrix")]
    pub sigma_zeta: Array2<T>,
    #[serde(with = "crate::serde_mat::matrix")]
    pub sigma_alpha: Array2<T>,
    #[serde(with = "crate::serde_mat::matrix")]
    pub gamma: Array2<T>,
    #[serde(with = "crate::serde_mat::vector")]
    pub dbar: Array1<T>,
    pub r_split: T,
    pub spectral_radius_phi: T,
    pub meta: ModelMeta<T>,
}

impl<T: Real> MsvModel<T> {
    pub fn p(&self) -> usize {
        self.phi.nrows()
    }

    pub fn to_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn from_json<R: Read>(r: R) -> Result<Self> {
        let model: Self = serde_json::from_reader(r)?;
        model.validate_shapes()?;
        Ok(model)
    }

    fn validate_shapes(&self) -> Result<()> {
        let p = self.p;
        if self.version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported model version {}", self.version)));
        }
        if self.kind != "msv" {
            return Err(Error::Format(format!("expected an msv model, found {:?}", self.kind)));
        }
        let square = [&self.phi, &self.xi, &self.sigma_zeta, &self.sigma_alpha, &self.gamma];
        let vecs = [&self.c_star, &self.c, &self.dbar];
        if square.iter().any(|a| a.dim() != (p, p)) || vecs.iter().any(|v| v.len() != p) {
            return Err(Error::Format("model matrices do not match p".into()));
        }
        Ok(())
    }
}

/// A fitted model with the intermediate results that produced it.
#[derive(Debug, Clone)]
pub struct MsvFit<T> {
    pub model: MsvModel<T>,
    pub var_fit: VarFit<T>,
    pub step2: Step2Fit<T>,
    pub cv: Option<CvResult<T>>,
    pub logsq: LogSqPanel<T>,
    pub smoothed: SmoothedPath<T>,
}

/// Rescales `phi` if its spectral radius is at least one.
fn stabilize<T: Real>(phi: Array2<T>, policy: StabilityPolicy) -> Result<(Array2<T>, T, T, bool)> {
    let rho = spectral_radius(phi.view())
        .ok_or_else(|| Error::UnstableModel("eigenvalues of Phi did not converge".into()))?;
    if rho < T::one() {
        return Ok((phi, rho, rho, false));
    }
    match policy {
        StabilityPolicy::Error => Err(Error::UnstablePhi { radius: rho.as_f64() }),
        StabilityPolicy::Rescale => {
            let target = T::lit(RESCALE_TARGET);
            let scaled = phi.mapv(|v| v * target / rho);
            let rho2 = spectral_radius(scaled.view()).unwrap_or(target);
            Ok((scaled, rho, rho2, true))
        }
    }
}

/// Factor `k < 1` such that `Sigma_alpha - k^2 Phi Sigma_alpha Phi'` is
/// positive semidefinite with `||L^{-1} k Phi L||_2 = 0.995`, where
/// `Sigma_alpha = L L'`; `None` when no shrinkage is needed.
pub fn state_psd_shrink<T: Real>(phi: ArrayView2<T>, sigma_alpha: ArrayView2<T>) -> Result<Option<T>> {
    let l = cholesky(sigma_alpha).ok_or_else(|| Error::UnstableModel("Sigma_alpha is not positive definite".into()))?;
    let linv = inverse(l.view()).ok_or(Error::SingularDesign("state covariance factor"))?;
    let m = linv.dot(&phi).dot(&l);
    let (vals, _) = sym_eigen(m.dot(&m.t()).view());
    let norm = vals.iter().fold(T::zero(), |a, v| a.max(*v)).sqrt();
    if norm < T::one() {
        return Ok(None);
    }
    Ok(Some(T::lit(RESCALE_TARGET) / norm))
}

/// Log-squared transform, sparse VAR, second-step regression, variance
/// split, correlation and scale factors.
pub fn fit_msv<T: Real>(panel: &ReturnPanel<T>, opts: &MsvOptions<T>) -> Result<MsvFit<T>> {
    let logsq = log_square_transform(panel, opts.zero_policy)?;
    fit_msv_logsq(panel, logsq, opts)
}

pub(crate) fn fit_msv_logsq<T: Real>(panel: &ReturnPanel<T>, logsq: LogSqPanel<T>, opts: &MsvOptions<T>) -> Result<MsvFit<T>> {
    let m = opts.lags;
    let (var_fit, cv) = match &opts.lambda {
        LambdaChoice::Fixed(lam) => {
            let spec = PenaltySpec { family: opts.family, lambda: *lam, shape: opts.shape };
            (fit_penalized_var(&logsq, m, &spec, &opts.solver)?, None)
        }
        LambdaChoice::CrossValidate(plan) => {
            let plan = match plan {
                Some(p) => p.clone(),
                None => CvPlan::default_for(&logsq, m)?,
            };
            let (fit, cv) = fit_penalized_var_cv(&logsq, m, opts.family, opts.shape, &plan, &opts.solver)?;
            (fit, Some(cv))
        }
    };
    let step2 = fit_step2(&logsq, &var_fit)?;
    let (phi, raw_rho, rho, rescaled) = stabilize(step2.phi.clone(), opts.stability)?;
    let split = split_variance(&logsq, opts.clamp_split)?;
    let (phi, rho, psd_shrink) = if opts.enforce_state_psd {
        match state_psd_shrink(phi.view(), split.sigma_alpha.view())? {
            Some(k) => {
                let shrunk = phi.mapv(|v| v * k);
                let r = spectral_radius(shrunk.view()).unwrap_or(rho * k);
                (shrunk, r, Some(k))
            }
            None => (phi, rho, None),
        }
    } else {
        (phi, rho, None)
    };
    let p = panel.dim();
    let i_minus_phi = Array2::eye(p) - &phi;
    // The regression intercept belongs to the unadjusted Phi; once Phi has
    // been scaled, the sample mean is the consistent level of the state.
    let (c, c_star) = if rescaled || psd_shrink.is_some() {
        let c = logsq.colmeans.clone();
        (c.clone(), i_minus_phi.dot(&c))
    } else {
        let c = Lu::new(i_minus_phi.view())
            .ok_or_else(|| Error::UnstableModel("I - Phi is singular".into()))?
            .solve(step2.c_star.view());
        (c, step2.c_star.clone())
    };
    let gamma = estimate_gamma(panel)?;
    let mut model = MsvModel {
        version: MODEL_FORMAT_VERSION,
        kind: "msv".into(),
        p,
        m,
        c_star,
        c,
        phi,
        xi: step2.xi.clone(),
        sigma_zeta: split.sigma_zeta,
        sigma_alpha: split.sigma_alpha,
        gamma: gamma.gamma,
        dbar: Array1::zeros(p),
        r_split: split.r,
        spectral_radius_phi: rho,
        meta: ModelMeta {
            labels: panel.labels().to_vec(),
            n_obs: panel.len(),
            penalty: opts.family,
            lambda: var_fit.lambda_used,
            shape: opts.shape,
            support_size: var_fit.support.len(),
            var_converged: var_fit.converged,
            raw_spectral_radius: raw_rho,
            phi_rescaled: rescaled,
            psd_shrink,
            gamma_ridge: gamma.ridge,
            split_clamped: split.clamped,
            cv_grid: cv.as_ref().map(|c| c.grid.clone()),
            cv_curve: cv.as_ref().map(|c| c.curve.clone()),
            seed: None,
        },
    };
    let smoothed = mmsle_smooth(&model, &logsq, &opts.smoother)?;
    model.dbar = scale_factors(panel, smoothed.raw.view())?;
    Ok(MsvFit { model, var_fit, step2, cv, logsq, smoothed })
}

impl<T: Real> MsvFit<T> {
    /// Forecasts for the periods after the fitted sample, reusing the
    /// smoothing already done by the fit.
    pub fn forecast(&self, horizon: usize) -> Result<CovSequence<T>> {
        if horizon == 0 {
            return Err(Error::InvalidArgument("forecast horizon must be at least 1".into()));
        }
        Ok(forecast_from_terminal(&self.model, &self.smoothed.terminal, self.logsq.len(), horizon))
    }

    /// In-sample covariances `D_t Gamma D_t` along the smoothed path.
    pub fn smoothed_covariances(&self) -> CovSequence<T> {
        path_covariances(self.model.gamma.view(), self.model.dbar.view(), self.smoothed.raw.view())
    }

    /// `z_it = y_it / (dbar_i exp(x_it / 2))` for the panel the model was fitted on.
    pub fn standardized(&self, panel: &ReturnPanel<T>) -> Result<Array2<T>> {
        standardized_returns(panel, self.smoothed.raw.view(), self.model.dbar.view())
    }
}

/// Sample covariance of the centered log-squared panel.
pub fn s_x<T: Real>(x: &LogSqPanel<T>) -> Array2<T> {
    sample_cov(x.xcentered.view())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn split_exact_arithmetic() {
        let pi2 = PI * PI;
        let s: Array2<f64> = Array2::eye(3) * pi2;
        let sp = split_covariance(s.view(), false).unwrap();
        assert!((sp.r - 0.5).abs() < 1e-15);
        for (a, b) in sp.sigma_zeta.iter().zip((Array2::<f64>::eye(3) * (pi2 / 2.0)).iter()) {
            assert!((a - b).abs() < 1e-13);
        }
        let boundary: Array2<f64> = Array2::eye(3) * (pi2 / 2.0);
        assert!(matches!(split_covariance(boundary.view(), false), Err(Error::SplitInfeasible { .. })));
        let clamped = split_covariance(boundary.view(), true).unwrap();
        assert!(clamped.clamped && clamped.r == 0.99);
    }

    #[test]
    fn split_trace_twenty() {
        let s = array![[12.0, 3.0], [3.0, 8.0]];
        let sp = split_covariance(s.view(), false).unwrap();
        assert!((sp.r - PI * PI / 20.0).abs() < 1e-15);
        assert!((trace(sp.sigma_zeta.view()) - PI * PI).abs() < 1e-10);
        let sum = &sp.sigma_zeta + &sp.sigma_alpha;
        for (a, b) in sum.iter().zip(s.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_cases() {
        let one = ReturnPanel::from_data(array![[0.1], [-0.3], [0.2]]).unwrap();
        assert_eq!(estimate_gamma(&one).unwrap().gamma, array![[1.0]]);

        let twin = ReturnPanel::from_data(array![[0.1, 0.1], [-0.3, -0.3], [0.2, 0.2], [0.5, 0.5]]).unwrap();
        let g = estimate_gamma(&twin).unwrap();
        assert!(g.ridge.is_some());
        assert!((g.gamma[[0, 1]] - 1.0f64).abs() < 1e-7);
        assert_eq!(g.gamma[[0, 0]], 1.0);
        assert!(min_eigenvalue(g.gamma.view()) >= 1e-8 * 0.999);

        let flat = ReturnPanel::from_data(array![[0.1, 1.0], [-0.3, 1.0], [0.2, 1.0]]).unwrap();
        assert!(matches!(estimate_gamma(&flat), Err(Error::ZeroVarianceColumn(1))));
    }

    #[test]
    fn moment_match_substitution() {
        let fit = VarFit::<f64> {
            psi: Array2::zeros((2, 2)),
            residuals: array![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] * 2f64.sqrt(),
            support: vec![],
            lambda_used: 0.0,
            objective_trace: vec![],
            lags: 1,
            converged: true,
            sweeps: 0,
        };
        // S_u = I
        let eye: Array2<f64> = Array2::eye(2);
        let rep = moment_match_report(eye.view(), (-&eye).view(), &fit, (&eye * 3.0).view()).unwrap();
        for (a, b) in rep.s_zeta.iter().zip(eye.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(rep.is_szeta_pd && rep.is_sx_minus_szeta_pd);
        let zero = Array2::zeros((2, 2));
        let rep0 = moment_match_report(eye.view(), zero.view(), &fit, eye.view()).unwrap();
        assert!(rep0.s_zeta.iter().all(|v| *v == 0.0));
        assert!(matches!(
            moment_match_report(zero.view(), eye.view(), &fit, eye.view()),
            Err(Error::PhiSingular { .. })
        ));
    }

    #[test]
    fn stabilize_policies() {
        let phi: Array2<f64> = array![[1.2, 0.0], [0.0, 0.3]];
        let (s, raw, rho, flag) = stabilize(phi.clone(), StabilityPolicy::Rescale).unwrap();
        assert!(flag && (raw - 1.2).abs() < 1e-12 && (rho - 0.995).abs() < 1e-12);
        assert!((s[[0, 0]] - 0.995).abs() < 1e-12);
        assert!(matches!(stabilize(phi, StabilityPolicy::Error), Err(Error::UnstablePhi { .. })));
    }

    #[test]
    fn state_shrink_restores_psd() {
        let sa: Array2<f64> = array![[1.0, 0.0], [0.0, 0.01]];
        // stable but strongly non-normal relative to Sigma_alpha
        let phi = array![[0.5, 0.0], [0.9, 0.5]];
        let eta = &sa - &phi.dot(&sa).dot(&phi.t());
        assert!(min_eigenvalue(eta.view()) < 0.0);
        let k = state_psd_shrink(phi.view(), sa.view()).unwrap().unwrap();
        assert!(k > 0.0 && k < 1.0);
        let shrunk = phi.mapv(|v| v * k);
        let eta = &sa - &shrunk.dot(&sa).dot(&shrunk.t());
        assert!(min_eigenvalue(eta.view()) > 0.0);
        // weighted norm lands on the target
        let l = cholesky(sa.view()).unwrap();
        let m = inverse(l.view()).unwrap().dot(&shrunk).dot(&l);
        let (vals, _) = sym_eigen(m.dot(&m.t()).view());
        assert!((vals[1].sqrt() - RESCALE_TARGET).abs() < 1e-12);
        assert!(state_psd_shrink(array![[0.5, 0.0], [0.0, 0.5]].view(), sa.view()).unwrap().is_none());
    }

    #[test]
    fn singular_second_step() {
        // zero residual block makes the design rank deficient
        let ylog = LogSqPanel::from_log_series(Array2::from_shape_fn((40, 2), |(t, i)| ((t * 7 + i * 3) % 11) as f64));
        let fit = VarFit::<f64> {
            psi: Array2::zeros((2, 2)),
            residuals: Array2::zeros((39, 2)),
            support: vec![],
            lambda_used: 0.0,
            objective_trace: vec![],
            lags: 1,
            converged: true,
            sweeps: 0,
        };
        assert!(matches!(fit_step2(&ylog, &fit), Err(Error::SingularDesign(_))));
    }
}
