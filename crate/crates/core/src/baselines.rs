//! Reference multivariate GARCH models: GARCH(1,1) margins, constant and
//! scalar dynamic conditional correlation, and orthogonal GARCH.
//!
//! Likelihoods are evaluated in `f64` whatever the scalar type of the data.

use std::io::{Read, Write};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covseq::{CovKind, CovSequence};
use crate::error::{Error, Result};
use crate::estimator::{floor_correlation, MODEL_FORMAT_VERSION};
use crate::linalg::{cholesky, cov_to_corr, sample_cov, sym_eigen};
use crate::optim::{bfgs, BfgsOpts};
use crate::panel::ReturnPanel;
use crate::scalar::Real;

/// Upper bound on `alpha + beta` (and `a + b`) imposed by the parametrization.
pub const PERSISTENCE_CAP: f64 = 0.999;
pub const MIN_GARCH_OBS: usize = 50;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GarchFit<T> {
    pub omega: T,
    pub alpha: T,
    pub beta: T,
    pub loglik: T,
    /// In-sample conditional variances; the first is the sample variance.
    #[serde(with = "crate::serde_mat::vector")]
    pub h_path: Array1<T>,
    /// One-step-ahead variance after the last observation.
    pub h_next: T,
    /// Estimate sits on (numerically) the edge of the parameter space.
    pub boundary: bool,
    pub converged: bool,
}

impl<T: Real> GarchFit<T> {
    /// `h_{T+l}` for `l = 1..=horizon`.
    pub fn forecast(&self, horizon: usize) -> Vec<T> {
        let pers = self.alpha + self.beta;
        let mut h = self.h_next;
        let mut out = Vec::with_capacity(horizon);
        for l in 0..horizon {
            if l > 0 {
                h = self.omega + pers * h;
            }
            out.push(h);
        }
        out
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// `(omega, alpha, beta)` from unconstrained `theta`.
fn garch_params(theta: &[f64]) -> (f64, f64, f64) {
    let s = PERSISTENCE_CAP * logistic(theta[1]);
    let alpha = s * logistic(theta[2]);
    (theta[0].exp(), alpha, s - alpha)
}

fn garch_theta(omega: f64, alpha: f64, beta: f64) -> [f64; 3] {
    let s = alpha + beta;
    [omega.ln(), logit(s / PERSISTENCE_CAP), logit(alpha / s)]
}

fn variance(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Conditional variances `h_0 = h0`, `h_t = omega + alpha y_{t-1}^2 + beta h_{t-1}`,
/// plus the one-step-ahead value.
fn garch_filter(y: &[f64], h0: f64, omega: f64, alpha: f64, beta: f64) -> (Vec<f64>, f64) {
    let mut h = Vec::with_capacity(y.len());
    let mut cur = h0;
    for &v in y {
        h.push(cur);
        cur = omega + alpha * v * v + beta * cur;
    }
    (h, cur)
}

fn garch_loglik_f64(y: &[f64], h0: f64, omega: f64, alpha: f64, beta: f64) -> f64 {
    let (h, _) = garch_filter(y, h0, omega, alpha, beta);
    -0.5 * y.iter().zip(&h).map(|(v, hh)| LN_2PI + hh.ln() + v * v / hh).sum::<f64>()
}

/// Gaussian log-likelihood of a GARCH(1,1) with `h_0` equal to the sample variance.
pub fn garch_loglik<T: Real>(series: ArrayView1<T>, omega: T, alpha: T, beta: T) -> T {
    let y: Vec<f64> = series.iter().map(|v| v.as_f64()).collect();
    T::lit(garch_loglik_f64(&y, variance(&y), omega.as_f64(), alpha.as_f64(), beta.as_f64()))
}

/// Mean negative log-likelihood and its gradient in `theta`.
fn garch_objective(theta: &[f64], y: &[f64], h0: f64) -> (f64, Vec<f64>) {
    let (omega, alpha, beta) = garch_params(theta);
    let n = y.len() as f64;
    let (mut dw, mut da, mut db) = (0.0, 0.0, 0.0);
    let (mut gw, mut ga, mut gb) = (0.0, 0.0, 0.0);
    let mut h = h0;
    let mut f = 0.0;
    for (t, &v) in y.iter().enumerate() {
        if t > 0 {
            let prev = y[t - 1];
            let hp = h;
            h = omega + alpha * prev * prev + beta * hp;
            dw = 1.0 + beta * dw;
            da = prev * prev + beta * da;
            db = hp + beta * db;
        }
        if !(h > 0.0) || !h.is_finite() {
            return (f64::INFINITY, vec![0.0; 3]);
        }
        let r = v * v / h;
        f += h.ln() + r;
        // d/dh of (ln h + y^2 / h)
        let dh = (1.0 - r) / h;
        gw += dh * dw;
        ga += dh * da;
        gb += dh * db;
    }
    let scale = 0.5 / n;
    let (gw, ga, gb) = (gw * scale, ga * scale, gb * scale);
    let s1 = logistic(theta[1]);
    let s2 = logistic(theta[2]);
    let s = PERSISTENCE_CAP * s1;
    let ds_1 = PERSISTENCE_CAP * s1 * (1.0 - s1);
    let da_1 = ds_1 * s2;
    let da_2 = s * s2 * (1.0 - s2);
    let grad = vec![gw * omega, ga * da_1 + gb * (ds_1 - da_1), ga * da_2 - gb * da_2];
    (f * scale, grad)
}

/// Gaussian QML fit of a GARCH(1,1) from three starting points.
pub fn fit_garch11<T: Real>(series: ArrayView1<T>) -> Result<GarchFit<T>> {
    let y: Vec<f64> = series.iter().map(|v| v.as_f64()).collect();
    if y.len() < MIN_GARCH_OBS {
        return Err(Error::InsufficientSample { needed: MIN_GARCH_OBS - 1, got: y.len() });
    }
    let h0 = variance(&y);
    if !(h0 > 0.0) {
        return Err(Error::OptimFailure("series has zero sample variance".into()));
    }
    let opts = BfgsOpts::default();
    let mut best: Option<crate::optim::BfgsResult> = None;
    for (a, b) in [(0.05, 0.90), (0.10, 0.60), (0.02, 0.20)] {
        let start = garch_theta(h0 * (1.0 - a - b), a, b);
        let r = bfgs(|th| garch_objective(th, &y, h0), &start, &opts);
        if r.f.is_finite() && best.as_ref().is_none_or(|b| r.f < b.f) {
            best = Some(r);
        }
    }
    let best = best.ok_or_else(|| Error::OptimFailure("GARCH likelihood not finite at any start".into()))?;
    let (omega, alpha, beta) = garch_params(&best.x);
    let (h, h_next) = garch_filter(&y, h0, omega, alpha, beta);
    let boundary = alpha < 1e-6 || beta < 1e-6 || alpha + beta > PERSISTENCE_CAP - 1e-6;
    Ok(GarchFit {
        omega: T::lit(omega),
        alpha: T::lit(alpha),
        beta: T::lit(beta),
        loglik: T::lit(garch_loglik_f64(&y, h0, omega, alpha, beta)),
        h_path: h.into_iter().map(T::lit).collect(),
        h_next: T::lit(h_next),
        boundary,
        converged: best.converged,
    })
}

fn fit_margins<T: Real>(data: ArrayView2<T>) -> Result<Vec<GarchFit<T>>> {
    (0..data.ncols()).into_par_iter().map(|i| fit_garch11(data.column(i))).collect()
}

/// `y_t / sqrt(h_t)` column by column.
fn standardize<T: Real>(data: ArrayView2<T>, margins: &[GarchFit<T>]) -> Array2<T> {
    let mut u = data.to_owned();
    for (i, g) in margins.iter().enumerate() {
        let mut col = u.column_mut(i);
        for (v, h) in col.iter_mut().zip(g.h_path.iter()) {
            *v = *v / h.sqrt();
        }
    }
    u
}

fn dcd<T: Real>(r: ArrayView2<T>, h: &[T]) -> Array2<T> {
    let d: Array1<T> = h.iter().map(|v| v.sqrt()).collect();
    crate::linalg::symmetrize(crate::smoother::scaled_correlation(r, d.view()).view())
}

/// Constant conditional correlation with GARCH(1,1) margins, estimated in two steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CccModel<T> {
    pub margins: Vec<GarchFit<T>>,
    #[serde(with = "crate::serde_mat::matrix")]
    pub r: Array2<T>,
    pub n_obs: usize,
}

/// Scalar DCC with correlation targeting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DccModel<T> {
    pub margins: Vec<GarchFit<T>>,
    pub a: T,
    pub b: T,
    #[serde(with = "crate::serde_mat::matrix")]
    pub qbar: Array2<T>,
    /// `Q_{T+1}`.
    #[serde(with = "crate::serde_mat::matrix")]
    pub q_next: Array2<T>,
    pub loglik: T,
    pub n_obs: usize,
}

/// Orthogonal GARCH: `H_t = P diag(h_t) P'` with GARCH(1,1) principal components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct OgarchModel<T> {
    #[serde(with = "crate::serde_mat::matrix")]
    pub loadings: Array2<T>,
    pub components: Vec<GarchFit<T>>,
    pub n_obs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", bound = "T: Real")]
pub enum BaselineModel<T> {
    Ccc(CccModel<T>),
    Dcc(DccModel<T>),
    Ogarch(OgarchModel<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct BaselineFile<T> {
    version: u32,
    #[serde(flatten)]
    model: BaselineModel<T>,
}

impl<T: Real> BaselineModel<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ccc(_) => "ccc",
            Self::Dcc(_) => "dcc",
            Self::Ogarch(_) => "ogarch",
        }
    }

    pub fn to_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, &BaselineFile { version: MODEL_FORMAT_VERSION, model: self.clone() })?;
        Ok(())
    }

    pub fn from_json<R: Read>(r: R) -> Result<Self> {
        let file: BaselineFile<T> = serde_json::from_reader(r)?;
        if file.version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported model version {}", file.version)));
        }
        Ok(file.model)
    }
}

/// A fitted baseline and its in-sample conditional covariances.
#[derive(Debug, Clone)]
pub struct BaselineFit<T> {
    pub model: BaselineModel<T>,
    pub fitted: CovSequence<T>,
}

pub fn fit_ccc<T: Real>(panel: &ReturnPanel<T>) -> Result<BaselineFit<T>> {
    let margins = fit_margins(panel.data())?;
    let u = standardize(panel.data(), &margins);
    let corr = cov_to_corr(sample_cov(u.view()).view()).map_err(Error::ZeroVarianceColumn)?;
    let r = floor_correlation(corr).gamma;
    let fitted = (0..panel.len())
        .map(|t| {
            let h: Vec<T> = margins.iter().map(|g| g.h_path[t]).collect();
            dcd(r.view(), &h)
        })
        .collect();
    Ok(BaselineFit {
        model: BaselineModel::Ccc(CccModel { margins, r, n_obs: panel.len() }),
        fitted: CovSequence::new(CovKind::Fitted, 1, fitted),
    })
}

/// `Q* ^{-1/2} Q Q* ^{-1/2}`.
fn normalize_q(q: &Array2<f64>) -> Array2<f64> {
    let d: Vec<f64> = q.diag().iter().map(|v| 1.0 / v.sqrt()).collect();
    let mut r = q.clone();
    for ((i, j), v) in r.indexed_iter_mut() {
        *v = if i == j { 1.0 } else { *v * d[i] * d[j] };
    }
    r
}

/// Runs the correlation recursion; returns the `R_t` path, `Q_{T+1}` and
/// the correlation part of the log-likelihood.
fn dcc_filter(u: &Array2<f64>, qbar: &Array2<f64>, a: f64, b: f64, keep_path: bool) -> (Vec<Array2<f64>>, Array2<f64>, f64) {
    let p = qbar.nrows();
    let mut q = qbar.clone();
    let mut path = Vec::new();
    let mut ll = 0.0;
    let c = 1.0 - a - b;
    for t in 0..u.nrows() {
        let r = normalize_q(&q);
        let ut = u.row(t);
        match cholesky(r.view()) {
            Some(l) => {
                let logdet: f64 = 2.0 * l.diag().iter().map(|v| v.ln()).sum::<f64>();
                let z = crate::linalg::cholesky_solve(l.view(), ut);
                ll -= 0.5 * (logdet + ut.dot(&z) - ut.dot(&ut));
            }
            None => ll = f64::NEG_INFINITY,
        }
        if keep_path {
            path.push(r);
        }
        let mut next = qbar.mapv(|v| v * c);
        for i in 0..p {
            for j in 0..p {
                next[[i, j]] += a * ut[i] * ut[j] + b * q[[i, j]];
            }
        }
        q = next;
    }
    (path, q, ll)
}

fn objective_at(u: &Array2<f64>, qbar: &Array2<f64>, a: f64, b: f64) -> f64 {
    -dcc_filter(u, qbar, a, b, false).2 / u.nrows() as f64
}

fn dcc_params(theta: &[f64]) -> (f64, f64) {
    let s = PERSISTENCE_CAP * logistic(theta[0]);
    let a = s * logistic(theta[1]);
    (a, s - a)
}

pub fn fit_dcc_scalar<T: Real>(panel: &ReturnPanel<T>) -> Result<BaselineFit<T>> {
    let margins = fit_margins(panel.data())?;
    let u = standardize(panel.data(), &margins).mapv(|v| v.as_f64());
    let corr = cov_to_corr(sample_cov(u.view()).view()).map_err(Error::ZeroVarianceColumn)?;
    let qbar = floor_correlation(corr).gamma;
    let objective = |th: &[f64]| {
        let (a, b) = dcc_params(th);
        objective_at(&u, &qbar, a, b)
    };
    let with_grad = |th: &[f64]| {
        let f = objective(th);
        let eps = 1e-5;
        let g = (0..2)
            .map(|k| {
                let mut hi = th.to_vec();
                let mut lo = th.to_vec();
                hi[k] += eps;
                lo[k] -= eps;
                (objective(&hi) - objective(&lo)) / (2.0 * eps)
            })
            .collect();
        (f, g)
    };
    let opts = BfgsOpts { grad_tol: 1e-6, ..Default::default() };
    let mut best: Option<crate::optim::BfgsResult> = None;
    for (a, b) in [(0.02, 0.95), (0.05, 0.85), (0.01, 0.50)] {
        let s: f64 = a + b;
        let start = [logit(s / PERSISTENCE_CAP), logit(a / s)];
        let r = bfgs(with_grad, &start, &opts);
        if r.f.is_finite() && best.as_ref().is_none_or(|b| r.f < b.f) {
            best = Some(r);
        }
    }
    let best = best.ok_or_else(|| Error::OptimFailure("DCC likelihood not finite at any start".into()))?;
    let (mut a, mut b) = dcc_params(&best.x);
    // a = 0 is only reached in the limit of the parametrization; compare
    // against constant correlation directly.
    if objective_at(&u, &qbar, 0.0, 0.0) <= best.f {
        (a, b) = (0.0, 0.0);
    }
    Ok(dcc_from_params(panel, margins, &u, qbar, a, b))
}

fn dcc_from_params<T: Real>(
    panel: &ReturnPanel<T>,
    margins: Vec<GarchFit<T>>,
    u: &Array2<f64>,
    qbar: Array2<f64>,
    a: f64,
    b: f64,
) -> BaselineFit<T> {
    let (path, q_next, ll) = dcc_filter(u, &qbar, a, b, true);
    let fitted = path
        .iter()
        .enumerate()
        .map(|(t, r)| {
            let h: Vec<T> = margins.iter().map(|g| g.h_path[t]).collect();
            dcd(r.mapv(T::lit).view(), &h)
        })
        .collect();
    BaselineFit {
        model: BaselineModel::Dcc(DccModel {
            margins,
            a: T::lit(a),
            b: T::lit(b),
            qbar: qbar.mapv(T::lit),
            q_next: q_next.mapv(T::lit),
            loglik: T::lit(ll),
            n_obs: panel.len(),
        }),
        fitted: CovSequence::new(CovKind::Fitted, 1, fitted),
    }
}

/// DCC with fixed `(a, b)` on top of freshly fitted margins.
pub fn dcc_with_params<T: Real>(panel: &ReturnPanel<T>, a: f64, b: f64) -> Result<BaselineFit<T>> {
    if !(a >= 0.0 && b >= 0.0 && a + b < 1.0) {
        return Err(Error::InvalidArgument("DCC parameters need a, b >= 0 and a + b < 1".into()));
    }
    let margins = fit_margins(panel.data())?;
    let u = standardize(panel.data(), &margins).mapv(|v| v.as_f64());
    let corr = cov_to_corr(sample_cov(u.view()).view()).map_err(Error::ZeroVarianceColumn)?;
    let qbar = floor_correlation(corr).gamma;
    Ok(dcc_from_params(panel, margins, &u, qbar, a, b))
}

pub fn fit_ogarch<T: Real>(panel: &ReturnPanel<T>) -> Result<BaselineFit<T>> {
    let cov = sample_cov(panel.data());
    let (_, vecs) = sym_eigen(cov.view());
    // largest component first
    let p = panel.dim();
    let loadings = Array2::from_shape_fn((p, p), |(i, j)| vecs[[i, p - 1 - j]]);
    let factors = panel.data().dot(&loadings);
    let components = fit_margins(factors.view())?;
    let fitted = (0..panel.len())
        .map(|t| {
            let h: Array1<T> = components.iter().map(|g| g.h_path[t]).collect();
            rotate(&loadings, &h)
        })
        .collect();
    Ok(BaselineFit {
        model: BaselineModel::Ogarch(OgarchModel { loadings, components, n_obs: panel.len() }),
        fitted: CovSequence::new(CovKind::Fitted, 1, fitted),
    })
}

fn rotate<T: Real>(p: &Array2<T>, h: &Array1<T>) -> Array2<T> {
    let scaled = p * &h.view().insert_axis(Axis(0));
    crate::linalg::symmetrize(scaled.dot(&p.t()).view())
}

/// Covariance forecasts for `T+1 ..= T+horizon`. The first step is exact;
/// later steps iterate the variance recursion with squared shocks replaced
/// by their expectation and, for DCC, `u u'` replaced by `R`.
pub fn forecast_baseline<T: Real>(model: &BaselineModel<T>, horizon: usize) -> CovSequence<T> {
    let margin_paths = |ms: &[GarchFit<T>]| -> Vec<Vec<T>> { ms.iter().map(|g| g.forecast(horizon)).collect() };
    let (n_obs, mats) = match model {
        BaselineModel::Ccc(m) => {
            let hs = margin_paths(&m.margins);
            let mats = (0..horizon)
                .map(|l| dcd(m.r.view(), &hs.iter().map(|h| h[l]).collect::<Vec<_>>()))
                .collect();
            (m.n_obs, mats)
        }
        BaselineModel::Dcc(m) => {
            let hs = margin_paths(&m.margins);
            let c = T::one() - m.a - m.b;
            let mut q = m.q_next.clone();
            let mut mats = Vec::with_capacity(horizon);
            for l in 0..horizon {
                let r = normalize_q(&q.mapv(|v| v.as_f64())).mapv(T::lit);
                mats.push(dcd(r.view(), &hs.iter().map(|h| h[l]).collect::<Vec<_>>()));
                q = &m.qbar.mapv(|v| v * c) + &r.mapv(|v| v * m.a) + &q.mapv(|v| v * m.b);
            }
            (m.n_obs, mats)
        }
        BaselineModel::Ogarch(m) => {
            let hs = margin_paths(&m.components);
            let mats = (0..horizon)
                .map(|l| rotate(&m.loadings, &hs.iter().map(|h| h[l]).collect::<Array1<T>>()))
                .collect();
            (m.n_obs, mats)
        }
    };
    CovSequence::new(CovKind::Forecast, n_obs + 1, mats)
}
