//! Linear smoothing and forecasting of the log-volatility path.
//!
//! The stacked state covariance `V_alpha` has blocks `Phi^{s-t} Sigma_alpha`
//! below the diagonal and their transposes above it; the noise covariance is
//! block diagonal `I_T (x) Sigma_zeta`. Stacked vectors are stored as `T x p`
//! arrays, one row per period.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::covseq::{CovKind, CovSequence};
use crate::error::{Error, Result};
use crate::estimator::MsvModel;
use crate::linalg::{cholesky, spectral_radius};
use crate::panel::{LogSqPanel, ReturnPanel};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveBackend {
    DenseCholesky,
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SmootherOpts<T> {
    /// Largest `p T` solved by a dense factorization when no backend is forced.
    pub dense_threshold: usize,
    /// Relative residual at which conjugate gradients stop.
    pub cg_tol: T,
    pub cg_max_iter: usize,
    pub backend: Option<SolveBackend>,
}

impl<T: Real> Default for SmootherOpts<T> {
    fn default() -> Self {
        Self { dense_threshold: 4000, cg_tol: T::lit(1e-10), cg_max_iter: 20_000, backend: None }
    }
}

impl<T: Real> SmootherOpts<T> {
    pub fn backend_for(&self, size: usize) -> SolveBackend {
        self.backend.unwrap_or(if size <= self.dense_threshold {
            SolveBackend::DenseCholesky
        } else {
            SolveBackend::ConjugateGradient
        })
    }
}

/// Stacked covariance of `T` consecutive observations of the state-space form.
#[derive(Debug, Clone)]
pub struct StackedCov<T> {
    pub phi: Array2<T>,
    pub sigma_alpha: Array2<T>,
    pub sigma_zeta: Array2<T>,
    pub horizon: usize,
    pub backend: SolveBackend,
}

impl<T: Real> StackedCov<T> {
    pub fn new(
        phi: Array2<T>,
        sigma_alpha: Array2<T>,
        sigma_zeta: Array2<T>,
        horizon: usize,
        opts: &SmootherOpts<T>,
    ) -> Self {
        let backend = opts.backend_for(phi.nrows() * horizon);
        Self { phi, sigma_alpha, sigma_zeta, horizon, backend }
    }

    pub fn from_model(model: &MsvModel<T>, horizon: usize, opts: &SmootherOpts<T>) -> Self {
        Self::new(model.phi.clone(), model.sigma_alpha.clone(), model.sigma_zeta.clone(), horizon, opts)
    }

    pub fn dim(&self) -> usize {
        self.phi.nrows()
    }

    /// `V_alpha v` together with the last forward accumulator
    /// `sum_t Phi^{T-1-t} Sigma_alpha v_t`.
    fn alpha_apply(&self, v: ArrayView2<T>) -> (Array2<T>, Array1<T>) {
        let n = self.horizon;
        let p = self.dim();
        let sv = v.dot(&self.sigma_alpha.t());
        // forward: F_s = Phi F_{s-1} + Sigma_alpha v_s
        let mut out = Array2::zeros((n, p));
        let mut f = Array1::zeros(p);
        for s in 0..n {
            f = self.phi.dot(&f) + sv.row(s);
            out.row_mut(s).assign(&f);
        }
        // backward: B_s = Phi' (v_{s+1} + B_{s+1}), contributes Sigma_alpha B_s
        let mut b: Array1<T> = Array1::zeros(p);
        let mut back = Array2::zeros((n, p));
        for s in (0..n.saturating_sub(1)).rev() {
            b = self.phi.t().dot(&(&v.row(s + 1) + &b));
            back.row_mut(s).assign(&b);
        }
        out.scaled_add(T::one(), &back.dot(&self.sigma_alpha.t()));
        (out, f)
    }

    pub fn alpha_matvec(&self, v: ArrayView2<T>) -> Array2<T> {
        self.alpha_apply(v).0
    }

    /// `V_x v = V_alpha v + (I (x) Sigma_zeta) v`.
    pub fn matvec(&self, v: ArrayView2<T>) -> Array2<T> {
        self.alpha_matvec(v) + v.dot(&self.sigma_zeta.t())
    }

    /// Dense `pT x pT` matrix `V_alpha`.
    pub fn dense_alpha(&self) -> Array2<T> {
        let n = self.horizon;
        let p = self.dim();
        let mut out = Array2::zeros((n * p, n * p));
        let scale = self.sigma_alpha.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let floor = scale * T::epsilon() * T::epsilon();
        let mut power = self.sigma_alpha.clone();
        for lag in 0..n {
            if lag > 0 {
                power = self.phi.dot(&power);
                if power.iter().all(|v| v.abs() <= floor) {
                    break;
                }
            }
            for t in 0..n - lag {
                let s = t + lag;
                for i in 0..p {
                    for j in 0..p {
                        out[[s * p + i, t * p + j]] = power[[i, j]];
                        out[[t * p + j, s * p + i]] = power[[i, j]];
                    }
                }
            }
        }
        out
    }

    /// Dense `pT x pT` matrix `V_x`.
    pub fn dense(&self) -> Array2<T> {
        let mut out = self.dense_alpha();
        let p = self.dim();
        for t in 0..self.horizon {
            let mut blk = out.slice_mut(ndarray::s![t * p..(t + 1) * p, t * p..(t + 1) * p]);
            blk.scaled_add(T::one(), &self.sigma_zeta);
        }
        out
    }
}

/// Solves `V_x s = rhs` for a stacked right-hand side of length `pT`.
pub fn vx_solve<T: Real>(stack: &StackedCov<T>, rhs: ArrayView1<T>, opts: &SmootherOpts<T>) -> Result<Array1<T>> {
    let p = stack.dim();
    if rhs.len() != p * stack.horizon {
        return Err(Error::LengthMismatch { expected: p * stack.horizon, got: rhs.len() });
    }
    let v = rhs.to_owned().into_shape_with_order((stack.horizon, p)).expect("length checked");
    let s = solve_blocks(stack, v.view(), opts)?;
    Ok(s.into_shape_with_order(p * stack.horizon).expect("same length"))
}

fn solve_blocks<T: Real>(stack: &StackedCov<T>, v: ArrayView2<T>, opts: &SmootherOpts<T>) -> Result<Array2<T>> {
    match stack.backend {
        SolveBackend::DenseCholesky => {
            let dense = stack.dense();
            let l = cholesky(dense.view())
                .ok_or_else(|| Error::SolverFailure("stacked covariance is not positive definite".into()))?;
            let flat = v.to_owned().into_shape_with_order(v.len()).expect("contiguous");
            let sol = crate::linalg::cholesky_solve(l.view(), flat.view());
            Ok(sol.into_shape_with_order(v.raw_dim()).expect("same length"))
        }
        SolveBackend::ConjugateGradient => conjugate_gradient(stack, v, opts),
    }
}

fn dot<T: Real>(a: &Array2<T>, b: &Array2<T>) -> T {
    Zip::from(a).and(b).fold(T::zero(), |acc, &x, &y| acc + x * y)
}

/// Jacobi-preconditioned conjugate gradients with the structured product.
fn conjugate_gradient<T: Real>(stack: &StackedCov<T>, b: ArrayView2<T>, opts: &SmootherOpts<T>) -> Result<Array2<T>> {
    let diag = (&stack.sigma_alpha + &stack.sigma_zeta).diag().to_owned();
    if diag.iter().any(|d| !(*d > T::zero())) {
        return Err(Error::SolverFailure("non-positive diagonal in stacked covariance".into()));
    }
    let inv_diag = diag.mapv(|d| T::one() / d).insert_axis(Axis(0));
    let b = b.to_owned();
    let bnorm = dot(&b, &b).sqrt();
    let mut x = Array2::zeros(b.raw_dim());
    if bnorm == T::zero() {
        return Ok(x);
    }
    let mut r = b.clone();
    let mut z = &r * &inv_diag;
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..opts.cg_max_iter {
        let ad = stack.matvec(d.view());
        let curv = dot(&d, &ad);
        if !(curv > T::zero()) {
            return Err(Error::SolverFailure("stacked covariance is not positive definite".into()));
        }
        let step = rz / curv;
        x.scaled_add(step, &d);
        r.scaled_add(-step, &ad);
        if dot(&r, &r).sqrt() <= opts.cg_tol * bnorm {
            return Ok(x);
        }
        z = &r * &inv_diag;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        d = &z + &(d * beta);
    }
    Err(Error::SolverFailure(format!(
        "conjugate gradients did not reach relative residual {} in {} iterations",
        opts.cg_tol, opts.cg_max_iter
    )))
}

/// Smoothed log-volatility path.
#[derive(Debug, Clone)]
pub struct SmoothedPath<T> {
    /// `V_alpha V_x^{-1} (y^l - c)`, the state-scale path used for scaling.
    pub raw: Array2<T>,
    /// `raw + c`.
    pub shifted: Array2<T>,
    /// `sum_t Phi^{T-1-t} Sigma_alpha s_t`, the seed of every forecast.
    pub terminal: Array1<T>,
}

fn check_stable<T: Real>(model: &MsvModel<T>) -> Result<()> {
    let rho = spectral_radius(model.phi.view())
        .ok_or_else(|| Error::UnstableModel("eigenvalues of Phi did not converge".into()))?;
    if !(rho < T::one()) {
        return Err(Error::UnstableModel(format!("spectral radius of Phi is {rho}")));
    }
    Ok(())
}

/// Minimum mean square linear estimate of the state path given all of `ylog`.
pub fn mmsle_smooth<T: Real>(model: &MsvModel<T>, ylog: &LogSqPanel<T>, opts: &SmootherOpts<T>) -> Result<SmoothedPath<T>> {
    check_stable(model)?;
    let p = model.p();
    if ylog.dim() != p {
        return Err(Error::LengthMismatch { expected: p, got: ylog.dim() });
    }
    let stack = StackedCov::from_model(model, ylog.len(), opts);
    let v = &ylog.ylog - &model.c.view().insert_axis(Axis(0));
    let s = solve_blocks(&stack, v.view(), opts)?;
    let (raw, terminal) = stack.alpha_apply(s.view());
    let shifted = &raw + &model.c.view().insert_axis(Axis(0));
    Ok(SmoothedPath { raw, shifted, terminal })
}

/// `dbar_i = sqrt(T^{-1} sum_t y_it^2 exp(-x_it))`.
pub fn scale_factors<T: Real>(panel: &ReturnPanel<T>, xsmooth: ArrayView2<T>) -> Result<Array1<T>> {
    let y = panel.data();
    if y.dim() != xsmooth.dim() {
        return Err(Error::LengthMismatch { expected: y.len(), got: xsmooth.len() });
    }
    let n = T::from_usize_lossy(y.nrows());
    let mut acc: Array1<T> = Array1::zeros(y.ncols());
    Zip::from(y.rows()).and(xsmooth.rows()).for_each(|yr, xr| {
        Zip::from(&mut acc).and(yr).and(xr).for_each(|a, &yy, &xx| *a = *a + yy * yy * (-xx).exp());
    });
    Ok(acc.mapv(|a| (a / n).sqrt()))
}

/// `z_it = y_it / (dbar_i exp(x_it / 2))`; each column has unit mean square
/// when `dbar` comes from [`scale_factors`] on the same inputs.
pub fn standardized_returns<T: Real>(
    panel: &ReturnPanel<T>,
    xsmooth: ArrayView2<T>,
    dbar: ArrayView1<T>,
) -> Result<Array2<T>> {
    let y = panel.data();
    if y.dim() != xsmooth.dim() {
        return Err(Error::LengthMismatch { expected: y.len(), got: xsmooth.len() });
    }
    if dbar.len() != y.ncols() {
        return Err(Error::LengthMismatch { expected: y.ncols(), got: dbar.len() });
    }
    let half = T::lit(0.5);
    let mut z = y.to_owned();
    Zip::from(z.rows_mut()).and(xsmooth.rows()).for_each(|mut zr, xr| {
        Zip::from(&mut zr).and(xr).and(dbar).for_each(|v, &xx, &db| *v = *v / (db * (xx * half).exp()));
    });
    Ok(z)
}

/// `D Gamma D` with `D = diag(d)`.
pub fn scaled_correlation<T: Real>(gamma: ArrayView2<T>, d: ArrayView1<T>) -> Array2<T> {
    let mut h = gamma.to_owned();
    for ((i, j), v) in h.indexed_iter_mut() {
        *v = *v * (d[i] * d[j]);
    }
    h
}

/// Scale factors and the smoothed covariances `H_t = D_t Gamma D_t` with
/// `d_it = dbar_i exp(x_it / 2)`.
pub fn build_smoothed_covariances<T: Real>(
    model: &MsvModel<T>,
    panel: &ReturnPanel<T>,
    xsmooth: ArrayView2<T>,
) -> Result<(Array1<T>, CovSequence<T>)> {
    let dbar = scale_factors(panel, xsmooth)?;
    let covs = path_covariances(model.gamma.view(), dbar.view(), xsmooth);
    Ok((dbar, covs))
}

pub(crate) fn path_covariances<T: Real>(gamma: ArrayView2<T>, dbar: ArrayView1<T>, xsmooth: ArrayView2<T>) -> CovSequence<T> {
    let half = T::lit(0.5);
    let mats = xsmooth
        .rows()
        .into_iter()
        .map(|x| {
            let d = Zip::from(dbar).and(x).map_collect(|&db, &xx| db * (xx * half).exp());
            scaled_correlation(gamma, d.view())
        })
        .collect();
    CovSequence::new(CovKind::Smoothed, 1, mats)
}

/// State forecasts `alpha_{T+l} = Phi^l g + c` for `l = 1..=horizon`, one per row.
pub fn forecast_states<T: Real>(
    model: &MsvModel<T>,
    ylog: &LogSqPanel<T>,
    horizon: usize,
    opts: &SmootherOpts<T>,
) -> Result<Array2<T>> {
    let path = mmsle_smooth(model, ylog, opts)?;
    Ok(states_from_terminal(model, &path.terminal, horizon))
}

fn states_from_terminal<T: Real>(model: &MsvModel<T>, terminal: &Array1<T>, horizon: usize) -> Array2<T> {
    let mut out = Array2::zeros((horizon, model.p()));
    let mut x = terminal.clone();
    for l in 0..horizon {
        x = model.phi.dot(&x);
        out.row_mut(l).assign(&(&x + &model.c));
    }
    out
}

/// Forecast covariances for `T+1 ..= T+horizon` from one solve of `V_x`.
pub fn forecast<T: Real>(
    model: &MsvModel<T>,
    ylog: &LogSqPanel<T>,
    horizon: usize,
    opts: &SmootherOpts<T>,
) -> Result<CovSequence<T>> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("forecast horizon must be at least 1".into()));
    }
    let path = mmsle_smooth(model, ylog, opts)?;
    Ok(forecast_from_terminal(model, &path.terminal, ylog.len(), horizon))
}

pub(crate) fn forecast_from_terminal<T: Real>(
    model: &MsvModel<T>,
    terminal: &Array1<T>,
    sample_len: usize,
    horizon: usize,
) -> CovSequence<T> {
    let states = states_from_terminal(model, terminal, horizon);
    let half = T::lit(0.5);
    let mats = states
        .rows()
        .into_iter()
        .map(|a| {
            let d = Zip::from(&model.dbar).and(a).and(&model.c).map_collect(|&db, &aa, &cc| db * ((aa - cc) * half).exp());
            scaled_correlation(model.gamma.view(), d.view())
        })
        .collect();
    CovSequence::new(CovKind::Forecast, sample_len + 1, mats)
}
