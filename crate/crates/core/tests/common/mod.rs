#![allow(dead_code)]

use msv_core::dgp::{simulate, DgpKind, DgpSpec, MsvParams};
use msv_core::estimator::{fit_msv, MsvModel, MsvOptions};
use msv_core::penalty::PenaltyFamily;
use msv_core::panel::ReturnPanel;
use ndarray::{array, Array1, Array2};

/// Gauss-Jordan inverse with partial pivoting, kept separate from the
/// library's factorizations on purpose.
pub fn inv(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut out = Array2::<f64>::eye(n);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[[i, col]].abs().total_cmp(&m[[j, col]].abs())).unwrap();
        for k in 0..n {
            m.swap([col, k], [piv, k]);
            out.swap([col, k], [piv, k]);
        }
        let d = m[[col, col]];
        for k in 0..n {
            m[[col, k]] /= d;
            out[[col, k]] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[[r, col]];
                for k in 0..n {
                    m[[r, k]] -= f * m[[col, k]];
                    out[[r, k]] -= f * out[[col, k]];
                }
            }
        }
    }
    out
}

/// Kalman filter plus Rauch-Tung-Striebel smoother for
/// `s_t = Phi s_{t-1} + eta_t`, `x_t = s_t + zeta_t`, started from the
/// stationary law `s_0 ~ (0, Sigma_alpha)` with
/// `Sigma_eta = Sigma_alpha - Phi Sigma_alpha Phi'`.
pub fn kalman_smooth(phi: &Array2<f64>, sigma_alpha: &Array2<f64>, sigma_zeta: &Array2<f64>, x: &Array2<f64>) -> Array2<f64> {
    let (n, p) = x.dim();
    let sigma_eta = sigma_alpha - &phi.dot(sigma_alpha).dot(&phi.t());
    let mut a_pred: Vec<Array1<f64>> = Vec::with_capacity(n);
    let mut p_pred: Vec<Array2<f64>> = Vec::with_capacity(n);
    let mut a_filt: Vec<Array1<f64>> = Vec::with_capacity(n);
    let mut p_filt: Vec<Array2<f64>> = Vec::with_capacity(n);
    let mut a = Array1::<f64>::zeros(p);
    let mut pm = sigma_alpha.clone();
    for t in 0..n {
        if t > 0 {
            a = phi.dot(&a_filt[t - 1]);
            pm = phi.dot(&p_filt[t - 1]).dot(&phi.t()) + &sigma_eta;
        }
        a_pred.push(a.clone());
        p_pred.push(pm.clone());
        let f = &pm + sigma_zeta;
        let k = pm.dot(&inv(&f));
        let innov = &x.row(t) - &a;
        a_filt.push(&a + &k.dot(&innov));
        p_filt.push(&pm - &k.dot(&pm));
    }
    let mut out = Array2::zeros((n, p));
    out.row_mut(n - 1).assign(&a_filt[n - 1]);
    for t in (0..n - 1).rev() {
        let j = p_filt[t].dot(&phi.t()).dot(&inv(&p_pred[t + 1]));
        let next = out.row(t + 1).to_owned();
        let v = &a_filt[t] + &j.dot(&(&next - &a_pred[t + 1]));
        out.row_mut(t).assign(&v);
    }
    out
}

/// Kalman predictor `E[s_{T+l} | x] = Phi^l E[s_T | x]`, one row per step.
pub fn kalman_forecast(phi: &Array2<f64>, smoothed_last: &Array1<f64>, horizon: usize) -> Array2<f64> {
    let mut out = Array2::zeros((horizon, phi.nrows()));
    let mut s = smoothed_last.clone();
    for l in 0..horizon {
        s = phi.dot(&s);
        out.row_mut(l).assign(&s);
    }
    out
}

pub fn msv_panel(p: usize, t: usize, seed: u64, rep: u64) -> ReturnPanel<f64> {
    let mut spec = DgpSpec::new(DgpKind::Msv, p, t, seed).replication(rep);
    spec.overrides.msv = Some(MsvParams::diagonal(p, 0.95, 0.3));
    simulate(&spec).unwrap().panel
}

/// A fitted two-asset model whose dynamics are then replaced by fixed,
/// well-conditioned values.
pub fn fixed_model() -> MsvModel<f64> {
    let panel = msv_panel(2, 600, 17, 0);
    let opts = MsvOptions::new(2, PenaltyFamily::Lasso).with_lambda(0.0);
    let mut model = fit_msv(&panel, &opts).unwrap().model;
    model.phi = array![[0.7, 0.1], [-0.05, 0.5]];
    model.sigma_alpha = array![[1.2, 0.3], [0.3, 0.9]];
    model.sigma_zeta = array![[4.9, 0.4], [0.4, 4.9]];
    model.c = array![-1.1, -0.4];
    model
}
