//! Forecast comparison: Frobenius distance to true covariances, global
//! minimum-variance portfolios, Diebold-Mariano tests on squared portfolio
//! returns, the Model Confidence Set and VaR thresholds.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::covseq::CovSequence;
use crate::dgp::replication_rng;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, frobenius_norm};
use crate::scalar::Real;

pub const MIN_DM_PERIODS: usize = 10;
pub const MIN_MCS_PERIODS: usize = 20;
pub const DEFAULT_BOOTSTRAP_REPS: usize = 1000;
pub const DEFAULT_MCS_LEVELS: [f64; 3] = [0.05, 0.10, 0.20];

/// Mean over periods of `||A_t - B_t||_F`.
pub fn frobenius_distance<T: Real>(estimated: &CovSequence<T>, truth: &CovSequence<T>) -> Result<T> {
    if estimated.len() != truth.len() {
        return Err(Error::LengthMismatch { expected: truth.len(), got: estimated.len() });
    }
    if estimated.is_empty() {
        return Err(Error::InvalidArgument("empty covariance sequences".into()));
    }
    if estimated.dim() != truth.dim() {
        return Err(Error::LengthMismatch { expected: truth.dim(), got: estimated.dim() });
    }
    let total: T = estimated
        .matrices
        .iter()
        .zip(&truth.matrices)
        .map(|(a, b)| frobenius_norm((a - b).view()))
        .sum();
    Ok(total / T::from_usize_lossy(truth.len()))
}

/// `H^{-1} 1 / (1' H^{-1} 1)`.
pub fn min_variance_weights<T: Real>(h: ArrayView2<T>) -> Result<Array1<T>> {
    let l = cholesky(h).ok_or(Error::SingularH)?;
    let ones = Array1::from_elem(h.nrows(), T::one());
    let x = cholesky_solve(l.view(), ones.view());
    let s = x.sum();
    if !(s > T::zero()) || !s.is_finite() {
        return Err(Error::SingularH);
    }
    Ok(x / s)
}

pub fn portfolio_variance<T: Real>(h: ArrayView2<T>, w: ArrayView1<T>) -> T {
    w.dot(&h.dot(&w))
}

/// Squared portfolio returns `(w_t' eps_t)^2`.
pub fn squared_portfolio_returns<T: Real>(returns: ArrayView2<T>, weights: ArrayView2<T>) -> Result<Array1<T>> {
    if returns.dim() != weights.dim() {
        return Err(Error::LengthMismatch { expected: returns.nrows(), got: weights.nrows() });
    }
    Ok(returns
        .rows()
        .into_iter()
        .zip(weights.rows())
        .map(|(e, w)| {
            let r = e.dot(&w);
            r * r
        })
        .collect())
}

/// `u_t = (w_i' eps_t)^2 - (w_j' eps_t)^2`.
pub fn loss_differential<T: Real>(
    returns: ArrayView2<T>,
    weights_i: ArrayView2<T>,
    weights_j: ArrayView2<T>,
) -> Result<Array1<T>> {
    let a = squared_portfolio_returns(returns, weights_i)?;
    let b = squared_portfolio_returns(returns, weights_j)?;
    Ok(a - b)
}

/// Bandwidth `floor(1.5 h^{1/3})`.
pub fn default_hac_lag(h: usize) -> usize {
    (1.5 * (h as f64).cbrt()).floor() as usize
}

/// Bartlett-kernel long-run variance of `u`.
pub fn newey_west_variance(u: &[f64], lag: usize) -> f64 {
    let n = u.len() as f64;
    let mean = u.iter().sum::<f64>() / n;
    let dev: Vec<f64> = u.iter().map(|v| v - mean).collect();
    let gamma = |k: usize| dev[k..].iter().zip(&dev).map(|(a, b)| a * b).sum::<f64>() / n;
    let mut s = gamma(0);
    for k in 1..=lag.min(u.len().saturating_sub(1)) {
        s += 2.0 * (1.0 - k as f64 / (lag as f64 + 1.0)) * gamma(k);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmResult {
    pub statistic: f64,
    pub p_value: f64,
    pub mean_u: f64,
}

/// Diebold-Mariano statistic `sqrt(h) ubar / sqrt(lrv)` on a given loss
/// differential with a two-sided normal p-value.
pub fn dm_statistic(u: &[f64], hac_lag: usize) -> Result<DmResult> {
    if u.len() < 2 {
        return Err(Error::InsufficientSample { needed: 1, got: u.len() });
    }
    let first = u[0];
    if u.iter().all(|v| *v == first) {
        return Err(Error::DegenerateVariance);
    }
    let n = u.len() as f64;
    let mean_u = u.iter().sum::<f64>() / n;
    let lrv = newey_west_variance(u, hac_lag);
    if !(lrv > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let statistic = n.sqrt() * mean_u / lrv.sqrt();
    let p_value = 2.0 * standard_normal().cdf(-statistic.abs());
    Ok(DmResult { statistic, p_value, mean_u })
}

/// DM test of portfolio `i` against `j`; positive statistics mean `i` has
/// the larger squared returns. `hac_lag = None` uses [`default_hac_lag`].
pub fn dm_test<T: Real>(
    returns: ArrayView2<T>,
    weights_i: ArrayView2<T>,
    weights_j: ArrayView2<T>,
    hac_lag: Option<usize>,
) -> Result<DmResult> {
    let h = returns.nrows();
    if h < MIN_DM_PERIODS {
        return Err(Error::InsufficientSample { needed: MIN_DM_PERIODS - 1, got: h });
    }
    let u: Vec<f64> = loss_differential(returns, weights_i, weights_j)?.iter().map(|v| v.as_f64()).collect();
    dm_statistic(&u, hac_lag.unwrap_or_else(|| default_hac_lag(h)))
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Aligned covariance forecasts from several models over one evaluation
/// window, plus the realized returns of that window.
#[derive(Debug, Clone)]
pub struct ForecastSet<T> {
    names: Vec<String>,
    forecasts: Vec<CovSequence<T>>,
    returns: Array2<T>,
}

impl<T: Real> ForecastSet<T> {
    pub fn new(names: Vec<String>, forecasts: Vec<CovSequence<T>>, returns: Array2<T>) -> Result<Self> {
        if names.len() != forecasts.len() {
            return Err(Error::LengthMismatch { expected: names.len(), got: forecasts.len() });
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::InvalidArgument(format!("duplicate model name `{n}`")));
            }
        }
        let (h, p) = returns.dim();
        for f in &forecasts {
            if f.len() != h {
                return Err(Error::LengthMismatch { expected: h, got: f.len() });
            }
            if f.dim() != p {
                return Err(Error::LengthMismatch { expected: p, got: f.dim() });
            }
        }
        Ok(Self { names, forecasts, returns })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn forecasts(&self) -> &[CovSequence<T>] {
        &self.forecasts
    }

    pub fn returns(&self) -> ArrayView2<'_, T> {
        self.returns.view()
    }

    pub fn periods(&self) -> usize {
        self.returns.nrows()
    }

    /// Minimum-variance weights for model `k`, one row per period.
    pub fn weights(&self, k: usize) -> Result<Array2<T>> {
        let (h, p) = self.returns.dim();
        let mut w = Array2::zeros((h, p));
        for (t, m) in self.forecasts[k].matrices.iter().enumerate() {
            w.row_mut(t).assign(&min_variance_weights(m.view())?);
        }
        Ok(w)
    }

    /// `h x M` squared portfolio returns, the loss fed to the MCS.
    pub fn losses(&self) -> Result<Array2<T>> {
        let mut out = Array2::zeros((self.periods(), self.names.len()));
        for k in 0..self.names.len() {
            let w = self.weights(k)?;
            out.column_mut(k).assign(&squared_portfolio_returns(self.returns.view(), w.view())?);
        }
        Ok(out)
    }

    /// Pairwise DM results; the diagonal is `None`.
    pub fn dm_matrix(&self, hac_lag: Option<usize>) -> Result<Vec<Vec<Option<DmResult>>>> {
        let weights = (0..self.names.len()).map(|k| self.weights(k)).collect::<Result<Vec<_>>>()?;
        let m = weights.len();
        let mut out = vec![vec![None; m]; m];
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    out[i][j] = Some(dm_test(self.returns.view(), weights[i].view(), weights[j].view(), hac_lag)?);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McsStatistic {
    /// Largest absolute studentized pairwise loss difference.
    Range,
    /// Sum of squared studentized pairwise loss differences.
    #[default]
    SemiQuadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsOpts {
    pub statistic: McsStatistic,
    pub bootstrap_reps: usize,
    /// Defaults to `floor(h^{1/3})`.
    pub block_len: Option<usize>,
    pub levels: Vec<f64>,
    pub seed: u64,
}

impl Default for McsOpts {
    fn default() -> Self {
        Self {
            statistic: McsStatistic::default(),
            bootstrap_reps: DEFAULT_BOOTSTRAP_REPS,
            block_len: None,
            levels: DEFAULT_MCS_LEVELS.to_vec(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsResult {
    /// MCS p-value of each model, indexed like the loss columns.
    pub p_values: Vec<f64>,
    /// Models in the order they left the set; the survivor is last.
    pub elimination_order: Vec<usize>,
    /// `(level, models with p-value >= level)`, levels ascending.
    pub included: Vec<(f64, Vec<usize>)>,
}

/// Circular block bootstrap means: `reps x M`.
fn bootstrap_means(losses: &Array2<f64>, reps: usize, block: usize, seed: u64) -> Array2<f64> {
    let (h, m) = losses.dim();
    let rows: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|b| {
            let mut rng = replication_rng(seed, b as u64);
            let mut acc = vec![0.0; m];
            let mut taken = 0;
            while taken < h {
                let start = rng.random_range(0..h);
                for k in 0..block.min(h - taken) {
                    let row = losses.row((start + k) % h);
                    for (a, v) in acc.iter_mut().zip(row) {
                        *a += v;
                    }
                }
                taken += block;
            }
            acc.iter().map(|a| a / h as f64).collect()
        })
        .collect();
    Array2::from_shape_fn((reps, m), |(b, i)| rows[b][i])
}

/// Model Confidence Set on an `h x M` loss matrix (smaller is better).
pub fn mcs<T: Real>(losses: ArrayView2<T>, opts: &McsOpts) -> Result<McsResult> {
    let (h, m) = losses.dim();
    if m < 2 {
        return Err(Error::InvalidArgument("the MCS needs at least two models".into()));
    }
    if h < MIN_MCS_PERIODS {
        return Err(Error::InsufficientSample { needed: MIN_MCS_PERIODS - 1, got: h });
    }
    if opts.bootstrap_reps == 0 {
        return Err(Error::InvalidArgument("bootstrap_reps must be positive".into()));
    }
    if opts.levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
        return Err(Error::InvalidArgument("MCS levels must lie in (0, 1)".into()));
    }
    let block = opts.block_len.unwrap_or_else(|| ((h as f64).cbrt().floor() as usize).max(1));
    if block == 0 || block > h {
        return Err(Error::InvalidArgument(format!("block length {block} outside 1..={h}")));
    }
    let losses = losses.mapv(|v| v.as_f64());
    let lbar = losses.mean_axis(ndarray::Axis(0)).expect("nonempty");
    let boot = bootstrap_means(&losses, opts.bootstrap_reps, block, opts.seed);
    let reps = opts.bootstrap_reps as f64;

    let mut alive: Vec<usize> = (0..m).collect();
    let mut p_values = vec![1.0; m];
    let mut order = Vec::with_capacity(m);
    let mut running = 0.0f64;
    while alive.len() > 1 {
        let k = alive.len();
        // studentized pairwise differences and their bootstrap null draws
        let mut stat = 0.0f64;
        let mut null = vec![0.0f64; opts.bootstrap_reps];
        let mut worst_pair = vec![f64::NEG_INFINITY; k];
        for a in 0..k {
            for c in 0..k {
                if a == c {
                    continue;
                }
                let (i, j) = (alive[a], alive[c]);
                let d = lbar[i] - lbar[j];
                let var = boot.rows().into_iter().map(|r| (r[i] - r[j] - d).powi(2)).sum::<f64>() / reps;
                let t = if var > 0.0 { d / var.sqrt() } else { 0.0 };
                worst_pair[a] = worst_pair[a].max(t);
                if a < c || opts.statistic == McsStatistic::Range {
                    match opts.statistic {
                        McsStatistic::SemiQuadratic => stat += t * t,
                        McsStatistic::Range => stat = stat.max(t.abs()),
                    }
                    if var > 0.0 {
                        let sd = var.sqrt();
                        for (nb, r) in null.iter_mut().zip(boot.rows()) {
                            let tb = (r[i] - r[j] - d) / sd;
                            match opts.statistic {
                                McsStatistic::SemiQuadratic => *nb += tb * tb,
                                McsStatistic::Range => *nb = nb.max(tb.abs()),
                            }
                        }
                    }
                }
            }
        }
        let p = null.iter().filter(|v| **v >= stat).count() as f64 / reps;
        let out = match opts.statistic {
            McsStatistic::Range => argmax(&worst_pair),
            McsStatistic::SemiQuadratic => {
                // model-versus-average statistics
                let mut ti = vec![0.0f64; k];
                for a in 0..k {
                    let i = alive[a];
                    let avg = |r: ArrayView1<f64>| alive.iter().map(|&j| r[i] - r[j]).sum::<f64>() / k as f64;
                    let d = avg(lbar.view());
                    let var = boot.rows().into_iter().map(|r| (avg(r) - d).powi(2)).sum::<f64>() / reps;
                    ti[a] = if var > 0.0 { d / var.sqrt() } else { 0.0 };
                }
                argmax(&ti)
            }
        };
        running = running.max(p);
        let model = alive.remove(out);
        p_values[model] = running;
        order.push(model);
    }
    order.push(alive[0]);
    let mut levels = opts.levels.clone();
    levels.sort_by(f64::total_cmp);
    let included = levels
        .into_iter()
        .map(|l| (l, (0..m).filter(|&i| p_values[i] >= l).collect()))
        .collect();
    Ok(McsResult { p_values, elimination_order: order, included })
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuantileSource {
    Normal,
    /// Empirical distribution of past standardized portfolio returns.
    Historical { sample: Vec<f64> },
}

/// Linear-interpolation empirical quantile of a sample.
pub fn empirical_quantile(sample: &[f64], q: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument("empty sample for the historical quantile".into()));
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = q * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(s.len() - 1);
    Ok(s[lo] + (pos - lo as f64) * (s[hi] - s[lo]))
}

/// `-tau_q sqrt(h_p)` where `tau_q` is the lower `q` quantile.
pub fn var_threshold<T: Real>(h_p: T, q: f64, source: &QuantileSource) -> Result<T> {
    if !(h_p > T::zero()) {
        return Err(Error::InvalidArgument("portfolio variance must be positive".into()));
    }
    if !(q > 0.0 && q <= 0.5) {
        return Err(Error::InvalidArgument(format!("tail probability {q} outside (0, 0.5]")));
    }
    let tau = match source {
        QuantileSource::Normal => standard_normal().inverse_cdf(q),
        QuantileSource::Historical { sample } => empirical_quantile(sample, q)?,
    };
    Ok(T::lit(-tau) * h_p.sqrt())
}
