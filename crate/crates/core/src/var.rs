//! Sparse VAR(m) fitting by penalized least squares.
//!
//! Each equation of the VAR is an independent penalized regression of one
//! column of `x_t` on the stacked lags `Z_{m,t-1}`. The solver is cyclic
//! coordinate descent on the Gram matrix `Z'Z / n` using the exact
//! univariate minimizer of each penalty; SCAD and MCP fits start from the
//! LASSO solution at the same level.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{LagStack, LogSqPanel};
use crate::penalty::{PenaltyFamily, PenaltySpec};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SolverOpts<T> {
    /// Stop when the largest coefficient change of a sweep is at most this.
    pub tol: T,
    pub max_sweeps: usize,
    /// Turn a non-converged fit into [`Error::NoConvergence`] instead of
    /// returning the last iterate with `converged = false`.
    pub strict: bool,
}

impl<T: Real> Default for SolverOpts<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-8), max_sweeps: 1000, strict: false }
    }
}

/// Output of the first estimation step.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct VarFit<T> {
    /// `p x (p m)` coefficients `[Psi_1 ... Psi_m]`.
    pub psi: Array2<T>,
    /// `(T - m) x p` residuals, row `k` belonging to time `m + k`.
    pub residuals: Array2<T>,
    /// Nonzero coefficient positions `(row, col)` of `psi`.
    pub support: Vec<(usize, usize)>,
    pub lambda_used: T,
    /// Total objective after each sweep.
    pub objective_trace: Vec<T>,
    pub lags: usize,
    pub converged: bool,
    pub sweeps: usize,
}

impl<T: Real> VarFit<T> {
    pub fn dim(&self) -> usize {
        self.psi.nrows()
    }
}

/// Second moments of a lag-stacked design.
#[derive(Debug, Clone)]
pub(crate) struct Moments<T> {
    /// `Z'Z / n`
    gram: Array2<T>,
    /// `Z'X / n`, one column per equation.
    cross: Array2<T>,
    /// `diag(X'X) / n`
    resp_sq: Array1<T>,
}

impl<T: Real> Moments<T> {
    pub(crate) fn new(z: ArrayView2<T>, x: ArrayView2<T>) -> Self {
        let n = T::from_usize_lossy(z.nrows());
        let gram = z.t().dot(&z).mapv(|v| v / n);
        let cross = z.t().dot(&x).mapv(|v| v / n);
        let resp_sq = x.map_axis(Axis(0), |c| c.dot(&c) / n);
        Self { gram, cross, resp_sq }
    }

    /// Smallest `lambda` for which the all-zero coefficient matrix is a
    /// LASSO solution.
    pub(crate) fn lambda_max(&self) -> T {
        self.cross.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

struct RowSolution<T> {
    beta: Array1<T>,
    trace: Vec<T>,
    converged: bool,
    max_change: T,
}

/// Coordinate descent for one equation starting from `beta`.
fn solve_row<T: Real>(
    gram: ArrayView2<T>,
    cross: ArrayView1<T>,
    resp_sq: T,
    spec: &PenaltySpec<T>,
    mut beta: Array1<T>,
    opts: &SolverOpts<T>,
) -> RowSolution<T> {
    let d = beta.len();
    let half = T::lit(0.5);
    // r = c - G beta
    let mut r = &cross - &gram.dot(&beta);
    let objective = |beta: &Array1<T>, r: &Array1<T>| {
        let quad: T = beta.iter().zip(cross.iter().zip(r.iter())).map(|(&b, (&c, &rr))| b * (c + rr)).sum();
        let pen: T = beta.iter().map(|&b| spec.value(b)).sum();
        half * resp_sq - half * quad + pen
    };
    let mut trace = Vec::new();
    let mut converged = false;
    let mut max_change = T::infinity();
    let gram_slice = gram.as_slice();
    for _ in 0..opts.max_sweeps {
        max_change = T::zero();
        for j in 0..d {
            let w = gram[[j, j]];
            if !(w > T::zero()) {
                continue;
            }
            let old = beta[j];
            let z = old + r[j] / w;
            let new = spec.univariate_minimizer(z, w);
            let delta = new - old;
            if delta != T::zero() {
                beta[j] = new;
                match gram_slice {
                    Some(g) => {
                        let row = &g[j * d..(j + 1) * d];
                        for (rk, &gk) in r.iter_mut().zip(row) {
                            *rk = *rk - gk * delta;
                        }
                    }
                    None => r.scaled_add(-delta, &gram.row(j)),
                }
                max_change = max_change.max(delta.abs());
            }
        }
        trace.push(objective(&beta, &r));
        if max_change <= opts.tol {
            converged = true;
            break;
        }
    }
    RowSolution { beta, trace, converged, max_change }
}

/// Penalized fit of every equation, optionally warm-started.
///
/// SCAD and MCP are initialized at the LASSO solution for the same level,
/// itself warm-started from `warm` when given.
struct EquationFits<T> {
    psi: Array2<T>,
    lasso_psi: Array2<T>,
    trace: Vec<T>,
    converged: bool,
    sweeps: usize,
    max_change: T,
}

fn fit_equations<T: Real>(
    mom: &Moments<T>,
    spec: &PenaltySpec<T>,
    opts: &SolverOpts<T>,
    warm_lasso: Option<&Array2<T>>,
    rows: std::ops::Range<usize>,
) -> EquationFits<T> {
    let d = mom.gram.nrows();
    let nrows = rows.len();
    let mut psi = Array2::zeros((nrows, d));
    let mut lasso_psi = Array2::zeros((nrows, d));
    let mut traces = Vec::with_capacity(nrows);
    let mut converged = true;
    let mut max_change = T::zero();
    let lasso = PenaltySpec::lasso(spec.lambda);
    for (k, i) in rows.enumerate() {
        let start = warm_lasso.map_or_else(|| Array1::zeros(d), |w| w.row(k).to_owned());
        let cross = mom.cross.column(i);
        let first = solve_row(mom.gram.view(), cross, mom.resp_sq[i], &lasso, start, opts);
        lasso_psi.row_mut(k).assign(&first.beta);
        let sol = if spec.family == PenaltyFamily::Lasso {
            first
        } else {
            solve_row(mom.gram.view(), cross, mom.resp_sq[i], spec, first.beta, opts)
        };
        converged &= sol.converged;
        max_change = max_change.max(sol.max_change);
        psi.row_mut(k).assign(&sol.beta);
        traces.push(sol.trace);
    }
    let sweeps = traces.iter().map(Vec::len).max().unwrap_or(0);
    let trace = (0..sweeps)
        .map(|s| traces.iter().filter(|t| !t.is_empty()).map(|t| t[s.min(t.len() - 1)]).sum())
        .collect();
    EquationFits { psi, lasso_psi, trace, converged, sweeps, max_change }
}

fn residuals<T: Real>(stack: &LagStack<T>, psi: ArrayView2<T>) -> Array2<T> {
    &stack.responses - &stack.regressors.dot(&psi.t())
}

fn support_of<T: Real>(psi: ArrayView2<T>) -> Vec<(usize, usize)> {
    psi.indexed_iter().filter(|(_, v)| **v != T::zero()).map(|(ix, _)| ix).collect()
}

fn check_sample(n: usize, m: usize, p: usize) -> Result<()> {
    if n <= m + p {
        return Err(Error::InsufficientSample { needed: m + p, got: n });
    }
    Ok(())
}

/// Fits `x_t = Psi Z_{m,t-1} + u_t` by minimizing
/// `(1 / 2n) sum ||x_t - Psi Z_{m,t-1}||^2 + sum p(lambda, |Psi_ij|)`
/// with `n = T - m`.
pub fn fit_penalized_var<T: Real>(
    x: &LogSqPanel<T>,
    m: usize,
    spec: &PenaltySpec<T>,
    opts: &SolverOpts<T>,
) -> Result<VarFit<T>> {
    spec.validate()?;
    check_sample(x.len(), m, x.dim())?;
    let stack = x.lag_stack(m)?;
    let mom = Moments::new(stack.regressors.view(), stack.responses.view());
    let fits = fit_equations(&mom, spec, opts, None, 0..x.dim());
    finish_fit(&stack, fits, spec, opts)
}

fn finish_fit<T: Real>(
    stack: &LagStack<T>,
    fits: EquationFits<T>,
    spec: &PenaltySpec<T>,
    opts: &SolverOpts<T>,
) -> Result<VarFit<T>> {
    if !fits.converged && opts.strict {
        return Err(Error::NoConvergence { sweeps: fits.sweeps, max_change: fits.max_change.as_f64() });
    }
    let residuals = residuals(stack, fits.psi.view());
    Ok(VarFit {
        support: support_of(fits.psi.view()),
        residuals,
        psi: fits.psi,
        lambda_used: spec.lambda,
        objective_trace: fits.trace,
        lags: stack.lags,
        converged: fits.converged,
        sweeps: fits.sweeps,
    })
}

/// Fits only equation `row`; identical to the matching row of the joint fit.
pub fn fit_single_equation<T: Real>(
    x: &LogSqPanel<T>,
    m: usize,
    row: usize,
    spec: &PenaltySpec<T>,
    opts: &SolverOpts<T>,
) -> Result<Array1<T>> {
    spec.validate()?;
    check_sample(x.len(), m, x.dim())?;
    if row >= x.dim() {
        return Err(Error::InvalidArgument(format!("equation {row} out of range")));
    }
    let stack = x.lag_stack(m)?;
    let mom = Moments::new(stack.regressors.view(), stack.responses.view());
    let fits = fit_equations(&mom, spec, opts, None, row..row + 1);
    Ok(fits.psi.row(0).to_owned())
}

/// Blocked time-series cross-validation plan. Test blocks are contiguous;
/// `gap` rows on each side of a test block are dropped from training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CvPlan<T> {
    pub n_folds: usize,
    pub gap: usize,
    /// Strictly descending, nonnegative.
    pub lambda_grid: Vec<T>,
}

pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_GRID_LEN: usize = 50;
pub const DEFAULT_GRID_RATIO: f64 = 1e-4;

impl<T: Real> CvPlan<T> {
    /// 5 folds, `gap = m`, 50 log-spaced levels from `lambda_max` down to
    /// `1e-4 lambda_max`, where `lambda_max` zeroes every LASSO coefficient on
    /// the full sample.
    pub fn default_for(x: &LogSqPanel<T>, m: usize) -> Result<Self> {
        let stack = x.lag_stack(m)?;
        let mom = Moments::new(stack.regressors.view(), stack.responses.view());
        Ok(Self {
            n_folds: DEFAULT_FOLDS,
            gap: m,
            lambda_grid: log_grid(mom.lambda_max(), DEFAULT_GRID_LEN, T::lit(DEFAULT_GRID_RATIO)),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_folds < 2 {
            return Err(Error::DegenerateFolds(format!("need at least 2 folds, got {}", self.n_folds)));
        }
        if self.lambda_grid.is_empty() {
            return Err(Error::InvalidArgument("empty lambda grid".into()));
        }
        if self.lambda_grid.iter().any(|l| !(*l >= T::zero()) || !l.is_finite()) {
            return Err(Error::InvalidArgument("lambda grid entries must be finite and >= 0".into()));
        }
        if self.lambda_grid.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::InvalidArgument("lambda grid must be strictly descending".into()));
        }
        Ok(())
    }
}

/// `len` log-spaced values from `hi` down to `ratio * hi`.
pub fn log_grid<T: Real>(hi: T, len: usize, ratio: T) -> Vec<T> {
    if len == 1 {
        return vec![hi];
    }
    let step = ratio.ln() / T::from_usize_lossy(len - 1);
    (0..len).map(|k| hi * (step * T::from_usize_lossy(k)).exp()).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CvResult<T> {
    pub lambda_star: T,
    /// Mean out-of-block squared one-step prediction error per grid level.
    pub curve: Vec<T>,
    pub grid: Vec<T>,
}

/// hv-block cross-validation over the plan's grid. Returns the level with
/// the lowest mean test error; ties go to the larger level.
pub fn hv_cross_validate<T: Real>(
    x: &LogSqPanel<T>,
    m: usize,
    family: PenaltyFamily,
    shape: T,
    plan: &CvPlan<T>,
    opts: &SolverOpts<T>,
) -> Result<CvResult<T>> {
    plan.validate()?;
    let p = x.dim();
    let stack = x.lag_stack(m)?;
    let n = stack.regressors.nrows();
    let d = p * m;
    let fold_len = n / plan.n_folds;
    if fold_len == 0 {
        return Err(Error::DegenerateFolds(format!("{n} rows cannot fill {} folds", plan.n_folds)));
    }
    let mut curve = vec![T::zero(); plan.lambda_grid.len()];
    for k in 0..plan.n_folds {
        let a = k * fold_len;
        let b = if k + 1 == plan.n_folds { n } else { a + fold_len };
        let train: Vec<usize> = (0..a.saturating_sub(plan.gap)).chain((b + plan.gap).min(n)..n).collect();
        if train.len() <= d + 1 {
            return Err(Error::DegenerateFolds(format!(
                "fold {k} keeps {} training rows, need more than {}",
                train.len(),
                d + 1
            )));
        }
        let ztr = stack.regressors.select(Axis(0), &train);
        let xtr = stack.responses.select(Axis(0), &train);
        let mom = Moments::new(ztr.view(), xtr.view());
        let zte = stack.regressors.slice(s![a..b, ..]);
        let xte = stack.responses.slice(s![a..b, ..]);
        let denom = T::from_usize_lossy((b - a) * p);
        let mut warm: Option<Array2<T>> = None;
        for (g, &lam) in plan.lambda_grid.iter().enumerate() {
            let spec = PenaltySpec { family, lambda: lam, shape };
            spec.validate()?;
            let fits = fit_equations(&mom, &spec, opts, warm.as_ref(), 0..p);
            let err = &xte - &zte.dot(&fits.psi.t());
            curve[g] = curve[g] + err.iter().map(|e| *e * *e).sum::<T>() / denom;
            warm = Some(fits.lasso_psi);
        }
    }
    let folds = T::from_usize_lossy(plan.n_folds);
    for c in curve.iter_mut() {
        *c = *c / folds;
    }
    let mut best = 0;
    for g in 1..curve.len() {
        if curve[g] < curve[best] {
            best = g;
        }
    }
    Ok(CvResult { lambda_star: plan.lambda_grid[best], curve, grid: plan.lambda_grid.clone() })
}

/// Cross-validates the level, then refits on the full sample.
pub fn fit_penalized_var_cv<T: Real>(
    x: &LogSqPanel<T>,
    m: usize,
    family: PenaltyFamily,
    shape: T,
    plan: &CvPlan<T>,
    opts: &SolverOpts<T>,
) -> Result<(VarFit<T>, CvResult<T>)> {
    let cv = hv_cross_validate(x, m, family, shape, plan, opts)?;
    let spec = PenaltySpec { family, lambda: cv.lambda_star, shape };
    let fit = fit_penalized_var(x, m, &spec, opts)?;
    Ok((fit, cv))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktViolation<T> {
    pub row: usize,
    pub col: usize,
    pub coefficient: T,
    /// Gradient of the least-squares loss at this coefficient.
    pub gradient: T,
    /// Amount by which the stationarity condition is missed, beyond `tol`.
    pub excess: T,
}

#[derive(Debug, Clone)]
pub struct KktReport<T> {
    pub violations: Vec<KktViolation<T>>,
    /// Largest stationarity residual over all coordinates.
    pub max_residual: T,
}

impl<T> KktReport<T> {
    pub fn is_satisfied(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies first-order conditions of a fit, recomputing the loss gradient
/// from the data. Active coordinates need `|grad + p'(|psi|) sign(psi)| <= tol`,
/// inactive ones `|grad| <= p'(0+) + tol`.
pub fn kkt_check<T: Real>(fit: &VarFit<T>, x: &LogSqPanel<T>, spec: &PenaltySpec<T>, tol: T) -> Result<KktReport<T>> {
    let stack = x.lag_stack(fit.lags)?;
    let n = T::from_usize_lossy(stack.regressors.nrows());
    let resid = residuals(&stack, fit.psi.view());
    // d loss / d psi_ij = -(1/n) sum_t u_ti z_tj
    let grad = resid.t().dot(&stack.regressors).mapv(|v| -v / n);
    let mut violations = Vec::new();
    let mut max_residual = T::zero();
    let slope0 = spec.derivative_unchecked(T::zero());
    for ((row, col), &g) in grad.indexed_iter() {
        let coef = fit.psi[[row, col]];
        let residual = if coef != T::zero() {
            (g + spec.derivative_unchecked(coef) * coef.signum()).abs()
        } else {
            (g.abs() - slope0).max(T::zero())
        };
        max_residual = max_residual.max(residual);
        if residual > tol {
            violations.push(KktViolation { row, col, coefficient: coef, gradient: g, excess: residual - tol });
        }
    }
    Ok(KktReport { violations, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Lu;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn simulate_var1(psi0: &Array2<f64>, n: usize, seed: u64) -> LogSqPanel<f64> {
        let p = psi0.nrows();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut x = Array2::zeros((n + 100, p));
        for t in 1..n + 100 {
            let prev = x.row(t - 1).to_owned();
            let mean = psi0.dot(&prev);
            for i in 0..p {
                let e: f64 = StandardNormal.sample(&mut rng);
                x[[t, i]] = mean[i] + e;
            }
        }
        LogSqPanel::from_log_series(x.slice(s![100.., ..]).to_owned())
    }

    fn ols_oracle(x: &LogSqPanel<f64>, m: usize) -> Array2<f64> {
        let st = x.lag_stack(m).unwrap();
        let ztz = st.regressors.t().dot(&st.regressors);
        let ztx = st.regressors.t().dot(&st.responses);
        Lu::new(ztz.view()).unwrap().solve_mat(ztx.view()).t().to_owned()
    }

    #[test]
    fn zero_lambda_is_ols() {
        let psi0 = array![[0.5, 0.1], [0.0, 0.4]];
        let x = simulate_var1(&psi0, 300, 3);
        for family in [PenaltyFamily::Lasso, PenaltyFamily::Scad, PenaltyFamily::Mcp] {
            let spec = PenaltySpec::with_default_shape(family, 0.0);
            let opts = SolverOpts { tol: 1e-13, ..Default::default() };
            let fit = fit_penalized_var(&x, 2, &spec, &opts).unwrap();
            let ols = ols_oracle(&x, 2);
            for (a, b) in fit.psi.iter().zip(ols.iter()) {
                assert!((a - b).abs() < 1e-8, "{a} vs {b}");
            }
            // residuals orthogonal to the regressors
            let st = x.lag_stack(2).unwrap();
            let orth = st.regressors.t().dot(&fit.residuals) / st.regressors.nrows() as f64;
            assert!(orth.iter().all(|v| v.abs() < 1e-8));
            let report = kkt_check(&fit, &x, &spec, 1e-6).unwrap();
            assert!(report.is_satisfied());
        }
    }

    #[test]
    fn huge_lambda_gives_zero_model() {
        let psi0 = array![[0.5, 0.0], [0.0, 0.4]];
        let x = simulate_var1(&psi0, 200, 4);
        let spec = PenaltySpec::with_default_shape(PenaltyFamily::Scad, 1e6);
        let fit = fit_penalized_var(&x, 1, &spec, &SolverOpts::default()).unwrap();
        assert!(fit.psi.iter().all(|v| *v == 0.0));
        assert!(fit.support.is_empty());
        assert_eq!(fit.residuals, x.xcentered.slice(s![1.., ..]));
        assert!(kkt_check(&fit, &x, &spec, 1e-6).unwrap().is_satisfied());
    }

    #[test]
    fn residual_identity_and_support() {
        let psi0 = array![[0.5, 0.0, 0.2], [0.0, 0.4, 0.0], [0.1, 0.0, -0.3]];
        let x = simulate_var1(&psi0, 400, 5);
        let spec = PenaltySpec::with_default_shape(PenaltyFamily::Mcp, 0.05);
        let fit = fit_penalized_var(&x, 2, &spec, &SolverOpts::default()).unwrap();
        let st = x.lag_stack(2).unwrap();
        let expect = &st.responses - &st.regressors.dot(&fit.psi.t());
        assert_eq!(fit.residuals, expect);
        for (ix, v) in fit.psi.indexed_iter() {
            assert_eq!(*v != 0.0, fit.support.contains(&ix));
        }
    }

    #[test]
    fn objective_trace_nonincreasing() {
        let psi0 = array![[0.5, 0.2], [0.1, 0.4]];
        let x = simulate_var1(&psi0, 300, 6);
        for family in [PenaltyFamily::Lasso, PenaltyFamily::Scad, PenaltyFamily::Mcp] {
            let spec = PenaltySpec::with_default_shape(family, 0.03);
            let fit = fit_penalized_var(&x, 3, &spec, &SolverOpts::default()).unwrap();
            assert!(fit.converged);
            for w in fit.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{:?}", fit.objective_trace);
            }
        }
    }

    #[test]
    fn equations_separate() {
        let psi0 = array![[0.5, 0.2, 0.0], [0.1, 0.4, 0.0], [0.0, 0.0, 0.3]];
        let x = simulate_var1(&psi0, 300, 7);
        let spec = PenaltySpec::with_default_shape(PenaltyFamily::Scad, 0.02);
        let opts = SolverOpts::default();
        let fit = fit_penalized_var(&x, 2, &spec, &opts).unwrap();
        for i in 0..3 {
            let row = fit_single_equation(&x, 2, i, &spec, &opts).unwrap();
            for (a, b) in row.iter().zip(fit.psi.row(i)) {
                assert!((a - b).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn strict_mode_reports_non_convergence() {
        let psi0 = array![[0.5, 0.2], [0.1, 0.4]];
        let x = simulate_var1(&psi0, 300, 8);
        let spec = PenaltySpec::with_default_shape(PenaltyFamily::Lasso, 1e-4);
        let opts = SolverOpts { tol: 0.0, max_sweeps: 2, strict: true };
        assert!(matches!(fit_penalized_var(&x, 4, &spec, &opts), Err(Error::NoConvergence { .. })));
        let loose = SolverOpts { strict: false, ..opts };
        let fit = fit_penalized_var(&x, 4, &spec, &loose).unwrap();
        assert!(!fit.converged);
    }

    #[test]
    fn insufficient_sample() {
        let x = LogSqPanel::from_log_series(Array2::from_shape_fn((5, 2), |(i, j)| (i * 2 + j) as f64));
        let spec = PenaltySpec::lasso(0.1);
        assert!(matches!(
            fit_penalized_var(&x, 3, &spec, &SolverOpts::default()),
            Err(Error::InsufficientSample { .. })
        ));
    }

    #[test]
    fn cv_contract() {
        let psi0 = array![[0.5, 0.0], [0.0, 0.4]];
        let x = simulate_var1(&psi0, 300, 9);
        let plan = CvPlan::default_for(&x, 1).unwrap();
        assert_eq!(plan.lambda_grid.len(), 50);
        let cv = hv_cross_validate(&x, 1, PenaltyFamily::Scad, 3.5, &plan, &SolverOpts::default()).unwrap();
        assert_eq!(cv.curve.len(), 50);
        assert!(cv.curve.iter().all(|c| *c >= 0.0));
        assert!(plan.lambda_grid.contains(&cv.lambda_star));

        let single = CvPlan { lambda_grid: vec![0.123], ..plan.clone() };
        let cv1 = hv_cross_validate(&x, 1, PenaltyFamily::Scad, 3.5, &single, &SolverOpts::default()).unwrap();
        assert_eq!(cv1.lambda_star, 0.123);

        let bad = CvPlan { n_folds: 1, ..plan.clone() };
        assert!(matches!(
            hv_cross_validate(&x, 1, PenaltyFamily::Scad, 3.5, &bad, &SolverOpts::default()),
            Err(Error::DegenerateFolds(_))
        ));
        let starved = CvPlan { n_folds: 2, gap: 148, ..plan };
        assert!(matches!(
            hv_cross_validate(&x, 1, PenaltyFamily::Scad, 3.5, &starved, &SolverOpts::default()),
            Err(Error::DegenerateFolds(_))
        ));
    }

    #[test]
    fn lambda_max_zeroes_lasso() {
        let psi0 = array![[0.5, 0.0], [0.0, 0.4]];
        let x = simulate_var1(&psi0, 300, 10);
        let plan = CvPlan::default_for(&x, 2).unwrap();
        let top = plan.lambda_grid[0];
        let fit = fit_penalized_var(&x, 2, &PenaltySpec::lasso(top), &SolverOpts::default()).unwrap();
        assert!(fit.support.is_empty());
        let below = fit_penalized_var(&x, 2, &PenaltySpec::lasso(top * 0.99), &SolverOpts::default()).unwrap();
        assert!(!below.support.is_empty());
        assert!((plan.lambda_grid[49] / top - 1e-4).abs() < 1e-12);
    }
}
