//! Simulators for multivariate ARCH, BEKK and stochastic volatility panels.
//!
//! Randomness comes from ChaCha20. A root seed and a replication index map
//! to an independent ChaCha stream, so replications can run in any order.

use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::covseq::{CovKind, CovSequence};
use crate::error::{Error, Result};
use crate::linalg::{cov_to_corr, spectral_radius, sym_eigen};
use crate::panel::ReturnPanel;
use crate::scalar::Real;

pub const DEFAULT_BURN_IN: usize = 500;
pub const DEFAULT_MAX_DRAWS: usize = 100_000;
/// Default cap on the share of periods whose lagged innovation may be
/// redrawn to keep the ARCH covariance positive definite. Uniform
/// coefficient draws leave `H_t` indefinite in roughly 7% of periods at
/// `p = 15`, `q* = 2`, so a 1% cap would reject every replication.
pub const DEFAULT_MAX_PD_SHARE: f64 = 0.2;

/// Generator for replication `rep` under `root`.
pub fn replication_rng(root: u64, rep: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(root);
    rng.set_stream(rep);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DgpKind {
    March { q_star: usize },
    Bekk,
    Msv,
}

/// Stochastic volatility parameters: `h_{t+1} = mu + Phi (h_t - mu) + eta_t`,
/// `eta ~ N(0, Sigma_eta)`, `y_t = diag(exp(h_t / 2)) e_t`, `e ~ N(0, Gamma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MsvParams<T> {
    #[serde(with = "crate::serde_mat::vector")]
    pub mu: Array1<T>,
    #[serde(with = "crate::serde_mat::matrix")]
    pub phi: Array2<T>,
    #[serde(with = "crate::serde_mat::matrix")]
    pub sigma_eta: Array2<T>,
    #[serde(with = "crate::serde_mat::matrix")]
    pub gamma: Array2<T>,
}

impl<T: Real> MsvParams<T> {
    /// `mu = 0`, `Phi = phi I`, `Sigma_eta = s I`, `Gamma = I`.
    pub fn diagonal(p: usize, phi: T, s: T) -> Self {
        Self {
            mu: Array1::zeros(p),
            phi: Array2::eye(p) * phi,
            sigma_eta: Array2::eye(p) * s,
            gamma: Array2::eye(p),
        }
    }
}

/// Explicit parameters that replace the random draws.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct DgpOverrides<T> {
    #[serde(default, with = "opt_matrix")]
    pub omega: Option<Array2<T>>,
    #[serde(default, with = "opt_matrices")]
    pub arch: Option<Vec<Array2<T>>>,
    #[serde(default, with = "opt_matrix")]
    pub a: Option<Array2<T>>,
    #[serde(default, with = "opt_matrix")]
    pub b: Option<Array2<T>>,
    #[serde(default)]
    pub msv: Option<MsvParams<T>>,
}

mod opt_matrix {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: Real, S: Serializer>(a: &Option<Array2<T>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Option<Vec<Vec<T>>> = a.as_ref().map(|m| m.rows().into_iter().map(|r| r.to_vec()).collect());
        rows.serialize(s)
    }

    pub fn deserialize<'de, T: Real, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Array2<T>>, D::Error> {
        let rows: Option<Vec<Vec<T>>> = Option::deserialize(d)?;
        rows.map(|r| crate::serde_mat::from_rows(r).map_err(serde::de::Error::custom)).transpose()
    }
}

mod opt_matrices {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: Real, S: Serializer>(a: &Option<Vec<Array2<T>>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let all: Option<Vec<Vec<Vec<T>>>> =
            a.as_ref().map(|v| v.iter().map(|m| m.rows().into_iter().map(|r| r.to_vec()).collect()).collect());
        all.serialize(s)
    }

    pub fn deserialize<'de, T: Real, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Vec<Array2<T>>>, D::Error> {
        let all: Option<Vec<Vec<Vec<T>>>> = Option::deserialize(d)?;
        all.map(|v| {
            v.into_iter()
                .map(|r| crate::serde_mat::from_rows(r).map_err(serde::de::Error::custom))
                .collect()
        })
        .transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DgpSpec<T> {
    pub kind: DgpKind,
    pub p: usize,
    pub t: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Replication index selecting the generator stream.
    pub replication: u64,
    /// Cap on rejected parameter draws.
    pub max_draws: usize,
    /// Cap on the share of periods redrawn for positivity (ARCH only).
    #[serde(default = "default_pd_share")]
    pub max_pd_share: f64,
    pub overrides: DgpOverrides<T>,
}

fn default_pd_share() -> f64 {
    DEFAULT_MAX_PD_SHARE
}

impl<T: Real> DgpSpec<T> {
    pub fn new(kind: DgpKind, p: usize, t: usize, seed: u64) -> Self {
        Self {
            kind,
            p,
            t,
            burn_in: DEFAULT_BURN_IN,
            seed,
            replication: 0,
            max_draws: DEFAULT_MAX_DRAWS,
            max_pd_share: DEFAULT_MAX_PD_SHARE,
            overrides: DgpOverrides::default(),
        }
    }

    pub fn replication(mut self, rep: u64) -> Self {
        self.replication = rep;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.p == 0 || self.t == 0 {
            return Err(Error::InvalidArgument("p and T must be positive".into()));
        }
        if let DgpKind::March { q_star: 0 } = self.kind {
            return Err(Error::InvalidArgument("q_star must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.max_pd_share) {
            return Err(Error::InvalidArgument("max_pd_share must lie in [0, 1]".into()));
        }
        let p = self.p;
        let sq = |m: &Option<Array2<T>>, n: usize, what: &str| -> Result<()> {
            match m {
                Some(m) if m.dim() != (n, n) => Err(Error::InvalidArgument(format!("{what} must be {n} x {n}"))),
                _ => Ok(()),
            }
        };
        sq(&self.overrides.omega, p, "omega")?;
        sq(&self.overrides.a, p, "A")?;
        sq(&self.overrides.b, p, "B")?;
        if let Some(ak) = &self.overrides.arch {
            if ak.iter().any(|m| m.dim() != (p * p, p * p)) {
                return Err(Error::InvalidArgument(format!("ARCH matrices must be {0} x {0}", p * p)));
            }
        }
        Ok(())
    }
}

/// Parameters actually used by a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub enum DgpParams<T> {
    March {
        #[serde(with = "crate::serde_mat::matrix")]
        omega: Array2<T>,
        #[serde(with = "crate::serde_mat::matrices")]
        arch: Vec<Array2<T>>,
    },
    Bekk {
        #[serde(with = "crate::serde_mat::matrix")]
        omega: Array2<T>,
        #[serde(with = "crate::serde_mat::matrix")]
        a: Array2<T>,
        #[serde(with = "crate::serde_mat::matrix")]
        b: Array2<T>,
    },
    Msv(MsvParams<T>),
}

#[derive(Debug, Clone)]
pub struct Simulation<T> {
    pub panel: ReturnPanel<T>,
    pub truth: CovSequence<T>,
    /// Log-volatility path, stochastic volatility panels only.
    pub log_vol: Option<Array2<T>>,
    pub params: DgpParams<T>,
    /// Parameter draws rejected before an admissible one was found.
    pub param_rejections: usize,
    /// Periods whose innovation was redrawn to keep the covariance positive definite.
    pub pd_redraws: usize,
}

pub fn simulate<T: Real>(spec: &DgpSpec<T>) -> Result<Simulation<T>> {
    match spec.kind {
        DgpKind::March { .. } => simulate_march(spec),
        DgpKind::Bekk => simulate_bekk(spec),
        DgpKind::Msv => simulate_msv(spec),
    }
}

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

fn normal_vec<T: Real, R: Rng>(rng: &mut R, p: usize) -> Array1<T> {
    Array1::from_shape_fn(p, |_| T::lit(rng.sample::<f64, _>(StandardNormal)))
}

/// `Omega` with diagonal in `[0.1, 0.2]` and off-diagonal in `[-0.01, 0.01]`.
fn draw_omega<T: Real, R: Rng>(rng: &mut R, p: usize) -> Array2<T> {
    let mut w = Array2::zeros((p, p));
    for i in 0..p {
        w[[i, i]] = T::lit(uniform(rng, 0.1, 0.2));
        for j in 0..i {
            let v = T::lit(uniform(rng, -0.01, 0.01));
            w[[i, j]] = v;
            w[[j, i]] = v;
        }
    }
    w
}

fn is_pd<T: Real>(a: ArrayView2<T>) -> bool {
    crate::linalg::cholesky(a).is_some()
}

/// Symmetric root and positivity in one eigendecomposition.
fn sqrt_if_pd<T: Real>(h: ArrayView2<T>) -> Option<Array2<T>> {
    let (vals, vecs) = sym_eigen(h);
    if vals.iter().any(|v| !(*v > T::zero())) {
        return None;
    }
    let mut scaled = vecs.clone();
    for (j, v) in vals.iter().enumerate() {
        let s = v.sqrt();
        scaled.column_mut(j).mapv_inplace(|x| x * s);
    }
    Some(scaled.dot(&vecs.t()))
}

/// `q*` symmetric `p^2 x p^2` matrices with diagonal in `[0.01, 0.05]`,
/// off-diagonal in `[-0.01, 0.01]`, and magnitudes non-increasing in `k`.
fn draw_arch<T: Real, R: Rng>(rng: &mut R, p: usize, q: usize) -> Vec<Array2<T>> {
    let n = p * p;
    let mut out = vec![Array2::zeros((n, n)); q];
    let mut vals = vec![0.0f64; q];
    for i in 0..n {
        for j in 0..=i {
            for v in vals.iter_mut() {
                *v = if i == j { uniform(rng, 0.01, 0.05) } else { uniform(rng, -0.01, 0.01) };
            }
            vals.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
            for (k, v) in vals.iter().enumerate() {
                out[k][[i, j]] = T::lit(*v);
                out[k][[j, i]] = T::lit(*v);
            }
        }
    }
    out
}

/// Linear map `S -> sum_k sum_{a,b} A_k[(i,a),(j,b)] S_ab` on `p x p`
/// matrices, written as a `p^2 x p^2` matrix acting on row-major `vec(S)`.
/// Its spectral radius governs the recursion of `E[H_t]`.
pub fn arch_mean_operator<T: Real>(arch: &[Array2<T>], p: usize) -> Array2<T> {
    let n = p * p;
    let mut l = Array2::zeros((n, n));
    for ak in arch {
        for i in 0..p {
            for j in 0..p {
                for a in 0..p {
                    for b in 0..p {
                        l[[i * p + j, a * p + b]] = l[[i * p + j, a * p + b]] + ak[[i * p + a, j * p + b]];
                    }
                }
            }
        }
    }
    l
}

/// `H = Omega + sum_k (I (x) e_{t-k}') A_k (I (x) e_{t-k})`.
fn arch_cov<T: Real>(omega: &Array2<T>, arch: &[Array2<T>], lagged: &[Array1<T>]) -> Array2<T> {
    let p = omega.nrows();
    let mut h = omega.clone();
    for (ak, e) in arch.iter().zip(lagged) {
        for i in 0..p {
            for j in 0..=i {
                let mut s = T::zero();
                for a in 0..p {
                    let row = ak.row(i * p + a);
                    let mut inner = T::zero();
                    for b in 0..p {
                        inner = inner + row[j * p + b] * e[b];
                    }
                    s = s + e[a] * inner;
                }
                h[[i, j]] = h[[i, j]] + s;
                if i != j {
                    h[[j, i]] = h[[i, j]];
                }
            }
        }
    }
    h
}

pub fn simulate_march<T: Real>(spec: &DgpSpec<T>) -> Result<Simulation<T>> {
    spec.validate()?;
    let q = match spec.kind {
        DgpKind::March { q_star } => q_star,
        _ => return Err(Error::InvalidArgument("not an ARCH specification".into())),
    };
    let p = spec.p;
    let mut rng = replication_rng(spec.seed, spec.replication);
    let mut param_rejections = 0;
    let (omega, arch) = loop {
        if param_rejections >= spec.max_draws {
            return Err(Error::AdmissibilitySampleExhausted {
                draws: param_rejections,
                reason: "ARCH mean recursion not contracting or Omega not positive definite".into(),
            });
        }
        let omega = spec.overrides.omega.clone().unwrap_or_else(|| draw_omega(&mut rng, p));
        let arch = match &spec.overrides.arch {
            Some(a) if a.len() == q => a.clone(),
            Some(a) => return Err(Error::InvalidArgument(format!("{} ARCH matrices given, q* = {q}", a.len()))),
            None => draw_arch(&mut rng, p, q),
        };
        let rho = spectral_radius(arch_mean_operator(&arch, p).view());
        if is_pd(omega.view()) && rho.is_some_and(|r| r < T::one()) {
            break (omega, arch);
        }
        if spec.overrides.omega.is_some() && spec.overrides.arch.is_some() {
            return Err(Error::AdmissibilitySampleExhausted {
                draws: 1,
                reason: "explicit ARCH parameters are not admissible".into(),
            });
        }
        param_rejections += 1;
    };

    let total = spec.burn_in + spec.t;
    let mut lagged: Vec<Array1<T>> = (0..q).map(|_| normal_vec(&mut rng, p)).collect();
    let mut prev_root: Option<Array2<T>> = None;
    let mut ys = Array2::zeros((spec.t, p));
    let mut hs = Vec::with_capacity(spec.t);
    let mut pd_redraws = 0;
    let limit = (spec.max_pd_share * total as f64).floor() as usize;
    for t in 0..total {
        let mut h = arch_cov(&omega, &arch, &lagged);
        let root = loop {
            if let Some(r) = sqrt_if_pd(h.view()) {
                break r;
            }
            pd_redraws += 1;
            if pd_redraws > limit.max(1) {
                return Err(Error::AdmissibilitySampleExhausted {
                    draws: pd_redraws,
                    reason: "too many non-positive-definite conditional covariances".into(),
                });
            }
            // redraw the most recent innovation from its own covariance
            let eta = normal_vec(&mut rng, p);
            lagged[0] = match &prev_root {
                Some(r) => r.dot(&eta),
                None => eta,
            };
            if t > spec.burn_in {
                ys.row_mut(t - 1 - spec.burn_in).assign(&lagged[0]);
            }
            h = arch_cov(&omega, &arch, &lagged);
        };
        let e = root.dot(&normal_vec::<T, _>(&mut rng, p));
        if t >= spec.burn_in {
            ys.row_mut(t - spec.burn_in).assign(&e);
            hs.push(h);
        }
        lagged.rotate_right(1);
        lagged[0] = e;
        prev_root = Some(root);
    }
    Ok(Simulation {
        panel: ReturnPanel::from_data(ys)?,
        truth: CovSequence::new(CovKind::Truth, 1, hs),
        log_vol: None,
        params: DgpParams::March { omega, arch },
        param_rejections,
        pd_redraws,
    })
}

/// Half-vectorization (lower triangle, column-major) index of `(i, j)`, `i >= j`.
fn vech_index(p: usize, i: usize, j: usize) -> usize {
    j * p - j * (j + 1) / 2 + i
}

/// `D^+ (A (x) A + B (x) B) D`, the action of `S -> A S A' + B S B'` on
/// the half-vectorization of symmetric `S`.
pub fn bekk_operator<T: Real>(a: ArrayView2<T>, b: ArrayView2<T>) -> Array2<T> {
    let p = a.nrows();
    let n = p * (p + 1) / 2;
    let mut out = Array2::zeros((n, n));
    for k in 0..p {
        for l in 0..=k {
            // image of the symmetric basis element E_kl + E_lk (or E_kk)
            let mut e = Array2::zeros((p, p));
            e[[k, l]] = T::one();
            e[[l, k]] = T::one();
            let img = a.dot(&e).dot(&a.t()) + b.dot(&e).dot(&b.t());
            let col = vech_index(p, k, l);
            for i in 0..p {
                for j in 0..=i {
                    out[[vech_index(p, i, j), col]] = img[[i, j]];
                }
            }
        }
    }
    out
}

/// Spectral radius of [`bekk_operator`]; `None` if the eigenvalue iteration fails.
pub fn bekk_radius<T: Real>(a: ArrayView2<T>, b: ArrayView2<T>) -> Option<T> {
    spectral_radius(bekk_operator(a, b).view())
}

fn bekk_admissible<T: Real>(a: ArrayView2<T>, b: ArrayView2<T>) -> bool {
    // The operator dominates X -> A X A' on Hermitian PSD matrices, so its
    // radius is at least rho(A)^2 and rho(B)^2: a cheap first rejection.
    let quick = |m: ArrayView2<T>| spectral_radius(m).is_some_and(|r| r < T::one());
    quick(a) && quick(b) && bekk_radius(a, b).is_some_and(|r| r < T::one())
}

pub fn simulate_bekk<T: Real>(spec: &DgpSpec<T>) -> Result<Simulation<T>> {
    spec.validate()?;
    let p = spec.p;
    let mut rng = replication_rng(spec.seed, spec.replication);
    let mut param_rejections = 0;
    let draw = |rng: &mut ChaCha20Rng| Array2::from_shape_fn((p, p), |_| T::lit(uniform(rng, -0.8, 0.8)));
    let (omega, a, b) = loop {
        if param_rejections >= spec.max_draws {
            return Err(Error::AdmissibilitySampleExhausted {
                draws: param_rejections,
                reason: "BEKK stationarity condition never met".into(),
            });
        }
        let omega = spec.overrides.omega.clone().unwrap_or_else(|| draw_omega(&mut rng, p));
        let a = spec.overrides.a.clone().unwrap_or_else(|| draw(&mut rng));
        let b = spec.overrides.b.clone().unwrap_or_else(|| draw(&mut rng));
        if is_pd(omega.view()) && bekk_admissible(a.view(), b.view()) {
            break (omega, a, b);
        }
        let all_fixed = spec.overrides.omega.is_some() && spec.overrides.a.is_some() && spec.overrides.b.is_some();
        if all_fixed {
            return Err(Error::AdmissibilitySampleExhausted {
                draws: 1,
                reason: "explicit BEKK parameters are not admissible".into(),
            });
        }
        param_rejections += 1;
    };
    let total = spec.burn_in + spec.t;
    let mut e_prev: Array1<T> = normal_vec(&mut rng, p);
    let mut h_prev = omega.clone();
    let mut ys = Array2::zeros((spec.t, p));
    let mut hs = Vec::with_capacity(spec.t);
    for t in 0..total {
        let ae = a.dot(&e_prev);
        let mut h = &omega + &b.dot(&h_prev).dot(&b.t());
        for i in 0..p {
            for j in 0..p {
                h[[i, j]] = h[[i, j]] + ae[i] * ae[j];
            }
        }
        let h = crate::linalg::symmetrize(h.view());
        let root = sqrt_if_pd(h.view()).ok_or(Error::UnstableModel("BEKK covariance lost positivity".into()))?;
        let e = root.dot(&normal_vec::<T, _>(&mut rng, p));
        if t >= spec.burn_in {
            ys.row_mut(t - spec.burn_in).assign(&e);
            hs.push(h.clone());
        }
        e_prev = e;
        h_prev = h;
    }
    Ok(Simulation {
        panel: ReturnPanel::from_data(ys)?,
        truth: CovSequence::new(CovKind::Truth, 1, hs),
        log_vol: None,
        params: DgpParams::Bekk { omega, a, b },
        param_rejections,
        pd_redraws: 0,
    })
}

/// Stationary covariance `S = Phi S Phi' + Sigma_eta` by doubling.
pub fn stationary_cov<T: Real>(phi: ArrayView2<T>, sigma_eta: ArrayView2<T>) -> Array2<T> {
    let mut s = sigma_eta.to_owned();
    let mut a = phi.to_owned();
    for _ in 0..64 {
        let next = &s + &a.dot(&s).dot(&a.t());
        a = a.dot(&a);
        let change = (&next - &s).iter().fold(T::zero(), |m, v| m.max(v.abs()));
        s = next;
        if change <= T::epsilon() * s.iter().fold(T::zero(), |m, v| m.max(v.abs())) {
            break;
        }
    }
    crate::linalg::symmetrize(s.view())
}

fn psd_root<T: Real>(a: ArrayView2<T>) -> Array2<T> {
    crate::linalg::sqrtm_psd(a)
}

pub fn simulate_msv<T: Real>(spec: &DgpSpec<T>) -> Result<Simulation<T>> {
    spec.validate()?;
    let p = spec.p;
    let params = spec
        .overrides
        .msv
        .clone()
        .unwrap_or_else(|| MsvParams::diagonal(p, T::lit(0.9), T::lit(0.1)));
    if params.mu.len() != p || params.phi.dim() != (p, p) || params.sigma_eta.dim() != (p, p) || params.gamma.dim() != (p, p) {
        return Err(Error::InvalidArgument("volatility parameters do not match p".into()));
    }
    let rho = spectral_radius(params.phi.view()).unwrap_or(T::infinity());
    if !(rho < T::one()) {
        return Err(Error::UnstablePhi { radius: rho.as_f64() });
    }
    let corr = cov_to_corr(params.gamma.view()).map_err(Error::ZeroVarianceColumn)?;
    if (&corr - &params.gamma).iter().any(|v| v.abs() > T::lit(1e-12)) || !is_pd(params.gamma.view()) {
        return Err(Error::InvalidArgument("Gamma must be a positive definite correlation matrix".into()));
    }
    let mut rng = replication_rng(spec.seed, spec.replication);
    let eta_root = psd_root(params.sigma_eta.view());
    let gamma_root = psd_root(params.gamma.view());
    let stat_root = psd_root(stationary_cov(params.phi.view(), params.sigma_eta.view()).view());
    let mut h = &params.mu + &stat_root.dot(&normal_vec::<T, _>(&mut rng, p));
    let total = spec.burn_in + spec.t;
    let mut ys = Array2::zeros((spec.t, p));
    let mut hv = Array2::zeros((spec.t, p));
    let mut hs = Vec::with_capacity(spec.t);
    let half = T::lit(0.5);
    for t in 0..total {
        let d: Array1<T> = h.mapv(|v| (v * half).exp());
        let e = gamma_root.dot(&normal_vec::<T, _>(&mut rng, p));
        if t >= spec.burn_in {
            let k = t - spec.burn_in;
            ys.row_mut(k).assign(&(&d * &e));
            hv.row_mut(k).assign(&h);
            hs.push(crate::smoother::scaled_correlation(params.gamma.view(), d.view()));
        }
        let eta = eta_root.dot(&normal_vec::<T, _>(&mut rng, p));
        h = &params.mu + &params.phi.dot(&(&h - &params.mu)) + eta;
    }
    Ok(Simulation {
        panel: ReturnPanel::from_data(ys)?,
        truth: CovSequence::new(CovKind::Truth, 1, hs),
        log_vol: Some(hv),
        params: DgpParams::Msv(params),
        param_rejections: 0,
        pd_redraws: 0,
    })
}

/// Condition `a^2 + b^2 < 1` of the scalar BEKK recursion.
pub fn scalar_bekk_admissible(a: f64, b: f64) -> bool {
    a * a + b * b < 1.0
}
