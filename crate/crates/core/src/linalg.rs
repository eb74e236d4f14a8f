//! Small dense linear algebra kernels over [`Real`].
//!
//! The matrices handled here are at most a few thousand rows (dense
//! smoother backend) and usually `p x p`, so plain row-oriented loops are
//! adequate.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use rayon::prelude::*;

use crate::scalar::Real;

/// Lower Cholesky factor `L` with `A = L L'`. Returns `None` if `a` is not
/// numerically positive definite.
///
/// Right-looking and blocked; the panel solve and the trailing update run
/// on the rayon pool for large matrices.
pub fn cholesky<T: Real>(a: ArrayView2<T>) -> Option<Array2<T>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut w = Array2::<T>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            w[[i, j]] = a[[i, j]];
        }
    }
    let ws = w.as_slice_mut().expect("standard layout");
    let mut k0 = 0;
    while k0 < n {
        let nb = CHOL_BLOCK.min(n - k0);
        let k1 = k0 + nb;
        // diagonal block
        for i in k0..k1 {
            for j in k0..=i {
                let s = ws[i * n + j] - dot_slice(&ws[i * n + k0..i * n + j], &ws[j * n + k0..j * n + j]);
                if i == j {
                    if !(s > T::zero()) || !s.is_finite() {
                        return None;
                    }
                    ws[i * n + i] = s.sqrt();
                } else {
                    ws[i * n + j] = s / ws[j * n + j];
                }
            }
        }
        if k1 == n {
            break;
        }
        let diag: Vec<T> = (k0..k1).flat_map(|i| ws[i * n + k0..i * n + k1].to_vec()).collect();
        let (_, below) = ws.split_at_mut(k1 * n);
        let parallel = n >= 512;
        // panel: rows below solve against the diagonal block
        let panel_row = |row: &mut [T]| {
            for j in 0..nb {
                let s = row[k0 + j] - dot_slice(&row[k0..k0 + j], &diag[j * nb..j * nb + j]);
                row[k0 + j] = s / diag[j * nb + j];
            }
        };
        if parallel {
            below.par_chunks_mut(n).for_each(panel_row);
        } else {
            below.chunks_mut(n).for_each(panel_row);
        }
        let panel: Vec<T> = below.chunks(n).flat_map(|r| r[k0..k1].to_vec()).collect();
        // trailing update of the lower triangle
        let update = |(r, row): (usize, &mut [T])| {
            let li = &panel[r * nb..(r + 1) * nb];
            for c in 0..=r {
                let lj = &panel[c * nb..(c + 1) * nb];
                row[k1 + c] = row[k1 + c] - dot_slice(li, lj);
            }
        };
        if parallel {
            below.par_chunks_mut(n).enumerate().for_each(update);
        } else {
            below.chunks_mut(n).enumerate().for_each(update);
        }
        k0 = k1;
    }
    Some(w)
}

const CHOL_BLOCK: usize = 64;

/// Dot product with four independent accumulators.
#[inline]
fn dot_slice<T: Real>(a: &[T], b: &[T]) -> T {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [T::zero(); 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] = acc[0] + a[i] * b[i];
        acc[1] = acc[1] + a[i + 1] * b[i + 1];
        acc[2] = acc[2] + a[i + 2] * b[i + 2];
        acc[3] = acc[3] + a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..n {
        s = s + a[i] * b[i];
    }
    s
}

/// Solves `L L' x = b` given the lower factor.
pub fn cholesky_solve<T: Real>(l: ArrayView2<T>, b: ArrayView1<T>) -> Array1<T> {
    let n = l.nrows();
    let mut y = b.to_owned();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s = s - l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s = s - l[[k, i]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    y
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Array2<T>,
    piv: Vec<usize>,
}

impl<T: Real> Lu<T> {
    /// Returns `None` when a pivot is exactly zero or non-finite.
    pub fn new(a: ArrayView2<T>) -> Option<Self> {
        let n = a.nrows();
        debug_assert_eq!(n, a.ncols());
        let mut lu = a.to_owned();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut best = k;
            let mut best_abs = lu[[k, k]].abs();
            for i in k + 1..n {
                let v = lu[[i, k]].abs();
                if v > best_abs {
                    best = i;
                    best_abs = v;
                }
            }
            if !(best_abs > T::zero()) || !best_abs.is_finite() {
                return None;
            }
            if best != k {
                for j in 0..n {
                    lu.swap([k, j], [best, j]);
                }
                piv.swap(k, best);
            }
            let pivot = lu[[k, k]];
            for i in k + 1..n {
                let f = lu[[i, k]] / pivot;
                lu[[i, k]] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let v = lu[[k, j]];
                        lu[[i, j]] = lu[[i, j]] - f * v;
                    }
                }
            }
        }
        Some(Self { lu, piv })
    }

    pub fn solve(&self, b: ArrayView1<T>) -> Array1<T> {
        let n = self.lu.nrows();
        let mut x: Array1<T> = self.piv.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s = s - self.lu[[i, k]] * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s = s - self.lu[[i, k]] * x[k];
            }
            x[i] = s / self.lu[[i, i]];
        }
        x
    }

    pub fn solve_mat(&self, b: ArrayView2<T>) -> Array2<T> {
        let mut out = Array2::zeros(b.raw_dim());
        for (j, col) in b.axis_iter(Axis(1)).enumerate() {
            out.column_mut(j).assign(&self.solve(col));
        }
        out
    }

    pub fn inverse(&self) -> Array2<T> {
        let n = self.lu.nrows();
        self.solve_mat(Array2::<T>::eye(n).view())
    }
}

/// Inverse of a square matrix, `None` if singular.
pub fn inverse<T: Real>(a: ArrayView2<T>) -> Option<Array2<T>> {
    Lu::new(a).map(|lu| lu.inverse())
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns.
pub fn sym_eigen<T: Real>(a: ArrayView2<T>) -> (Array1<T>, Array2<T>) {
    let n = a.nrows();
    let mut m = a.to_owned();
    let mut v = Array2::<T>::eye(n);
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut total = T::zero();
        for i in 0..n {
            for j in 0..n {
                let s = m[[i, j]] * m[[i, j]];
                total = total + s;
                if i != j {
                    off = off + s;
                }
            }
        }
        if off <= eps * eps * total || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (kp, kq) = (m[[k, p]], m[[k, q]]);
                    m[[k, p]] = c * kp - s * kq;
                    m[[k, q]] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (m[[p, k]], m[[q, k]]);
                    m[[p, k]] = c * pk - s * qk;
                    m[[q, k]] = s * pk + c * qk;
                }
                for k in 0..n {
                    let (kp, kq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * kp - s * kq;
                    v[[k, q]] = s * kp + c * kq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].partial_cmp(&m[[j, j]]).unwrap_or(std::cmp::Ordering::Equal));
    let vals: Array1<T> = order.iter().map(|&i| m[[i, i]]).collect();
    let mut vecs = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vecs.column_mut(dst).assign(&v.column(src));
    }
    (vals, vecs)
}

pub fn min_eigenvalue<T: Real>(a: ArrayView2<T>) -> T {
    let (vals, _) = sym_eigen(a);
    vals.iter().copied().fold(T::infinity(), T::min)
}

/// Symmetric positive semi-definite square root; negative eigenvalues are
/// clipped at zero.
pub fn sqrtm_psd<T: Real>(a: ArrayView2<T>) -> Array2<T> {
    let (vals, vecs) = sym_eigen(a);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for j in 0..n {
        let s = vals[j].max(T::zero()).sqrt();
        scaled.column_mut(j).mapv_inplace(|x| x * s);
    }
    scaled.dot(&vecs.t())
}

/// `(A + A') / 2`.
pub fn symmetrize<T: Real>(a: ArrayView2<T>) -> Array2<T> {
    let half = T::lit(0.5);
    (&a + &a.t()).mapv(|x| x * half)
}

pub fn is_symmetric<T: Real>(a: ArrayView2<T>, tol: T) -> bool {
    let n = a.nrows();
    (0..n).all(|i| (0..i).all(|j| (a[[i, j]] - a[[j, i]]).abs() <= tol))
}

pub fn trace<T: Real>(a: ArrayView2<T>) -> T {
    a.diag().iter().copied().sum()
}

pub fn frobenius_norm<T: Real>(a: ArrayView2<T>) -> T {
    a.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Eigenvalues of a general real matrix as `(re, im)` pairs, via
/// balancing, Hessenberg reduction and the shifted QR algorithm.
/// Returns `None` if QR fails to converge.
pub fn eigenvalues_general<T: Real>(a: ArrayView2<T>) -> Option<Vec<(T, T)>> {
    let n = a.nrows();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut h = a.to_owned();
    balance(&mut h);
    hessenberg(&mut h);
    for i in 0..n {
        for j in 0..i.saturating_sub(1) {
            h[[i, j]] = T::zero();
        }
    }
    hqr(h)
}

/// Largest eigenvalue modulus of a general real matrix.
pub fn spectral_radius<T: Real>(a: ArrayView2<T>) -> Option<T> {
    let ev = eigenvalues_general(a)?;
    Some(ev.iter().map(|&(re, im)| re.hypot(im)).fold(T::zero(), T::max))
}

fn balance<T: Real>(a: &mut Array2<T>) {
    let n = a.nrows();
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 0..n {
                if j != i {
                    c = c + a[[j, i]].abs();
                    r = r + a[[i, j]].abs();
                }
            }
            if c != T::zero() && r != T::zero() {
                let mut g = r / radix;
                let mut f = T::one();
                let s = c + r;
                while c < g {
                    f = f * radix;
                    c = c * sqrdx;
                }
                g = r * radix;
                while c > g {
                    f = f / radix;
                    c = c / sqrdx;
                }
                if (c + r) / f < T::lit(0.95) * s {
                    done = false;
                    let g = T::one() / f;
                    for j in 0..n {
                        a[[i, j]] = a[[i, j]] * g;
                    }
                    for j in 0..n {
                        a[[j, i]] = a[[j, i]] * f;
                    }
                }
            }
        }
    }
}

fn hessenberg<T: Real>(a: &mut Array2<T>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for m in 1..n - 1 {
        let mut x = T::zero();
        let mut i = m;
        for j in m..n {
            if a[[j, m - 1]].abs() > x.abs() {
                x = a[[j, m - 1]];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..n {
                a.swap([i, j], [m, j]);
            }
            for j in 0..n {
                a.swap([j, i], [j, m]);
            }
        }
        if x != T::zero() {
            for i in m + 1..n {
                let mut y = a[[i, m - 1]];
                if y != T::zero() {
                    y = y / x;
                    a[[i, m - 1]] = y;
                    for j in m..n {
                        let v = a[[m, j]];
                        a[[i, j]] = a[[i, j]] - y * v;
                    }
                    for j in 0..n {
                        let v = a[[j, i]];
                        a[[j, m]] = a[[j, m]] + y * v;
                    }
                }
            }
        }
    }
}

fn sign<T: Real>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

#[allow(clippy::many_single_char_names)]
fn hqr<T: Real>(mut a: Array2<T>) -> Option<Vec<(T, T)>> {
    let n = a.nrows() as isize;
    let eps = T::epsilon();
    let mut wr = vec![T::zero(); n as usize];
    let mut wi = vec![T::zero(); n as usize];
    macro_rules! at {
        ($i:expr, $j:expr) => {
            a[[($i) as usize, ($j) as usize]]
        };
    }
    let mut anorm = T::zero();
    for i in 0..n {
        for j in (i - 1).max(0)..n {
            anorm = anorm + at!(i, j).abs();
        }
    }
    let mut nn = n - 1;
    let mut t = T::zero();
    let (mut p, mut q, mut r) = (T::zero(), T::zero(), T::zero());
    let (mut x, mut y, mut z, mut w);
    while nn >= 0 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l > 0 {
                let mut s = at!(l - 1, l - 1).abs() + at!(l, l).abs();
                if s == T::zero() {
                    s = anorm;
                }
                if at!(l, l - 1).abs() <= eps * s {
                    at!(l, l - 1) = T::zero();
                    break;
                }
                l -= 1;
            }
            x = at!(nn, nn);
            if l == nn {
                wr[nn as usize] = x + t;
                wi[nn as usize] = T::zero();
                nn -= 1;
            } else {
                y = at!(nn - 1, nn - 1);
                w = at!(nn, nn - 1) * at!(nn - 1, nn);
                if l == nn - 1 {
                    p = T::lit(0.5) * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x = x + t;
                    if q >= T::zero() {
                        z = p + sign(z, p);
                        wr[(nn - 1) as usize] = x + z;
                        wr[nn as usize] = x + z;
                        if z != T::zero() {
                            wr[nn as usize] = x - w / z;
                        }
                        wi[(nn - 1) as usize] = T::zero();
                        wi[nn as usize] = T::zero();
                    } else {
                        wr[(nn - 1) as usize] = x + p;
                        wr[nn as usize] = x + p;
                        wi[(nn - 1) as usize] = z;
                        wi[nn as usize] = -z;
                    }
                    nn -= 2;
                } else {
                    if its == 60 {
                        return None;
                    }
                    if its == 10 || its == 20 {
                        t = t + x;
                        for i in 0..=nn {
                            at!(i, i) = at!(i, i) - x;
                        }
                        let s = at!(nn, nn - 1).abs() + at!(nn - 1, nn - 2).abs();
                        x = T::lit(0.75) * s;
                        y = x;
                        w = T::lit(-0.4375) * s * s;
                    }
                    its += 1;
                    let mut m = nn - 2;
                    while m >= l {
                        z = at!(m, m);
                        r = x - z;
                        let s0 = y - z;
                        p = (r * s0 - w) / at!(m + 1, m) + at!(m, m + 1);
                        q = at!(m + 1, m + 1) - z - r - s0;
                        r = at!(m + 2, m + 1);
                        let s = p.abs() + q.abs() + r.abs();
                        p = p / s;
                        q = q / s;
                        r = r / s;
                        if m == l {
                            break;
                        }
                        let u = at!(m, m - 1).abs() * (q.abs() + r.abs());
                        let v = p.abs() * (at!(m - 1, m - 1).abs() + z.abs() + at!(m + 1, m + 1).abs());
                        if u <= eps * v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in m..nn - 1 {
                        at!(i + 2, i) = T::zero();
                        if i != m {
                            at!(i + 2, i - 1) = T::zero();
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = at!(k, k - 1);
                            q = at!(k + 1, k - 1);
                            r = T::zero();
                            if k + 1 != nn {
                                r = at!(k + 2, k - 1);
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != T::zero() {
                                p = p / x;
                                q = q / x;
                                r = r / x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != T::zero() {
                            if k == m {
                                if l != m {
                                    at!(k, k - 1) = -at!(k, k - 1);
                                }
                            } else {
                                at!(k, k - 1) = -s * x;
                            }
                            p = p + s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q = q / p;
                            r = r / p;
                            for j in k..=nn {
                                p = at!(k, j) + q * at!(k + 1, j);
                                if k + 1 != nn {
                                    p = p + r * at!(k + 2, j);
                                    at!(k + 2, j) = at!(k + 2, j) - p * z;
                                }
                                at!(k + 1, j) = at!(k + 1, j) - p * y;
                                at!(k, j) = at!(k, j) - p * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                p = x * at!(i, k) + y * at!(i, k + 1);
                                if k + 1 != nn {
                                    p = p + z * at!(i, k + 2);
                                    at!(i, k + 2) = at!(i, k + 2) - p * r;
                                }
                                at!(i, k + 1) = at!(i, k + 1) - p * q;
                                at!(i, k) = at!(i, k) - p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if !(l + 1 < nn) {
                break;
            }
        }
    }
    Some(wr.into_iter().zip(wi).collect())
}

/// Column means of a `T x p` panel.
pub fn col_means<T: Real>(x: ArrayView2<T>) -> Array1<T> {
    let n = T::from_usize_lossy(x.nrows());
    x.sum_axis(Axis(0)).mapv(|s| s / n)
}

/// Sample covariance `X_c' X_c / T` after removing column means.
pub fn sample_cov<T: Real>(x: ArrayView2<T>) -> Array2<T> {
    let means = col_means(x);
    let xc = &x - &means.insert_axis(Axis(0));
    let n = T::from_usize_lossy(x.nrows());
    xc.t().dot(&xc).mapv(|v| v / n)
}

/// Converts a covariance matrix to a correlation matrix. Returns the index
/// of the first zero-variance column on failure.
pub fn cov_to_corr<T: Real>(cov: ArrayView2<T>) -> Result<Array2<T>, usize> {
    let p = cov.nrows();
    let sd: Vec<T> = cov.diag().iter().map(|&v| v.sqrt()).collect();
    if let Some(i) = sd.iter().position(|&s| !(s > T::zero())) {
        return Err(i);
    }
    let mut r = Array2::zeros((p, p));
    for i in 0..p {
        for j in 0..p {
            r[[i, j]] = if i == j { T::one() } else { cov[[i, j]] / (sd[i] * sd[j]) };
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn cholesky_reconstructs() {
        let a: Array2<f64> = array![[4.0, 2.0, 0.6], [2.0, 5.0, 1.0], [0.6, 1.0, 3.0]];
        let l = cholesky(a.view()).unwrap();
        let back = l.dot(&l.t());
        for (x, y) in back.iter().zip(a.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
        let b: Array1<f64> = array![1.0, -2.0, 0.5];
        let x = cholesky_solve(l.view(), b.view());
        let r = a.dot(&x) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn blocked_cholesky_large() {
        // spans several blocks and takes the parallel path
        let n = 600;
        let b = Array2::from_shape_fn((n, n), |(i, j)| ((i * 31 + j * 17) % 23) as f64 / 23.0 - 0.5);
        let a = b.dot(&b.t()) + Array2::<f64>::eye(n) * n as f64;
        let l = cholesky(a.view()).unwrap();
        for i in 0..n {
            for j in i + 1..n {
                assert_eq!(l[[i, j]], 0.0);
            }
        }
        let back = l.dot(&l.t());
        let err = (&back - &a).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(cholesky(a.view()).is_none());
    }

    #[test]
    fn lu_inverse() {
        let a: Array2<f64> = array![[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]];
        let inv = inverse(a.view()).unwrap();
        let id = a.dot(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[[i, j]] - e).abs() < 1e-12);
            }
        }
        assert!(inverse(array![[1.0, 2.0], [2.0, 4.0]].view()).is_none());
    }

    #[test]
    fn jacobi_eigen() {
        let a: Array2<f64> = array![[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]];
        let (vals, vecs) = sym_eigen(a.view());
        let s2 = 2f64.sqrt();
        let expect = [2.0 - s2, 2.0, 2.0 + s2];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
        let back = vecs.dot(&Array2::from_diag(&vals)).dot(&vecs.t());
        for (x, y) in back.iter().zip(a.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn general_eigenvalues() {
        // rotation by 90 degrees scaled by 0.5: eigenvalues +-0.5i
        let a: Array2<f64> = array![[0.0, -0.5], [0.5, 0.0]];
        let ev = eigenvalues_general(a.view()).unwrap();
        assert!(ev.iter().all(|&(re, im)| re.abs() < 1e-12 && (im.abs() - 0.5).abs() < 1e-12));
        // companion matrix of (x-1)(x-2)(x-3)(x+0.5)
        let c = array![
            [5.5, -8.0, 0.5, 3.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0]
        ];
        let mut re: Vec<f64> = eigenvalues_general(c.view()).unwrap().iter().map(|e| e.0).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (v, e) in re.iter().zip([-0.5, 1.0, 2.0, 3.0]) {
            assert!((v - e).abs() < 1e-9, "{re:?}");
        }
        let tri: Array2<f64> = array![[0.3, 5.0, 1.0], [0.0, -0.9, 2.0], [0.0, 0.0, 0.1]];
        assert!((spectral_radius(tri.view()).unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn psd_square_root() {
        let a: Array2<f64> = array![[2.0, 0.5], [0.5, 1.0]];
        let r = sqrtm_psd(a.view());
        let back = r.dot(&r);
        for (x, y) in back.iter().zip(a.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(is_symmetric(r.view(), 1e-14));
    }
}
