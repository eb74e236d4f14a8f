//! Unconstrained BFGS with a backtracking Armijo line search.

#[derive(Debug, Clone, Copy)]
pub struct BfgsOpts {
    pub max_iter: usize,
    /// Stop when the gradient infinity norm falls below this.
    pub grad_tol: f64,
    /// Stop when the objective decreases by less than this, relative.
    pub f_tol: f64,
}

impl Default for BfgsOpts {
    fn default() -> Self {
        Self { max_iter: 500, grad_tol: 1e-7, f_tol: 1e-13 }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f`, which returns the value and gradient. Non-finite values
/// are treated as +infinity by the line search.
pub fn bfgs<F>(f: F, x0: &[f64], opts: &BfgsOpts) -> BfgsResult
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut g) = f(&x);
    let mut hinv = vec![0.0; n * n];
    for i in 0..n {
        hinv[i * n + i] = 1.0;
    }
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        if !fx.is_finite() {
            break;
        }
        if g.iter().all(|v| v.abs() <= opts.grad_tol) {
            converged = true;
            break;
        }
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&hinv[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&d, &g);
        if !(slope < 0.0) {
            // lost descent: restart from steepest descent
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] = if i == j { 1.0 } else { 0.0 };
                }
            }
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let (fnew, gnew) = f(&xn);
            if fnew.is_finite() && fnew <= fx + 1e-4 * step * slope {
                accepted = Some((xn, fnew, gnew));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            // no decrease along the direction: at numerical optimum
            converged = g.iter().all(|v| v.abs() <= opts.grad_tol.sqrt());
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let decrease = fx - fnew;
        x = xn;
        g = gnew;
        let fold = fx;
        fx = fnew;
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| dot(&hinv[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] +=
                        (1.0 + yhy * rho) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
        if decrease.abs() <= opts.f_tol * (1.0 + fold.abs()) {
            converged = g.iter().all(|v| v.abs() <= opts.grad_tol.sqrt());
            break;
        }
    }
    BfgsResult { x, f: fx, iterations, converged }
}
