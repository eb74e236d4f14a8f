//! LASSO, SCAD and MCP penalties and their exact univariate minimizers.
//!
//! `lambda` is the per-sample regularization level; nothing downstream
//! rescales it by the sample size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_SCAD_A: f64 = 3.5;
pub const DEFAULT_MCP_B: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyFamily {
    Lasso,
    Scad,
    Mcp,
}

impl std::str::FromStr for PenaltyFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lasso" => Ok(Self::Lasso),
            "scad" => Ok(Self::Scad),
            "mcp" => Ok(Self::Mcp),
            other => Err(Error::InvalidPenalty(format!("unknown penalty family {other:?}"))),
        }
    }
}

impl std::fmt::Display for PenaltyFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Lasso => "lasso",
            Self::Scad => "scad",
            Self::Mcp => "mcp",
        })
    }
}

/// A penalty family with its level and shape. `shape` is `a` for SCAD,
/// `b` for MCP and ignored for LASSO.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PenaltySpec<T> {
    pub family: PenaltyFamily,
    pub lambda: T,
    pub shape: T,
}

impl<T: Real> PenaltySpec<T> {
    pub fn lasso(lambda: T) -> Self {
        Self { family: PenaltyFamily::Lasso, lambda, shape: T::zero() }
    }

    pub fn scad(lambda: T, a: T) -> Self {
        Self { family: PenaltyFamily::Scad, lambda, shape: a }
    }

    pub fn mcp(lambda: T, b: T) -> Self {
        Self { family: PenaltyFamily::Mcp, lambda, shape: b }
    }

    /// Family with its default shape (`a = 3.5`, `b = 3`).
    pub fn with_default_shape(family: PenaltyFamily, lambda: T) -> Self {
        match family {
            PenaltyFamily::Lasso => Self::lasso(lambda),
            PenaltyFamily::Scad => Self::scad(lambda, T::lit(DEFAULT_SCAD_A)),
            PenaltyFamily::Mcp => Self::mcp(lambda, T::lit(DEFAULT_MCP_B)),
        }
    }

    pub fn with_lambda(self, lambda: T) -> Self {
        Self { lambda, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return Err(Error::InvalidPenalty(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        match self.family {
            PenaltyFamily::Scad if !(self.shape > T::lit(2.0)) => {
                Err(Error::InvalidPenalty(format!("SCAD requires a > 2, got {}", self.shape)))
            }
            PenaltyFamily::Mcp if !(self.shape > T::zero()) => {
                Err(Error::InvalidPenalty(format!("MCP requires b > 0, got {}", self.shape)))
            }
            _ => Ok(()),
        }
    }

    /// `p(lambda, |theta|)`.
    pub fn value(&self, theta: T) -> T {
        let t = theta.abs();
        let lam = self.lambda;
        let two = T::lit(2.0);
        match self.family {
            PenaltyFamily::Lasso => lam * t,
            PenaltyFamily::Scad => {
                let a = self.shape;
                if t <= lam {
                    lam * t
                } else if t <= a * lam {
                    -(t * t - two * a * lam * t + lam * lam) / (two * (a - T::one()))
                } else {
                    (a + T::one()) * lam * lam / two
                }
            }
            PenaltyFamily::Mcp => {
                let b = self.shape;
                if t < b * lam {
                    lam * t - t * t / (two * b)
                } else {
                    b * lam * lam / two
                }
            }
        }
    }

    /// Derivative of `p(lambda, theta)` in `theta` for `theta > 0`.
    pub fn derivative(&self, theta: T) -> Result<T> {
        if !(theta > T::zero()) {
            return Err(Error::NonPositiveTheta);
        }
        Ok(self.derivative_unchecked(theta))
    }

    /// Right derivative at `|theta|`; at zero this is `p'(lambda, 0+)`.
    pub(crate) fn derivative_unchecked(&self, theta: T) -> T {
        let t = theta.abs();
        let lam = self.lambda;
        match self.family {
            PenaltyFamily::Lasso => lam,
            PenaltyFamily::Scad => {
                let a = self.shape;
                if t <= lam {
                    lam
                } else {
                    ((a * lam - t) / (a - T::one())).max(T::zero())
                }
            }
            PenaltyFamily::Mcp => {
                let b = self.shape;
                ((b * lam - t) / b).max(T::zero())
            }
        }
    }

    /// Global minimizer of `w/2 (theta - z)^2 + p(lambda, |theta|)`.
    ///
    /// Each branch of the penalty gives a one-dimensional quadratic (convex
    /// or concave); the candidates are the clamped stationary points and the
    /// branch endpoints. Ties go to the smaller magnitude.
    pub fn univariate_minimizer(&self, z: T, w: T) -> T {
        debug_assert!(w > T::zero());
        let lam = self.lambda;
        if z == T::zero() {
            return T::zero();
        }
        let sign = z.signum();
        let az = z.abs();
        if self.family == PenaltyFamily::Lasso {
            return sign * (az - lam / w).max(T::zero());
        }
        if lam == T::zero() {
            return z;
        }
        let objective = |t: T| T::lit(0.5) * w * (t - az) * (t - az) + self.value(t);
        let mut cands: [T; 6] = [T::zero(); 6];
        let mut n = 0;
        let mut push = |t: T| {
            cands[n] = t;
            n += 1;
        };
        push(T::zero());
        match self.family {
            PenaltyFamily::Scad => {
                let a = self.shape;
                let hi = a * lam;
                push((az - lam / w).max(T::zero()).min(lam));
                push(lam);
                let curv = w - T::one() / (a - T::one());
                if curv > T::zero() {
                    let t = (w * az - a * lam / (a - T::one())) / curv;
                    push(t.max(lam).min(hi));
                }
                push(hi);
                push(az.max(hi));
            }
            PenaltyFamily::Mcp => {
                let b = self.shape;
                let hi = b * lam;
                let curv = w - T::one() / b;
                if curv > T::zero() {
                    push(((w * az - lam) / curv).max(T::zero()).min(hi));
                }
                push(hi);
                push(az.max(hi));
            }
            PenaltyFamily::Lasso => unreachable!(),
        }
        let mut best = cands[0];
        let mut best_val = objective(best);
        for &t in &cands[1..n] {
            let v = objective(t);
            if v < best_val || (v == best_val && t < best) {
                best = t;
                best_val = v;
            }
        }
        sign * best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scad() -> PenaltySpec<f64> {
        PenaltySpec::scad(1.0, 3.5)
    }
    fn mcp() -> PenaltySpec<f64> {
        PenaltySpec::mcp(1.0, 3.0)
    }

    #[test]
    fn values() {
        assert_eq!(scad().value(0.5), 0.5);
        assert!((scad().value(10.0) - 2.25).abs() < 1e-15);
        assert!((mcp().value(10.0) - 1.5).abs() < 1e-15);
        assert!((mcp().value(1.5) - 1.125).abs() < 1e-15);
        assert!((mcp().value(-1.5) - 1.125).abs() < 1e-15);
    }

    #[test]
    fn mcp_continuity_by_grid() {
        // brute force: the largest jump between neighbouring grid values
        // near b*lambda shrinks with the step
        let p = mcp();
        let step = 1e-7;
        let mut worst: f64 = 0.0;
        let mut t = 2.9;
        while t < 3.1 {
            worst = worst.max((p.value(t + step) - p.value(t)).abs());
            t += step;
        }
        assert!(worst < 2e-7);
    }

    #[test]
    fn branch_continuity() {
        for p in [scad(), PenaltySpec::scad(0.3, 2.7)] {
            let lam = p.lambda;
            let a = p.shape;
            for k in [lam, a * lam] {
                let l = p.value(k * (1.0 - 1e-15));
                let r = p.value(k * (1.0 + 1e-15));
                assert!((l - r).abs() < 1e-12);
            }
        }
        let q: PenaltySpec<f64> = PenaltySpec::mcp(0.7, 1.7);
        let k = 0.7 * 1.7;
        assert!((q.value(k * (1.0 - 1e-15)) - q.value(k)).abs() < 1e-12);
    }

    #[test]
    fn derivatives() {
        assert!((scad().derivative(2.0).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(scad().derivative(5.0).unwrap(), 0.0);
        assert_eq!(mcp().derivative(3.0).unwrap(), 0.0);
        assert_eq!(PenaltySpec::lasso(0.4).derivative(7.0).unwrap(), 0.4);
        assert!(matches!(scad().derivative(0.0), Err(Error::NonPositiveTheta)));
        // finite difference check of the SCAD middle branch
        let h = 1e-6;
        let fd = (scad().value(2.0 + h) - scad().value(2.0 - h)) / (2.0 * h);
        assert!((fd - 0.6).abs() < 1e-6);
    }

    #[test]
    fn minimizer_examples() {
        assert_eq!(PenaltySpec::lasso(0.5).univariate_minimizer(2.0, 1.0), 1.5);
        for p in [PenaltySpec::lasso(0.5), scad(), mcp()] {
            assert_eq!(p.univariate_minimizer(0.0, 1.3), 0.0);
        }
        // SCAD, z = 2, w = 1: middle branch minimizer ((a-1) z - a lambda) / (a - 2) = 1.5/1.5
        let t = scad().univariate_minimizer(2.0, 1.0);
        assert!((t - 1.0).abs() < 1e-12, "{t}");
        // unbiased beyond a*lambda
        assert_eq!(scad().univariate_minimizer(4.0, 1.0), 4.0);
        assert_eq!(scad().univariate_minimizer(-4.0, 1.0), -4.0);
    }

    #[test]
    fn validation() {
        assert!(PenaltySpec::scad(1.0, 2.0).validate().is_err());
        assert!(PenaltySpec::mcp(1.0, 0.0).validate().is_err());
        assert!(PenaltySpec::lasso(-1.0).validate().is_err());
        assert!(PenaltySpec::with_default_shape(PenaltyFamily::Mcp, 0.1).validate().is_ok());
    }
}
