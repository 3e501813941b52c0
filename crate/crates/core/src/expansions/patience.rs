//! Patience-time distributions for the abandonment models.

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{find_root, integrate_interval, Bracket, Tolerance};

/// A patience distribution with a strictly positive, continuously
/// differentiable density on `[0, ∞)`.
pub trait PatienceDist: fmt::Debug + Send + Sync {
    /// `Ḡ(w) = P(patience > w)`.
    fn survival(&self, w: f64) -> f64;
    fn density(&self, w: f64) -> f64;
    fn density_derivative(&self, w: f64) -> f64;
    fn mean(&self) -> f64;
    fn label(&self) -> String;

    /// `Ḡ⁻¹(u)` for `u ∈ (0, 1]`, by bracketing and root finding.
    fn inverse_survival(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Domain(format!("survival level must lie in (0, 1], got {u}")));
        }
        if u == 1.0 {
            return Ok(0.0);
        }
        let mut hi = self.mean().max(f64::MIN_POSITIVE);
        while self.survival(hi) > u {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Bracket { lo: 0.0, hi });
            }
        }
        let tol = Tolerance::default().with_relative(1e-15).with_absolute(0.0);
        find_root(|w| self.survival(w) - u, Bracket::new(0.0, hi)?, &tol)
    }

    /// `∫₀ʷ Ḡ(v) dv`.
    fn integrated_survival(&self, w: f64) -> Result<f64> {
        if w <= 0.0 {
            return Ok(0.0);
        }
        let tol = Tolerance::default().with_relative(1e-13).with_absolute(0.0);
        integrate_interval(|v| self.survival(v), 0.0, w, &tol)
    }

    /// `∫₀^{Ḡ⁻¹(u)} Ḡ(v) dv` in closed form, when one exists.
    fn integrated_survival_to_level(&self, _u: f64) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("patience rate must be positive, got {rate}")));
        }
        Ok(Self { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl PatienceDist for Exponential {
    fn survival(&self, w: f64) -> f64 {
        if w <= 0.0 {
            1.0
        } else {
            (-self.rate * w).exp()
        }
    }

    fn density(&self, w: f64) -> f64 {
        self.rate * self.survival(w)
    }

    fn density_derivative(&self, w: f64) -> f64 {
        -self.rate * self.density(w)
    }

    fn mean(&self) -> f64 {
        1.0 / self.rate
    }

    fn label(&self) -> String {
        format!("exp:{}", self.rate)
    }

    fn inverse_survival(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Domain(format!("survival level must lie in (0, 1], got {u}")));
        }
        Ok(-u.ln() / self.rate)
    }

    fn integrated_survival(&self, w: f64) -> Result<f64> {
        if w <= 0.0 {
            return Ok(0.0);
        }
        Ok(-(-self.rate * w).exp_m1() / self.rate)
    }

    fn integrated_survival_to_level(&self, u: f64) -> Option<f64> {
        Some((1.0 - u.clamp(0.0, 1.0)) / self.rate)
    }
}

/// Two-phase mixture: rate `a` with probability `p`, rate `b` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperExponential {
    p: f64,
    a: f64,
    b: f64,
}

impl HyperExponential {
    pub fn new(p: f64, a: f64, b: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("mixing probability must lie in (0, 1), got {p}")));
        }
        for (name, rate) in [("a", a), ("b", b)] {
            if !(rate > 0.0) || !rate.is_finite() {
                return Err(Error::InvalidParameter(format!("phase rate {name} must be positive, got {rate}")));
            }
        }
        Ok(Self { p, a, b })
    }
}

impl PatienceDist for HyperExponential {
    fn survival(&self, w: f64) -> f64 {
        let w = w.max(0.0);
        self.p * (-self.a * w).exp() + (1.0 - self.p) * (-self.b * w).exp()
    }

    fn density(&self, w: f64) -> f64 {
        let w = w.max(0.0);
        self.p * self.a * (-self.a * w).exp() + (1.0 - self.p) * self.b * (-self.b * w).exp()
    }

    fn density_derivative(&self, w: f64) -> f64 {
        let w = w.max(0.0);
        -self.p * self.a * self.a * (-self.a * w).exp() - (1.0 - self.p) * self.b * self.b * (-self.b * w).exp()
    }

    fn mean(&self) -> f64 {
        self.p / self.a + (1.0 - self.p) / self.b
    }

    fn label(&self) -> String {
        format!("hyperexp:{},{},{}", self.p, self.a, self.b)
    }
}
