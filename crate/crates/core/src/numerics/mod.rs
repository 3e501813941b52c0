//! Numerical building blocks shared by every other module.

mod minimize;
mod normal;
mod quadrature;
mod roots;

pub use minimize::{argmin_regions, argmin_set, golden_section, minimize_scalar, ArgminRegion};
pub use normal::{hazard, mills_ratio, normal_cdf, normal_pdf, normal_pdf_cdf, upper_mills_ratio};
pub use quadrature::{integrate_interval, integrate_semiinfinite, integrate_semiinfinite_log};
pub use roots::find_root;

use crate::error::{Error, Result};

/// Stopping rule shared by the iterative routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
    pub max_iterations: usize,
}

impl Tolerance {
    pub fn new(relative: f64, absolute: f64, max_iterations: usize) -> Result<Self> {
        if !(relative > 0.0) || !relative.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "relative tolerance must be positive, got {relative}"
            )));
        }
        if !(absolute >= 0.0) || !absolute.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "absolute tolerance must be non-negative, got {absolute}"
            )));
        }
        if max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        Ok(Self { relative, absolute, max_iterations })
    }

    pub fn with_relative(self, relative: f64) -> Self {
        Self { relative, ..self }
    }

    pub fn with_absolute(self, absolute: f64) -> Self {
        Self { absolute, ..self }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { relative: 1e-10, absolute: 1e-12, max_iterations: 200 }
    }
}

/// A finite interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
            return Err(Error::Domain(format!("invalid bracket [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Search domain for [`minimize_scalar`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Interval(Bracket),
    /// `(lo, ∞)`, open at `lo`. The search starts `start_offset` above `lo`
    /// and expands geometrically.
    HalfLine { lo: f64, start_offset: f64 },
    /// The whole real line, expanded geometrically in both directions.
    Real,
}
