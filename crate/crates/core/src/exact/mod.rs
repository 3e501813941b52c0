//! Exact steady-state evaluators: Erlang-C with a real-valued server count,
//! Erlang-A by birth-death recursion, their linear staffing costs, and the
//! exact optimizers the asymptotic prescriptions are measured against.

mod erlang_a;
mod erlang_c;

pub use erlang_a::{
    default_search_window, erlang_a_cost, erlang_a_distribution, erlang_a_excess_cost, erlang_a_expected_queue,
    erlang_a_optimal_integer, StationaryDistribution,
};
pub use erlang_c::{
    erlang_c_integer, erlang_c_real, mmn_cost, mmn_excess_cost, mmn_expected_queue,
    mmn_min_servers_wait_prob, mmn_optimal, ERLANG_C_QUADRATURE,
};

pub(crate) use erlang_a::erlang_a_optimal_excess;
pub(crate) use erlang_c::mmn_optimal_excess;

use crate::error::{Error, Result};

/// One system in the sequence: arrival rate `n`, service rate `mu` and, for
/// the abandonment model, an exponential patience rate `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueParams {
    n: f64,
    mu: f64,
    gamma: Option<f64>,
}

impl QueueParams {
    pub fn new(n: f64, mu: f64) -> Result<Self> {
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter(format!("arrival rate must be positive, got {n}")));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("service rate must be positive, got {mu}")));
        }
        Ok(Self { n, mu, gamma: None })
    }

    pub fn with_abandonment(n: f64, mu: f64, gamma: f64) -> Result<Self> {
        let p = Self::new(n, mu)?;
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("abandonment rate must be positive, got {gamma}")));
        }
        Ok(Self { gamma: Some(gamma), ..p })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    /// `R = n/μ`, in units of server capacity.
    pub fn offered_load(&self) -> f64 {
        self.n / self.mu
    }

    pub(crate) fn require_gamma(&self) -> Result<f64> {
        self.gamma
            .ok_or_else(|| Error::InvalidParameter("abandonment rate gamma is required for the Erlang-A model".into()))
    }
}

/// Linear costs: `h` per waiting customer per unit time, `c` per server per unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    h: f64,
    c: f64,
}

impl CostParams {
    pub fn new(h: f64, c: f64) -> Result<Self> {
        if !(h >= 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!("waiting cost must be non-negative, got {h}")));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("capacity cost must be positive, got {c}")));
        }
        Ok(Self { h, c })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Exact optimizer of `Πₙ`: the staffing level (integer-valued for Erlang-A)
/// and the optimal cost `Πₙ*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOptimum {
    pub staffing: f64,
    pub cost: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_validation() {
        assert!(QueueParams::new(0.0, 1.0).is_err());
        assert!(QueueParams::new(1.0, -1.0).is_err());
        assert!(QueueParams::with_abandonment(1.0, 1.0, 0.0).is_err());
        assert!(CostParams::new(-1.0, 1.0).is_err());
        assert!(CostParams::new(1.0, 0.0).is_err());
        assert!(CostParams::new(0.0, 1.0).is_ok());
        let p = QueueParams::new(10.0, 2.0).unwrap();
        assert_eq!(p.offered_load(), 5.0);
        assert!(p.require_gamma().is_err());
    }
}
