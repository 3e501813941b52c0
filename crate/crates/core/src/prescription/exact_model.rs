//! Exact cost evaluators behind a common interface, so gaps and residuals can
//! be measured the same way for every expansion. A model describes a whole
//! family of systems; every call names the arrival rate `n`.

use crate::error::{Error, Result};
use crate::exact::{
    default_search_window, erlang_a_excess_cost, erlang_a_expected_queue, erlang_a_optimal_excess,
    mmn_excess_cost, mmn_expected_queue, mmn_optimal_excess, CostParams, ExactOptimum, QueueParams,
};

/// Staffing levels the exact model accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lattice {
    Continuous,
    Integer,
}

pub trait ExactModel: Send + Sync {
    fn lattice(&self) -> Lattice;
    /// A constant subtracted from every cost before differencing (`c·n/μ`).
    fn cost_offset(&self, n: f64) -> f64;
    /// `Πₙ(staffing) − cost_offset(n)`.
    fn excess_cost(&self, n: f64, staffing: f64) -> Result<f64>;
    fn expected_queue(&self, n: f64, staffing: f64) -> Result<f64>;
    /// The exact optimum as `(staffing, excess cost)`. `hint` is a staffing
    /// level believed to be close, used by models that search locally.
    fn optimum_excess(&self, n: f64, hint: f64) -> Result<(f64, f64)>;

    fn cost(&self, n: f64, staffing: f64) -> Result<f64> {
        Ok(self.excess_cost(n, staffing)? + self.cost_offset(n))
    }

    fn optimum(&self, n: f64, hint: f64) -> Result<ExactOptimum> {
        let (staffing, excess) = self.optimum_excess(n, hint)?;
        Ok(ExactOptimum { staffing, cost: excess + self.cost_offset(n) })
    }
}

/// M/M/N with a real-valued server count.
#[derive(Debug, Clone, Copy)]
pub struct MmnExact {
    pub mu: f64,
    pub cost: CostParams,
}

impl MmnExact {
    pub fn new(mu: f64, cost: CostParams) -> Result<Self> {
        QueueParams::new(1.0, mu)?;
        Ok(Self { mu, cost })
    }

    fn params(&self, n: f64) -> Result<QueueParams> {
        QueueParams::new(n, self.mu)
    }
}

impl ExactModel for MmnExact {
    fn lattice(&self) -> Lattice {
        Lattice::Continuous
    }

    fn cost_offset(&self, n: f64) -> f64 {
        self.cost.c() * n / self.mu
    }

    fn excess_cost(&self, n: f64, staffing: f64) -> Result<f64> {
        mmn_excess_cost(&self.params(n)?, &self.cost, staffing)
    }

    fn expected_queue(&self, n: f64, staffing: f64) -> Result<f64> {
        mmn_expected_queue(&self.params(n)?, staffing)
    }

    fn optimum_excess(&self, n: f64, _hint: f64) -> Result<(f64, f64)> {
        mmn_optimal_excess(&self.params(n)?, &self.cost)
    }
}

/// M/M/N+M with an integer server count.
#[derive(Debug, Clone, Copy)]
pub struct ErlangAExact {
    pub mu: f64,
    pub gamma: f64,
    pub cost: CostParams,
}

impl ErlangAExact {
    pub fn new(mu: f64, gamma: f64, cost: CostParams) -> Result<Self> {
        QueueParams::with_abandonment(1.0, mu, gamma)?;
        Ok(Self { mu, gamma, cost })
    }

    fn params(&self, n: f64) -> Result<QueueParams> {
        QueueParams::with_abandonment(n, self.mu, self.gamma)
    }

    fn servers(staffing: f64) -> Result<u64> {
        if !(staffing >= 0.0) || staffing.fract() != 0.0 || staffing > u32::MAX as f64 {
            return Err(Error::Domain(format!(
                "the Erlang-A model needs a non-negative integer staffing, got {staffing}"
            )));
        }
        Ok(staffing as u64)
    }
}

impl ExactModel for ErlangAExact {
    fn lattice(&self) -> Lattice {
        Lattice::Integer
    }

    fn cost_offset(&self, n: f64) -> f64 {
        self.cost.c() * n / self.mu
    }

    fn excess_cost(&self, n: f64, staffing: f64) -> Result<f64> {
        erlang_a_excess_cost(&self.params(n)?, &self.cost, Self::servers(staffing)?)
    }

    fn expected_queue(&self, n: f64, staffing: f64) -> Result<f64> {
        erlang_a_expected_queue(&self.params(n)?, Self::servers(staffing)?)
    }

    /// Searches a window around `hint`, re-centring and doubling it (up to
    /// eight times) while the minimizer sits on its edge.
    fn optimum_excess(&self, n: f64, hint: f64) -> Result<(f64, f64)> {
        let params = self.params(n)?;
        let mut center = if hint.is_finite() { hint } else { params.offered_load() };
        let mut window = default_search_window(&params);
        for _ in 0..8 {
            match erlang_a_optimal_excess(&params, &self.cost, center, window) {
                Ok((servers, excess)) => return Ok((servers as f64, excess)),
                Err(Error::WindowTooSmall { argmin, .. }) => {
                    center = argmin as f64;
                    window *= 2;
                }
                Err(e) => return Err(e),
            }
        }
        Err(Error::Optimization(format!("no interior Erlang-A optimum found near staffing {hint}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{erlang_a_cost, mmn_cost};

    #[test]
    fn models_agree_with_direct_evaluators() {
        let cost = CostParams::new(2.0, 1.0).unwrap();
        let mmn = MmnExact::new(1.0, cost).unwrap();
        let p = QueueParams::new(50.0, 1.0).unwrap();
        assert!((mmn.cost(50.0, 57.5).unwrap() - mmn_cost(&p, &cost, 57.5).unwrap()).abs() < 1e-12);
        assert!(mmn.excess_cost(50.0, 49.0).is_err());

        let ea = ErlangAExact::new(1.0, 0.5, cost).unwrap();
        let q = QueueParams::with_abandonment(50.0, 1.0, 0.5).unwrap();
        assert!((ea.cost(50.0, 52.0).unwrap() - erlang_a_cost(&q, &cost, 52).unwrap()).abs() < 1e-12);
        assert!(ea.excess_cost(50.0, 52.5).is_err());
        assert!(ea.excess_cost(50.0, -1.0).is_err());
    }

    #[test]
    fn erlang_a_optimum_recovers_from_a_bad_hint() {
        let cost = CostParams::new(2.0, 1.0).unwrap();
        let ea = ErlangAExact::new(1.0, 1.0, cost).unwrap();
        let good = ea.optimum(400.0, 400.0).unwrap();
        let far = ea.optimum(400.0, 1500.0).unwrap();
        assert_eq!(good, far);
        let brute = (300..=500)
            .map(|s| (s, ea.excess_cost(400.0, s as f64).unwrap()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(good.staffing, brute.0 as f64);
    }
}
