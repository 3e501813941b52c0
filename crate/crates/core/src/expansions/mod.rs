//! Asymptotic cost expansions `Πₙ(gₙ(x)) = aₙ + bₙ·π̄(x) + cₙ·[π̂(x) + εₙ(x)]`.
//!
//! Each model is packaged as an [`ExpansionSpec`]: the scale sequences, the
//! leading and correction cost terms, the staffing map `gₙ` with its inverse,
//! and the scaled domains `X̄ₙ`.

mod constrained;
mod diffusion;
mod fluid;
mod halfin_whitt;
mod patience;

pub use constrained::constrained_staffing_expansion;
pub use diffusion::{
    diffusion_correction_factor, diffusion_hazard, diffusion_weight, erlang_a_diffusion_expansion,
    erlang_a_qbar1, erlang_a_qhat1,
};
pub use fluid::{
    fluid_expansion, fluid_qbar, fluid_qhat, fluid_qhat_boundary, fluid_wbar, FluidWait, RhoConvention,
    SURVIVAL_FLOOR,
};
pub use halfin_whitt::{hw_delay_probability, hw_expansion, hw_qbar, hw_qhat, hw_x_for_delay};
pub use patience::{Exponential, HyperExponential, PatienceDist};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// `(n, x) ↦ value`, used for `gₙ` and its inverse.
pub type ScaledFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelTag {
    MmnHalfinWhitt,
    MmngFluid,
    MmnaDiffusion,
    ConstrainedStaffing,
    Synthetic,
}

impl ModelTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelTag::MmnHalfinWhitt => "mmn-hw",
            ModelTag::MmngFluid => "mmng-fluid",
            ModelTag::MmnaDiffusion => "mmna-diffusion",
            ModelTag::ConstrainedStaffing => "constrained",
            ModelTag::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mmn-hw" => Ok(ModelTag::MmnHalfinWhitt),
            "mmng-fluid" => Ok(ModelTag::MmngFluid),
            "mmna-diffusion" => Ok(ModelTag::MmnaDiffusion),
            "constrained" => Ok(ModelTag::ConstrainedStaffing),
            "synthetic" => Ok(ModelTag::Synthetic),
            other => Err(Error::InvalidParameter(format!("unknown model '{other}'"))),
        }
    }
}

/// Where the leading-order optimizer puts the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Every minimizer of π̄ staffs strictly below the offered load.
    Overloaded,
    /// `1/μ` belongs to the argmin set: the fluid prescription lands on the
    /// critical boundary, where its residual need not vanish.
    Critical,
}

#[derive(Clone)]
pub struct ExpansionSpec {
    pub model: ModelTag,
    pub a_of_n: ScalarFn,
    pub b_of_n: ScalarFn,
    pub c_of_n: ScalarFn,
    pub pi_bar: ScalarFn,
    pub pi_hat: ScalarFn,
    pub g_of_n: ScaledFn,
    pub g_inverse: ScaledFn,
    pub domain_lo: ScalarFn,
    pub domain_hi: ScalarFn,
    /// Whether `domain_lo(n)` itself belongs to `X̄ₙ`.
    pub lo_closed: bool,
    pub regime: Option<Regime>,
    pub notes: Vec<String>,
}

impl fmt::Debug for ExpansionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExpansionSpec")
            .field("model", &self.model)
            .field("lo_closed", &self.lo_closed)
            .field("regime", &self.regime)
            .field("notes", &self.notes)
            .finish_non_exhaustive()
    }
}

impl ExpansionSpec {
    /// A bare spec for experiments with hand-written cost terms: `aₙ = 0`,
    /// `bₙ = √n`, `cₙ = 1`, `gₙ(x) = x`, `X̄ₙ = ℝ`.
    pub fn synthetic(pi_bar: impl Fn(f64) -> f64 + Send + Sync + 'static, pi_hat: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            model: ModelTag::Synthetic,
            a_of_n: Arc::new(|_| 0.0),
            b_of_n: Arc::new(f64::sqrt),
            c_of_n: Arc::new(|_| 1.0),
            pi_bar: Arc::new(pi_bar),
            pi_hat: Arc::new(pi_hat),
            g_of_n: Arc::new(|_, x| x),
            g_inverse: Arc::new(|_, s| s),
            domain_lo: Arc::new(|_| f64::NEG_INFINITY),
            domain_hi: Arc::new(|_| f64::INFINITY),
            lo_closed: false,
            regime: None,
            notes: Vec::new(),
        }
    }

    pub fn with_scales(
        mut self,
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
        b: impl Fn(f64) -> f64 + Send + Sync + 'static,
        c: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.a_of_n = Arc::new(a);
        self.b_of_n = Arc::new(b);
        self.c_of_n = Arc::new(c);
        self
    }

    pub fn with_staffing_map(
        mut self,
        g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        inverse: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.g_of_n = Arc::new(g);
        self.g_inverse = Arc::new(inverse);
        self
    }

    pub fn with_domain(
        mut self,
        lo: impl Fn(f64) -> f64 + Send + Sync + 'static,
        hi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lo_closed: bool,
    ) -> Self {
        self.domain_lo = Arc::new(lo);
        self.domain_hi = Arc::new(hi);
        self.lo_closed = lo_closed;
        self
    }

    pub fn a(&self, n: f64) -> f64 {
        (self.a_of_n)(n)
    }

    pub fn b(&self, n: f64) -> f64 {
        (self.b_of_n)(n)
    }

    pub fn c(&self, n: f64) -> f64 {
        (self.c_of_n)(n)
    }

    pub fn pi_bar(&self, x: f64) -> f64 {
        (self.pi_bar)(x)
    }

    pub fn pi_hat(&self, x: f64) -> f64 {
        (self.pi_hat)(x)
    }

    pub fn in_domain(&self, n: f64, x: f64) -> bool {
        let lo = (self.domain_lo)(n);
        let above = if self.lo_closed { x >= lo } else { x > lo };
        above && x <= (self.domain_hi)(n)
    }

    /// `gₙ(x)`, the staffing level for scaled decision `x ∈ X̄ₙ`.
    pub fn staffing(&self, n: f64, x: f64) -> Result<f64> {
        if !x.is_finite() || !self.in_domain(n, x) {
            return Err(Error::Domain(format!(
                "x = {x} outside X̄ₙ = [{}, {}] at n = {n}",
                (self.domain_lo)(n),
                (self.domain_hi)(n)
            )));
        }
        Ok((self.g_of_n)(n, x))
    }

    /// `gₙ⁻¹(staffing)`.
    pub fn scaled(&self, n: f64, staffing: f64) -> f64 {
        (self.g_inverse)(n, staffing)
    }

    /// `aₙ + bₙ·π̄(x) + cₙ·π̂(x)`: the expansion with `εₙ` dropped.
    pub fn approximate_cost(&self, n: f64, x: f64) -> f64 {
        self.a(n) + self.b(n) * self.pi_bar(x) + self.c(n) * self.pi_hat(x)
    }

    /// Checks the structural requirements on an increasing `n`-grid: `bₙ`
    /// increasing, `cₙ/bₙ` decreasing, `gₙ` strictly increasing on
    /// `samples`, nested domains and a round-tripping inverse. Returns the
    /// list of violations.
    pub fn structural_violations(&self, n_grid: &[f64], samples: &[f64]) -> Vec<String> {
        let mut out = Vec::new();
        for w in n_grid.windows(2) {
            let (n0, n1) = (w[0], w[1]);
            if !(self.b(n1) > self.b(n0)) {
                out.push(format!("b_n not increasing between n = {n0} and n = {n1}"));
            }
            if !(self.c(n1) / self.b(n1) < self.c(n0) / self.b(n0)) {
                out.push(format!("c_n/b_n not decreasing between n = {n0} and n = {n1}"));
            }
            if (self.domain_lo)(n1) > (self.domain_lo)(n0) || (self.domain_hi)(n1) < (self.domain_hi)(n0) {
                out.push(format!("X̄ₙ not nested between n = {n0} and n = {n1}"));
            }
        }
        for &n in n_grid {
            let inside: Vec<f64> = samples.iter().copied().filter(|&x| self.in_domain(n, x)).collect();
            for w in inside.windows(2) {
                if w[1] > w[0] && !((self.g_of_n)(n, w[1]) > (self.g_of_n)(n, w[0])) {
                    out.push(format!("g_n not strictly increasing at n = {n} near x = {}", w[0]));
                    break;
                }
            }
            for &x in &inside {
                let back = self.scaled(n, (self.g_of_n)(n, x));
                if (back - x).abs() > 1e-12 * (1.0 + x.abs()) * (1.0 + n.sqrt()) {
                    out.push(format!("g_n inverse does not round-trip at n = {n}, x = {x}"));
                    break;
                }
            }
        }
        out
    }
}
