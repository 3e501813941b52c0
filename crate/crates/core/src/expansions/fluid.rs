//! Fluid expansion of the M/M/N+G queue under `gₙ(x) = n·x`:
//! `E[Qₙ] = n·q̄(x) + q̂(x) + eₙ(x)`, valid in the overloaded regime `xμ < 1`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::{ExpansionSpec, ModelTag, PatienceDist, Regime};
use crate::error::{Error, Result};
use crate::exact::CostParams;
use crate::numerics::{argmin_regions, Bracket, Tolerance};

/// Survival level below which `w̄` is capped when `xμ → 0`.
pub const SURVIVAL_FLOOR: f64 = 1e-12;

/// `w̄(x)`, with `capped` set when `xμ < SURVIVAL_FLOOR` and the returned wait
/// is `Ḡ⁻¹(SURVIVAL_FLOOR)` rather than the (possibly infinite) true value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidWait {
    pub w: f64,
    pub capped: bool,
}

/// Which load enters the denominator of the fluid correction term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhoConvention {
    /// `ρ = 1/(xμ)`, the fluid utilization under `gₙ(x) = n·x`.
    #[default]
    Utilization,
    /// `ρ = 1`.
    Unit,
}

impl fmt::Display for RhoConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RhoConvention::Utilization => "utilization",
            RhoConvention::Unit => "unit",
        })
    }
}

impl FromStr for RhoConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "utilization" => Ok(RhoConvention::Utilization),
            "unit" => Ok(RhoConvention::Unit),
            other => Err(Error::InvalidParameter(format!("unknown rho convention '{other}'"))),
        }
    }
}

fn validate(x: f64, mu: f64) -> Result<()> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("service rate must be positive, got {mu}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("fluid terms need finite x ≥ 0, got {x}")));
    }
    Ok(())
}

/// `w̄(x) = Ḡ⁻¹(min(1, xμ))`.
pub fn fluid_wbar(x: f64, mu: f64, patience: &dyn PatienceDist) -> Result<FluidWait> {
    validate(x, mu)?;
    let u = (x * mu).min(1.0);
    if u < SURVIVAL_FLOOR {
        return Ok(FluidWait { w: patience.inverse_survival(SURVIVAL_FLOOR)?, capped: true });
    }
    Ok(FluidWait { w: patience.inverse_survival(u)?, capped: false })
}

/// `q̄(x) = ∫₀^{w̄(x)} Ḡ(w) dw`; zero once `xμ ≥ 1`.
pub fn fluid_qbar(x: f64, mu: f64, patience: &dyn PatienceDist) -> Result<f64> {
    validate(x, mu)?;
    let u = x * mu;
    if u >= 1.0 {
        return Ok(0.0);
    }
    if let Some(v) = patience.integrated_survival_to_level(u) {
        return Ok(v);
    }
    patience.integrated_survival(fluid_wbar(x, mu, patience)?.w)
}

/// `q̂(x) = −½·(g′(w̄)/(ρ·g(w̄)²) + 1)` for `0 < xμ < 1`.
pub fn fluid_qhat(x: f64, mu: f64, patience: &dyn PatienceDist, convention: RhoConvention) -> Result<f64> {
    validate(x, mu)?;
    let u = x * mu;
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Regime(format!(
            "the fluid correction needs 0 < xμ < 1 (overload), got xμ = {u}"
        )));
    }
    let w = fluid_wbar(x, mu, patience)?.w;
    let rho = match convention {
        RhoConvention::Utilization => 1.0 / u.max(SURVIVAL_FLOOR),
        RhoConvention::Unit => 1.0,
    };
    let g = patience.density(w);
    Ok(-0.5 * (patience.density_derivative(w) / (rho * g * g) + 1.0))
}

/// Limit of `q̂` as `xμ → 1⁻`, where `w̄ → 0` and both conventions give `ρ → 1`.
pub fn fluid_qhat_boundary(patience: &dyn PatienceDist) -> f64 {
    let g = patience.density(0.0);
    -0.5 * (patience.density_derivative(0.0) / (g * g) + 1.0)
}

pub fn fluid_expansion(
    mu: f64,
    cost: CostParams,
    patience: Arc<dyn PatienceDist>,
    convention: RhoConvention,
) -> Result<ExpansionSpec> {
    validate(0.0, mu)?;
    let (h, c) = (cost.h(), cost.c());
    let boundary = fluid_qhat_boundary(patience.as_ref());
    if !boundary.is_finite() {
        return Err(Error::Regime("fluid correction has no finite limit at xμ = 1".into()));
    }

    let bar_patience = Arc::clone(&patience);
    let pi_bar = move |x: f64| {
        if !(x >= 0.0) {
            return f64::INFINITY;
        }
        fluid_qbar(x, mu, bar_patience.as_ref()).map_or(f64::INFINITY, |q| c * x + h * q)
    };
    let hat_patience = Arc::clone(&patience);
    let pi_hat = move |x: f64| {
        if !(x >= 0.0) {
            return f64::INFINITY;
        }
        let u = x * mu;
        let q = if u >= 1.0 {
            Ok(boundary)
        } else {
            // x = 0 is evaluated at the capped wait, like w̄ itself.
            fluid_qhat(x.max(SURVIVAL_FLOOR / mu), mu, hat_patience.as_ref(), convention)
        };
        q.map_or(f64::INFINITY, |q| h * q)
    };

    let probe = Bracket::new(0.0, 2.0 / mu)?;
    let tol = Tolerance::default().with_absolute(1e-9);
    let regions = argmin_regions(&pi_bar, probe, &tol)?;
    let critical_x = 1.0 / mu;
    let slack = 1e-6 * (1.0 + critical_x);
    let critical = regions.iter().any(|r| r.lo - slack <= critical_x && critical_x <= r.hi + slack);
    let regime = if critical { Regime::Critical } else { Regime::Overloaded };

    let mut notes = vec![format!(
        "π̂ extended to xμ ≥ 1 by its limit {boundary} at xμ = 1; patience {}; rho convention {convention}",
        patience.label()
    )];
    if critical {
        notes.push("1/μ lies in the argmin set of π̄: the fluid prescription sits on the critical boundary".into());
    }

    Ok(ExpansionSpec {
        model: ModelTag::MmngFluid,
        a_of_n: Arc::new(|_| 0.0),
        b_of_n: Arc::new(|n| n),
        c_of_n: Arc::new(|_| 1.0),
        pi_bar: Arc::new(pi_bar),
        pi_hat: Arc::new(pi_hat),
        g_of_n: Arc::new(|n, x| n * x),
        g_inverse: Arc::new(|n, s| s / n),
        domain_lo: Arc::new(|_| 0.0),
        domain_hi: Arc::new(|_| f64::INFINITY),
        lo_closed: true,
        regime: Some(regime),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansions::{Exponential, HyperExponential};

    fn exp(rate: f64) -> Exponential {
        Exponential::new(rate).unwrap()
    }

    #[test]
    fn exponential_closed_forms() {
        let e1 = exp(1.0);
        assert!((fluid_wbar(0.5, 1.0, &e1).unwrap().w - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(fluid_wbar(1.0, 1.0, &e1).unwrap(), FluidWait { w: 0.0, capped: false });
        assert_eq!(fluid_wbar(3.0, 1.0, &e1).unwrap().w, 0.0);
        let cap = fluid_wbar(0.0, 1.0, &e1).unwrap();
        assert!(cap.capped && (cap.w - 1e12f64.ln()).abs() < 1e-12);

        assert!((fluid_qbar(0.5, 1.0, &e1).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(fluid_qbar(1.0, 1.0, &e1).unwrap(), 0.0);
        assert!((fluid_qbar(0.25, 1.0, &exp(2.0)).unwrap() - 0.375).abs() < 1e-15);
        for gamma in [0.5, 1.0, 3.0] {
            for mu in [0.5, 1.0, 2.0] {
                for i in 0..=100 {
                    let x = i as f64 / 100.0 / mu;
                    let q = fluid_qbar(x, mu, &exp(gamma)).unwrap();
                    assert!((q - (1.0 - x * mu) / gamma).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn exponential_correction() {
        let e1 = exp(1.0);
        for x in [0.01, 0.3, 0.5, 0.9, 0.999] {
            assert!(fluid_qhat(x, 1.0, &e1, RhoConvention::Utilization).unwrap().abs() < 1e-12);
        }
        assert!((fluid_qhat(0.5, 1.0, &e1, RhoConvention::Unit).unwrap() - 0.5).abs() < 1e-14);
        assert!(matches!(fluid_qhat(1.0, 1.0, &e1, RhoConvention::Utilization), Err(Error::Regime(_))));
        assert!(matches!(fluid_qhat(0.0, 1.0, &e1, RhoConvention::Utilization), Err(Error::Regime(_))));
        assert_eq!(fluid_qhat_boundary(&e1), 0.0);
    }

    // (x, μ, w̄, q̄, q̂ utilization, q̂ unit) for hyperexponential(0.3, 0.5, 2),
    // evaluated at 50 digits.
    const HYPER: [(f64, f64, f64, f64, f64, f64); 3] = [
        (0.5, 1.0, 0.48616902743287006, 0.34710764430759505, 0.16732754610785352, 0.83465509221570703),
        (0.8, 1.0, 0.14736738997116813, 0.13196553228281484, 0.11699305514944136, 0.27124131893680165),
        (0.2, 2.0, 0.66557093259041084, 0.42738420809249064, 0.19633659821372921, 1.2408414955343229),
    ];

    #[test]
    fn hyperexponential_reference() {
        let d = HyperExponential::new(0.3, 0.5, 2.0).unwrap();
        for &(x, mu, w, q, util, unit) in &HYPER {
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + b.abs());
            assert!(close(fluid_wbar(x, mu, &d).unwrap().w, w));
            assert!(close(fluid_qbar(x, mu, &d).unwrap(), q));
            assert!(close(fluid_qhat(x, mu, &d, RhoConvention::Utilization).unwrap(), util));
            assert!(close(fluid_qhat(x, mu, &d, RhoConvention::Unit).unwrap(), unit));
        }
    }

    #[test]
    fn regime_flag() {
        let patience: Arc<dyn PatienceDist> = Arc::new(exp(1.0));
        let critical = fluid_expansion(1.0, CostParams::new(2.0, 1.0).unwrap(), patience.clone(), RhoConvention::Utilization).unwrap();
        assert_eq!(critical.regime, Some(Regime::Critical));
        assert!((critical.pi_bar(0.3) - (0.3 + 2.0 * 0.7)).abs() < 1e-14);

        let over = fluid_expansion(1.0, CostParams::new(0.5, 1.0).unwrap(), patience.clone(), RhoConvention::Utilization).unwrap();
        assert_eq!(over.regime, Some(Regime::Overloaded));
        let idle = fluid_expansion(1.0, CostParams::new(0.0, 1.0).unwrap(), patience, RhoConvention::Utilization).unwrap();
        assert_eq!(idle.regime, Some(Regime::Overloaded));
    }

    #[test]
    fn expansion_shape() {
        let patience: Arc<dyn PatienceDist> = Arc::new(HyperExponential::new(0.3, 0.5, 2.0).unwrap());
        let spec = fluid_expansion(1.0, CostParams::new(2.0, 1.0).unwrap(), patience, RhoConvention::Unit).unwrap();
        assert_eq!(spec.staffing(100.0, 0.8).unwrap(), 80.0);
        assert_eq!(spec.staffing(100.0, 0.0).unwrap(), 0.0);
        assert!(spec.staffing(100.0, -0.1).is_err());
        assert!(spec.pi_hat(0.0).is_finite());
        assert!(spec.pi_hat(1.5).is_finite());
        assert!((spec.pi_hat(1.0 - 1e-9) - spec.pi_hat(1.0)).abs() < 1e-6);
        let grid = [1e2, 1e3, 1e4];
        let samples: Vec<f64> = (0..40).map(|i| 0.05 * i as f64).collect();
        assert!(spec.structural_violations(&grid, &samples).is_empty());
    }
}
