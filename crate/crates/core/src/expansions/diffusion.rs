//! Erlang-A (M/M/N+M) diffusion expansion under square-root staffing:
//! `E[Qₙ] = √R·q̄₁(x) + q̂₁(x) + eₙ,₁(x)`.
//!
//! The correction `q̂₁` is assembled from its published sub-terms `H_γ`, `A_*`,
//! `G` and `h_γ` exactly as written, with no algebraic simplification, so that
//! each factor can be audited separately.

use std::sync::Arc;

use super::{ExpansionSpec, ModelTag};
use crate::error::{Error, Result};
use crate::exact::CostParams;
use crate::numerics::{hazard, mills_ratio};

fn validate(x: f64, mu: f64, gamma: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("x must be finite, got {x}")));
    }
    for (name, v) in [("mu", mu), ("gamma", gamma)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

/// `hazard(y) − y` without cancellation for large `y`.
fn hazard_excess(y: f64) -> Result<f64> {
    if y > 50.0 {
        let t = 1.0 / (y * y);
        return Ok((1.0 + t * (-2.0 + t * (10.0 + t * (-74.0 + t * 706.0)))) / y);
    }
    Ok(hazard(y)? - y)
}

/// `H_γ(x) = φ(x√(μ/γ)) / Φ(−x√(μ/γ))`.
pub fn diffusion_hazard(x: f64, mu: f64, gamma: f64) -> Result<f64> {
    validate(x, mu, gamma)?;
    hazard(x * (mu / gamma).sqrt())
}

/// `A_*(x) = (1 + √(γ/μ)·G(x)·H_γ(x))⁻¹` with `G = Φ/φ`.
pub fn diffusion_weight(x: f64, mu: f64, gamma: f64) -> Result<f64> {
    let h = diffusion_hazard(x, mu, gamma)?;
    let g = mills_ratio(x)?;
    Ok(1.0 / (1.0 + (gamma / mu).sqrt() * g * h))
}

/// `h_γ(x) = −(1/6)·√(γ/μ)·x²·H_γ·[G·H_γ·√(μ/γ) − x·G·μ/γ + 1 + x·G]`.
pub fn diffusion_correction_factor(x: f64, mu: f64, gamma: f64) -> Result<f64> {
    let h = diffusion_hazard(x, mu, gamma)?;
    let g = mills_ratio(x)?;
    let bracket = g * h * (mu / gamma).sqrt() - x * g * mu / gamma + 1.0 + x * g;
    Ok(-(1.0 / 6.0) * (gamma / mu).sqrt() * x * x * h * bracket)
}

/// `√(γ/μ)·H_γ(x) − x`, which is strictly positive.
fn scaled_hazard_gap(x: f64, mu: f64, gamma: f64) -> Result<f64> {
    Ok((gamma / mu).sqrt() * hazard_excess(x * (mu / gamma).sqrt())?)
}

/// `q̄₁(x) = (√(γ/μ)·H_γ(x) − x)·(μ/γ)·A_*(x)`.
pub fn erlang_a_qbar1(x: f64, mu: f64, gamma: f64) -> Result<f64> {
    validate(x, mu, gamma)?;
    if mills_ratio(x)?.is_infinite() {
        return Ok(0.0);
    }
    Ok(scaled_hazard_gap(x, mu, gamma)? * (mu / gamma) * diffusion_weight(x, mu, gamma)?)
}

/// `q̂₁(x) = μ·q̄₁·[−h_γ·A_* − (1/6)·x²·H_γ·√(μ/γ) + (1/6)·√(γ/μ)·x·H_γ·(√(γ/μ)·H_γ − x)⁻¹]`.
pub fn erlang_a_qhat1(x: f64, mu: f64, gamma: f64) -> Result<f64> {
    validate(x, mu, gamma)?;
    // Beyond x ≈ 37.5, Φ/φ overflows while q̄₁ has long since underflowed.
    if mills_ratio(x)?.is_infinite() {
        return Ok(0.0);
    }
    let qbar = erlang_a_qbar1(x, mu, gamma)?;
    let big_h = diffusion_hazard(x, mu, gamma)?;
    let a_star = diffusion_weight(x, mu, gamma)?;
    let small_h = diffusion_correction_factor(x, mu, gamma)?;
    let bracket = -small_h * a_star - (1.0 / 6.0) * x * x * big_h * (mu / gamma).sqrt()
        + (1.0 / 6.0) * (gamma / mu).sqrt() * x * big_h / scaled_hazard_gap(x, mu, gamma)?;
    Ok(mu * qbar * bracket)
}

pub fn erlang_a_diffusion_expansion(mu: f64, gamma: f64, cost: CostParams) -> Result<ExpansionSpec> {
    validate(0.0, mu, gamma)?;
    let (h, c) = (cost.h(), cost.c());
    let load = move |n: f64| n / mu;
    Ok(ExpansionSpec {
        model: ModelTag::MmnaDiffusion,
        a_of_n: Arc::new(move |n| c * load(n)),
        b_of_n: Arc::new(move |n| load(n).sqrt()),
        c_of_n: Arc::new(|_| 1.0),
        pi_bar: Arc::new(move |x| erlang_a_qbar1(x, mu, gamma).map_or(f64::INFINITY, |q| c * x + h * q)),
        pi_hat: Arc::new(move |x| erlang_a_qhat1(x, mu, gamma).map_or(f64::INFINITY, |q| h * q)),
        g_of_n: Arc::new(move |n, x| load(n) + load(n).sqrt() * x),
        g_inverse: Arc::new(move |n, s| (s - load(n)) / load(n).sqrt()),
        domain_lo: Arc::new(move |n| -load(n).sqrt()),
        domain_hi: Arc::new(|_| f64::INFINITY),
        lo_closed: true,
        regime: None,
        notes: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{normal_cdf, normal_pdf};

    // (x, μ, γ, H_γ, A_*, q̄₁, q̂₁) evaluated at 50 digits.
    const TABLE: [(f64, f64, f64, f64, f64, f64, f64); 7] = [
        (1.0, 1.0, 1.0, 1.5251352761609812, 0.15865525393145705, 0.083315470587686298, 0.040328454086523892),
        (-1.0, 1.0, 1.0, 0.28759997093917836, 0.84134474606854295, 1.0833154705876863, -0.040328454086523892),
        (0.5, 1.0, 0.5, 1.29591858688115, 0.35717692012655872, 0.29742323633108006, 0.046510766833121283),
        (-1.0, 1.0, 0.5, 0.15929082326904374, 0.93122626523162605, 2.0722310284004243, -0.047436364511581309),
        (2.0, 2.0, 0.5, 4.2256071444894711, 0.025482726926602478, 0.011498170511431481, 0.051455751932939071),
        (-3.0, 1.0, 3.0, 0.092882983270077284, 0.95328712702081791, 1.0044081171694476, -0.012277849075033324),
        (3.0, 1.0, 1.0, 3.2830986549304365, 0.0013498980316300945, 0.0003821543170477236, 0.0022159242059690036),
    ];

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn reference_values() {
        for &(x, mu, gamma, h, a, qb, qh) in &TABLE {
            assert!(close(diffusion_hazard(x, mu, gamma).unwrap(), h, 1e-13), "H at {x}");
            assert!(close(diffusion_weight(x, mu, gamma).unwrap(), a, 1e-13), "A at {x}");
            assert!(close(erlang_a_qbar1(x, mu, gamma).unwrap(), qb, 1e-12), "q̄₁ at {x}");
            assert!(close(erlang_a_qhat1(x, mu, gamma).unwrap(), qh, 1e-11), "q̂₁ at {x}");
        }
    }

    #[test]
    fn identities_at_equal_rates() {
        assert!((diffusion_hazard(0.0, 2.0, 0.3).unwrap() - 0.7978845608028654).abs() < 1e-15);
        assert_eq!(diffusion_weight(0.0, 1.0, 1.0).unwrap(), 0.5);
        assert!((erlang_a_qbar1(0.0, 1.0, 1.0).unwrap() - 0.3989422804014327).abs() < 1e-15);
        for i in 0..=1000 {
            let x = -5.0 + 0.01 * i as f64;
            let tail = normal_cdf(-x).unwrap();
            let identity = normal_pdf(x).unwrap() - x * tail;
            assert!((erlang_a_qbar1(x, 1.0, 1.0).unwrap() - identity).abs() <= 1e-12, "x = {x}");
            assert!((diffusion_weight(x, 1.0, 1.0).unwrap() - tail).abs() <= 1e-12, "x = {x}");
            assert!((diffusion_hazard(x, 1.0, 1.0).unwrap() - hazard(x).unwrap()).abs() <= 1e-15 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn correction_is_regular() {
        for (mu, gamma) in [(1.0, 1.0), (1.0, 0.5), (2.0, 0.5), (1.0, 3.0)] {
            assert_eq!(erlang_a_qhat1(0.0, mu, gamma).unwrap(), 0.0);
            assert_eq!(diffusion_correction_factor(0.0, mu, gamma).unwrap(), 0.0);
            let mut prev = erlang_a_qhat1(-3.0, mu, gamma).unwrap();
            for i in 1..=6000 {
                let x = -3.0 + 0.001 * i as f64;
                assert!(scaled_hazard_gap(x, mu, gamma).unwrap() > 0.0);
                assert!(erlang_a_qbar1(x, mu, gamma).unwrap() > 0.0);
                let q = erlang_a_qhat1(x, mu, gamma).unwrap();
                assert!(q.is_finite() && (q - prev).abs() < 1e-2, "jump at x = {x}");
                prev = q;
            }
        }
    }

    #[test]
    fn hazard_gap_stays_positive_far_out() {
        for x in [10.0, 49.9, 50.1, 1e3, 1e8, 1e150] {
            let d = scaled_hazard_gap(x, 1.0, 1.0).unwrap();
            assert!(d > 0.0 && (d * x - 1.0).abs() < 0.02, "x = {x}");
        }
        // Series and direct evaluation agree at the switch point.
        let direct = hazard(50.0).unwrap() - 50.0;
        assert!((hazard_excess(50.0 + 1e-12).unwrap() - direct).abs() < 1e-12);
        for x in [37.0, 40.0, 1e3] {
            assert!(erlang_a_qhat1(x, 1.0, 1.0).unwrap().is_finite());
            assert!(erlang_a_qbar1(x, 1.0, 0.5).unwrap() >= 0.0);
        }
    }

    #[test]
    fn expansion_shape() {
        let spec = erlang_a_diffusion_expansion(1.0, 1.0, CostParams::new(2.0, 1.0).unwrap()).unwrap();
        assert_eq!(spec.staffing(100.0, -10.0).unwrap(), 0.0);
        assert!(spec.staffing(100.0, -10.5).is_err());
        let grid = [1e2, 1e3, 1e4, 1e5];
        assert!((spec.domain_lo)(1e3) < (spec.domain_lo)(1e2));
        let samples: Vec<f64> = (0..100).map(|i| -5.0 + 0.1 * i as f64).collect();
        assert!(spec.structural_violations(&grid, &samples).is_empty());
        // π̄₁' = c − h·Φ(−x) vanishes at Φ⁻¹(1 − c/h) = 0 for h = 2c.
        let step = 1e-6;
        let slope = (spec.pi_bar(step) - spec.pi_bar(-step)) / (2.0 * step);
        assert!(slope.abs() < 1e-8);
    }
}
