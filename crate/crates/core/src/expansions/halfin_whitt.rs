//! Halfin-Whitt expansion of the M/M/N queue under square-root staffing
//! `gₙ(x) = R + √R·x`, `R = n/μ`:
//! `E[Qₙ] = √R·q̄(x) + q̂(x) + eₙ(x)`.

use std::sync::Arc;

use super::{ExpansionSpec, ModelTag};
use crate::error::{Error, Result};
use crate::exact::CostParams;
use crate::numerics::{find_root, mills_ratio, Bracket, Tolerance};

fn require_positive(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Halfin-Whitt terms need finite x > 0, got {x}")));
    }
    Ok(())
}

/// `(r, s)` with `r = 1/(1 + x·M(x))` and `s = x·M(x)/(1 + x·M(x))`.
/// Written so that neither overflows when `M(x)` does.
fn split(x: f64) -> Result<(f64, f64)> {
    let xm = x * mills_ratio(x)?;
    if xm.is_infinite() {
        return Ok((0.0, 1.0));
    }
    Ok((1.0 / (1.0 + xm), xm / (1.0 + xm)))
}

/// `q̄(x) = (1/x)·(1 + x·Φ(x)/φ(x))⁻¹`.
pub fn hw_qbar(x: f64) -> Result<f64> {
    require_positive(x)?;
    Ok(split(x)?.0 / x)
}

/// `q̂(x) = x²q̄²·(1/3 + x²/6 + M(x)·(x/2 + x³/6))`.
///
/// With `r = x·q̄` the last term is `r·s·(1/2 + x²/6)`, which avoids squaring a
/// subnormal `q̄` in the far tail.
pub fn hw_qhat(x: f64) -> Result<f64> {
    require_positive(x)?;
    let (r, s) = split(x)?;
    let x2 = x * x;
    Ok(r * r * (1.0 / 3.0 + x2 / 6.0) + r * s * (0.5 + x2 / 6.0))
}

/// Halfin-Whitt approximation of the delay probability, `(1 + x·M(x))⁻¹`.
pub fn hw_delay_probability(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("x must be finite, got {x}")));
    }
    Ok(1.0 / (1.0 + x * mills_ratio(x)?))
}

/// The safety factor `x` with `hw_delay_probability(x) = alpha`.
pub fn hw_x_for_delay(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    // The delay probability falls from 1 at x = 0 to 0; bracket then solve.
    let mut hi = 1.0;
    while hw_delay_probability(hi)? > alpha {
        hi *= 2.0;
    }
    let tol = Tolerance::default().with_relative(1e-15).with_absolute(0.0);
    find_root(|x| hw_delay_probability(x).unwrap_or(f64::NAN) - alpha, Bracket::new(0.0, hi)?, &tol)
}

pub fn hw_expansion(mu: f64, cost: CostParams) -> Result<ExpansionSpec> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("service rate must be positive, got {mu}")));
    }
    let (h, c) = (cost.h(), cost.c());
    let mut notes = Vec::new();
    if h == 0.0 {
        notes.push("degenerate objective: h = 0 makes π̄ = c·x, minimized at the open boundary x → 0".into());
    }
    let load = move |n: f64| n / mu;
    Ok(ExpansionSpec {
        model: ModelTag::MmnHalfinWhitt,
        a_of_n: Arc::new(move |n| c * load(n)),
        b_of_n: Arc::new(move |n| load(n).sqrt()),
        c_of_n: Arc::new(|_| 1.0),
        pi_bar: Arc::new(move |x| match hw_qbar(x) {
            Ok(q) => c * x + h * q,
            Err(_) => f64::INFINITY,
        }),
        pi_hat: Arc::new(move |x| match hw_qhat(x) {
            Ok(q) => h * q,
            Err(_) => f64::INFINITY,
        }),
        g_of_n: Arc::new(move |n, x| load(n) + load(n).sqrt() * x),
        g_inverse: Arc::new(move |n, s| (s - load(n)) / load(n).sqrt()),
        domain_lo: Arc::new(|_| 0.0),
        domain_hi: Arc::new(|_| f64::INFINITY),
        lo_closed: false,
        regime: None,
        notes,
    })
}
