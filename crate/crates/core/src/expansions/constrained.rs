//! Minimal staffing subject to a delay-probability target in M/M/N.
//!
//! The objective is the server count itself, `N = R + √R·x`, so `π̄(x) = x`,
//! `π̂ ≡ 0` and the constraint lives entirely in the scaled feasible set
//! `X̄ₙ = [(N_min(n) − R)/√R, ∞)`. Because `N_min` is an integer the lower end
//! of that set moves up and down with `n`, so the sets are not nested.

use std::sync::Arc;

use super::{ExpansionSpec, ModelTag};
use crate::error::{Error, Result};
use crate::exact::{mmn_min_servers_wait_prob, QueueParams};

pub fn constrained_staffing_expansion(mu: f64, alpha: f64) -> Result<ExpansionSpec> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("service rate must be positive, got {mu}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let load = move |n: f64| n / mu;
    let lo = move |n: f64| {
        let servers = QueueParams::new(n, mu).and_then(|p| mmn_min_servers_wait_prob(&p, alpha));
        match servers {
            Ok(s) => (s as f64 - load(n)) / load(n).sqrt(),
            // An unevaluable constraint leaves the feasible set empty.
            Err(_) => f64::INFINITY,
        }
    };
    Ok(ExpansionSpec {
        model: ModelTag::ConstrainedStaffing,
        a_of_n: Arc::new(load),
        b_of_n: Arc::new(move |n| load(n).sqrt()),
        c_of_n: Arc::new(|_| 1.0),
        pi_bar: Arc::new(|x| x),
        pi_hat: Arc::new(|_| 0.0),
        g_of_n: Arc::new(move |n, x| load(n) + load(n).sqrt() * x),
        g_inverse: Arc::new(move |n, s| (s - load(n)) / load(n).sqrt()),
        domain_lo: Arc::new(lo),
        domain_hi: Arc::new(|_| f64::INFINITY),
        lo_closed: true,
        regime: None,
        notes: vec![format!("delay probability target alpha = {alpha}")],
    })
}
