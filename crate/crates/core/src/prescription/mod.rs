//! From an expansion to a staffing decision, and from a decision to a
//! measured optimality gap.
//!
//! `x̄*` minimizes `π̄`, with ties inside the argmin set broken by the smallest
//! `π̂` and then by the smallest `x`. Gaps are always differenced on excess
//! costs (`Πₙ − c·n/μ`) so that gaps far below the cost scale stay resolvable.

mod conditions;
mod exact_model;
mod gap;
mod rate;

pub use conditions::{probe_conditions, ConditionReport, ConditionResult, ProbeStatus};
pub use exact_model::{ErlangAExact, ExactModel, Lattice, MmnExact};
pub use gap::{epsilon_at, epsilon_probe, optimality_gap, EpsilonRow, GapRecord, Variant, DEFAULT_DELTA};
pub use rate::{rate_fit, RateFit};

use crate::error::{Error, Result};
use crate::expansions::{ExpansionSpec, Regime};
use crate::numerics::{argmin_regions, Bracket, Tolerance};

/// Relative width of the numerical argmin band of `π̄`.
pub const ARGMIN_BAND: f64 = 1e-9;
/// Doublings used to decide whether a minimizer on the probe edge is real.
const EDGE_DOUBLINGS: u32 = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct Prescription {
    pub x_star: f64,
    pub pi_bar_value: f64,
    pub pi_hat_value: f64,
    /// One point per connected component of the argmin set of `π̄`: the
    /// component's minimizer of `π̂`.
    pub argmin_set: Vec<f64>,
    pub regime_flags: Vec<String>,
}

fn band_tolerance() -> Tolerance {
    Tolerance::default().with_absolute(ARGMIN_BAND)
}

fn within_band(v: f64, best: f64) -> bool {
    v <= best + ARGMIN_BAND * (1.0 + best.abs())
}

/// Smallest `x` among `(x, value)` pairs whose value ties the minimum.
fn smallest_tied(candidates: &[(f64, f64)]) -> Option<(f64, f64)> {
    let best = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    candidates
        .iter()
        .copied()
        .filter(|c| within_band(c.1, best))
        .min_by(|a, b| a.0.total_cmp(&b.0))
}

enum Edge {
    /// `π̄` is not finite just past the edge: the edge bounds `X̄`.
    DomainBoundary,
    /// Finite and no better past the edge.
    Genuine,
}

/// Walks outward from a probe edge in doubling steps. A value that keeps
/// falling is evidence against condition 3; a clearly lower value means the
/// probe missed the minimizer.
fn classify_edge(f: &dyn Fn(f64) -> f64, edge: f64, outward: f64, width: f64, value: f64) -> Result<Edge> {
    let mut step = 1e-3 * width;
    let mut prev = value;
    let mut falling = true;
    let mut lower = None;
    for k in 0..EDGE_DOUBLINGS {
        let x = edge + outward * step;
        let v = f(x);
        if !v.is_finite() {
            if k == 0 {
                return Ok(Edge::DomainBoundary);
            }
            falling = false;
            break;
        }
        if !(v < prev) {
            falling = false;
        }
        if lower.is_none() && !within_band(value, v) {
            lower = Some(x);
        }
        prev = v;
        step *= 2.0;
    }
    if falling {
        return Err(Error::ConditionViolation {
            condition: 3,
            detail: format!("π̄ keeps decreasing beyond x = {edge} without attaining a minimum"),
        });
    }
    if let Some(x) = lower {
        return Err(Error::Optimization(format!("π̄ is lower outside the probe near x = {x}; widen the probe")));
    }
    Ok(Edge::Genuine)
}

/// Selects `x̄*` on `probe` with the `π̂` tie-break.
pub fn select_prescription(spec: &ExpansionSpec, probe: Bracket) -> Result<Prescription> {
    let pi_bar = |x: f64| spec.pi_bar(x);
    let regions = match argmin_regions(pi_bar, probe, &band_tolerance()) {
        Err(Error::UnboundedBelow { x, value }) => {
            return Err(Error::ConditionViolation {
                condition: 3,
                detail: format!("π̄ unbounded below on the probe (π̄({x}) = {value})"),
            })
        }
        other => other?,
    };
    if regions.is_empty() {
        return Err(Error::Optimization("empty argmin set".into()));
    }

    let mut candidates = Vec::with_capacity(regions.len());
    for r in &regions {
        if r.is_point() {
            candidates.push((r.representative, spec.pi_hat(r.representative)));
            continue;
        }
        // A plateau of π̄: the correction term decides inside it.
        let inner = argmin_regions(|x| spec.pi_hat(x), Bracket::new(r.lo, r.hi)?, &band_tolerance())?;
        let pts: Vec<(f64, f64)> = inner.iter().map(|q| (q.representative, q.value)).collect();
        candidates.push(smallest_tied(&pts).ok_or_else(|| Error::Optimization("π̂ not finite on a plateau".into()))?);
    }
    let (x_star, pi_hat_value) = smallest_tied(&candidates).ok_or_else(|| Error::Optimization("empty argmin set".into()))?;
    let pi_bar_value = spec.pi_bar(x_star);

    let mut regime_flags = Vec::new();
    let edge_slack = 1e-6 * probe.width();
    for (edge, outward, name) in [(probe.lo, -1.0, "lo"), (probe.hi, 1.0, "hi")] {
        let touches = regions.iter().any(|r| r.lo - edge_slack <= edge && edge <= r.hi + edge_slack);
        if touches {
            if let Edge::Genuine = classify_edge(&pi_bar, edge, outward, probe.width(), pi_bar_value)? {
                regime_flags.push(format!("probe-edge-{name}"));
            }
        }
    }
    if spec.regime == Some(Regime::Critical) {
        regime_flags.push("critical-boundary".into());
    }
    let mut argmin_set: Vec<f64> = candidates.iter().map(|c| c.0).collect();
    argmin_set.sort_by(f64::total_cmp);
    Ok(Prescription { x_star, pi_bar_value, pi_hat_value, argmin_set, regime_flags })
}

/// Minimizer over `X̄ₙ ∩ probe` of `bₙ·π̄(x) + cₙ·π̂(x)`.
pub fn refined_prescription(spec: &ExpansionSpec, n: f64, probe: Bracket) -> Result<f64> {
    let (b, c) = (spec.b(n), spec.c(n));
    let objective = |x: f64| if spec.in_domain(n, x) { b * spec.pi_bar(x) + c * spec.pi_hat(x) } else { f64::INFINITY };
    let regions = argmin_regions(objective, probe, &band_tolerance())?;
    let pts: Vec<(f64, f64)> = regions.iter().map(|r| (r.representative, r.value)).collect();
    smallest_tied(&pts).map(|p| p.0).ok_or_else(|| Error::Optimization("empty argmin set".into()))
}

/// `gₙ(x)`; errors when `x ∉ X̄ₙ`.
pub fn staffing(spec: &ExpansionSpec, n: f64, x: f64) -> Result<f64> {
    spec.staffing(n, x)
}

/// `gₙ⁻¹(s)`.
pub fn scaled_decision(spec: &ExpansionSpec, n: f64, staffing: f64) -> f64 {
    spec.scaled(n, staffing)
}
