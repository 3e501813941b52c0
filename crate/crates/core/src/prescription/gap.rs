//! Optimality gaps and expansion residuals against an exact model.

use std::fmt;

use super::{ExactModel, Lattice};
use crate::error::{Error, Result};
use crate::expansions::{ExpansionSpec, ModelTag};

/// Default neighbourhood radius for the residual probe.
pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Plain,
    Refined,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Plain => "plain",
            Variant::Refined => "refined",
        })
    }
}

/// Exact cost of a prescription against the exact optimum at one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRecord {
    pub n: f64,
    pub model: ModelTag,
    pub x_star: f64,
    pub variant: Variant,
    pub staffing: f64,
    pub cost_prescribed: f64,
    pub staffing_optimal: f64,
    pub cost_optimal: f64,
    /// `Πₙ(gₙ(x̄*)) − Πₙ*`, differenced on excess costs.
    pub gap: f64,
    /// `gap / cₙ`.
    pub normalized_gap: f64,
    pub flags: Vec<String>,
}

impl GapRecord {
    /// True when both costs were evaluated.
    pub fn is_complete(&self) -> bool {
        self.gap.is_finite()
    }
}

/// Evaluates `excess` at the integer neighbours of `staffing` and keeps the
/// better one. Returns `(staffing used, excess, flag)`.
fn round_to_lattice(model: &dyn ExactModel, n: f64, staffing: f64) -> Result<(f64, f64, Option<&'static str>)> {
    if staffing.fract() == 0.0 {
        return Ok((staffing, model.excess_cost(n, staffing)?, None));
    }
    let (lo, hi) = (staffing.floor(), staffing.ceil());
    let up = model.excess_cost(n, hi)?;
    if lo < 0.0 {
        return Ok((hi, up, Some("rounded-ceil")));
    }
    match model.excess_cost(n, lo) {
        Ok(down) if down <= up => Ok((lo, down, Some("rounded-floor"))),
        _ => Ok((hi, up, Some("rounded-ceil"))),
    }
}

/// Measures the gap of the decision `x` at scale `n`.
///
/// Evaluator failures never abort: an infeasible prescription or a failed
/// optimum leaves the affected fields `NaN` and is described in `flags`.
pub fn optimality_gap(spec: &ExpansionSpec, model: &dyn ExactModel, n: f64, x: f64, variant: Variant) -> GapRecord {
    let mut flags = Vec::new();
    let offset = model.cost_offset(n);
    let mut record = GapRecord {
        n,
        model: spec.model,
        x_star: x,
        variant,
        staffing: f64::NAN,
        cost_prescribed: f64::NAN,
        staffing_optimal: f64::NAN,
        cost_optimal: f64::NAN,
        gap: f64::NAN,
        normalized_gap: f64::NAN,
        flags: Vec::new(),
    };

    let prescribed = spec.staffing(n, x).and_then(|s| {
        record.staffing = s;
        match model.lattice() {
            Lattice::Continuous => Ok((s, model.excess_cost(n, s)?, None)),
            Lattice::Integer => round_to_lattice(model, n, s),
        }
    });
    let prescribed = match prescribed {
        Ok((s, excess, note)) => {
            record.staffing = s;
            record.cost_prescribed = excess + offset;
            flags.extend(note.map(String::from));
            Some(excess)
        }
        Err(e) => {
            flags.push(format!("infeasible: {e}"));
            None
        }
    };

    let hint = if record.staffing.is_finite() { record.staffing } else { spec.staffing(n, x).unwrap_or(f64::NAN) };
    let optimum = match model.optimum_excess(n, hint) {
        Ok((s, excess)) => {
            record.staffing_optimal = s;
            record.cost_optimal = excess + offset;
            Some(excess)
        }
        Err(e) => {
            flags.push(format!("optimum-failed: {e}"));
            None
        }
    };

    if let (Some(p), Some(o)) = (prescribed, optimum) {
        record.gap = p - o;
        record.normalized_gap = record.gap / spec.c(n);
        if record.gap < -1e-9 * (1.0 + record.cost_optimal.abs()) {
            flags.push("negative-gap".into());
        }
    }
    record.flags = flags;
    record
}

/// `εₙ(y)` at one point. Integer models first move `y` to the nearest point
/// whose staffing is an integer; the point actually used is returned.
pub fn epsilon_at(spec: &ExpansionSpec, model: &dyn ExactModel, n: f64, y: f64) -> Result<(f64, f64)> {
    let mut s = spec.staffing(n, y)?;
    let mut y_used = y;
    if model.lattice() == Lattice::Integer {
        s = s.round();
        y_used = spec.scaled(n, s);
        if !spec.in_domain(n, y_used) {
            s += 1.0;
            y_used = spec.scaled(n, s);
        }
    }
    let excess = model.excess_cost(n, s)?;
    let expansion = (spec.a(n) - model.cost_offset(n)) + spec.b(n) * spec.pi_bar(y_used) + spec.c(n) * spec.pi_hat(y_used);
    let eps = (excess - expansion) / spec.c(n);
    if !eps.is_finite() {
        return Err(Error::Domain(format!("residual not finite at n = {n}, y = {y_used}")));
    }
    Ok((y_used, eps))
}

/// Residuals at `{x − δ, x, x + δ}` for one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonRow {
    pub n: f64,
    /// `(y, εₙ(y))` for every probe point that could be evaluated.
    pub probes: Vec<(f64, f64)>,
    /// `max |εₙ(y)|` over the evaluated probes; `NaN` when none were.
    pub sup: f64,
    pub flags: Vec<String>,
}

pub fn epsilon_probe(spec: &ExpansionSpec, model: &dyn ExactModel, x: f64, n_grid: &[f64], delta: f64) -> Vec<EpsilonRow> {
    n_grid
        .iter()
        .map(|&n| {
            let mut probes = Vec::with_capacity(3);
            let mut flags = Vec::new();
            for y in [x - delta, x, x + delta] {
                match epsilon_at(spec, model, n, y) {
                    Ok(p) => probes.push(p),
                    Err(e) => flags.push(format!("y = {y}: {e}")),
                }
            }
            let sup = probes.iter().map(|p| p.1.abs()).fold(f64::NAN, f64::max);
            EpsilonRow { n, probes, sup, flags }
        })
        .collect()
}
