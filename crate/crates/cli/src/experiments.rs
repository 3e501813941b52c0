//! The experiments behind each subcommand. Work is spread over `n` with
//! rayon; rows are sorted by `n` before they are returned.

use std::fmt::Write as _;

use log::{info, warn};
use rayon::prelude::*;

use gaplab_core::exact::{mmn_min_servers_wait_prob, QueueParams};
use gaplab_core::expansions::{
    constrained_staffing_expansion, erlang_a_diffusion_expansion, erlang_a_qbar1, erlang_a_qhat1, fluid_expansion,
    fluid_qbar, fluid_qhat, fluid_qhat_boundary, hw_expansion, hw_qbar, hw_qhat, hw_x_for_delay,
};
use gaplab_core::numerics::Bracket;
use gaplab_core::prescription::{
    optimality_gap, probe_conditions, rate_fit, refined_prescription, select_prescription, ErlangAExact, ExactModel,
    GapRecord, Lattice, MmnExact, Prescription, Variant,
};
use gaplab_core::{ExpansionSpec, ModelTag};

use crate::config::ExperimentConfig;
use crate::error::{usage, CliResult};
use crate::table::{fmt_num, Row};

/// An expansion, its exact counterpart (when one exists) and the interval
/// searched for `x̄*`.
pub struct ModelSetup {
    pub spec: ExpansionSpec,
    pub exact: Option<Box<dyn ExactModel>>,
    pub probe: Bracket,
}

pub fn setup(cfg: &ExperimentConfig) -> CliResult<ModelSetup> {
    let cost = cfg.cost()?;
    Ok(match cfg.model {
        ModelTag::MmnHalfinWhitt => ModelSetup {
            spec: hw_expansion(cfg.mu, cost)?,
            exact: Some(Box::new(MmnExact::new(cfg.mu, cost)?)),
            probe: Bracket::new(1e-6, 10.0)?,
        },
        ModelTag::MmnaDiffusion => {
            let gamma = cfg.gamma.ok_or_else(|| usage("mmna-diffusion needs gamma"))?;
            ModelSetup {
                spec: erlang_a_diffusion_expansion(cfg.mu, gamma, cost)?,
                exact: Some(Box::new(ErlangAExact::new(cfg.mu, gamma, cost)?)),
                probe: Bracket::new(-10.0, 10.0)?,
            }
        }
        ModelTag::MmngFluid => {
            let patience = cfg.patience.ok_or_else(|| usage("mmng-fluid needs a patience law"))?;
            let exact: Option<Box<dyn ExactModel>> = match patience.exponential_rate() {
                Some(rate) => Some(Box::new(ErlangAExact::new(cfg.mu, rate, cost)?)),
                None => None,
            };
            ModelSetup {
                spec: fluid_expansion(cfg.mu, cost, patience.build()?, cfg.rho_convention)?,
                exact,
                probe: Bracket::new(0.0, 2.0 / cfg.mu)?,
            }
        }
        other => return Err(usage(format!("model {other} has no experiment setup"))),
    })
}

fn require_exact<'a>(setup: &'a ModelSetup, cfg: &ExperimentConfig) -> CliResult<&'a dyn ExactModel> {
    setup.exact.as_deref().ok_or_else(|| {
        usage(format!(
            "no exact evaluator for {} with patience {}; only exponential patience is supported here",
            cfg.model,
            cfg.patience.map(|p| p.to_string()).unwrap_or_default()
        ))
    })
}

fn join_flags(flags: &[String]) -> String {
    flags.join("; ")
}

fn fit_note(points: &[(f64, f64)]) -> String {
    match rate_fit(points) {
        Ok(f) => format!(
            "rate_fit slope={} intercept={} r2={} used={} excluded={}",
            fmt_num(f.slope),
            fmt_num(f.intercept),
            fmt_num(f.r_squared),
            f.used,
            f.excluded
        ),
        Err(gaplab_core::Error::InsufficientData { usable, excluded }) => {
            format!("insufficient-data usable={usable} excluded={excluded}")
        }
        Err(e) => format!("rate_fit failed: {e}"),
    }
}

/// Rows of a gap table plus the number of rows that carry evaluator failures.
pub struct Table {
    pub rows: Vec<Row>,
    pub warnings: usize,
}

pub struct GapRun {
    pub prescription: Prescription,
    pub records: Vec<GapRecord>,
}

/// Computes the records behind `gap-table`, sorted by `(n, variant)`.
pub fn gap_records(cfg: &ExperimentConfig) -> CliResult<GapRun> {
    let setup = setup(cfg)?;
    let exact = require_exact(&setup, cfg)?;
    let prescription = select_prescription(&setup.spec, setup.probe)?;
    info!("x̄* = {} ({:?})", prescription.x_star, prescription.regime_flags);

    let mut records: Vec<GapRecord> = cfg
        .n_grid
        .par_iter()
        .flat_map_iter(|&n| {
            let mut out = vec![optimality_gap(&setup.spec, exact, n, prescription.x_star, Variant::Plain)];
            if cfg.refined {
                out.push(match refined_prescription(&setup.spec, n, setup.probe) {
                    Ok(x) => optimality_gap(&setup.spec, exact, n, x, Variant::Refined),
                    Err(e) => {
                        let mut r = optimality_gap(&setup.spec, exact, n, f64::NAN, Variant::Refined);
                        r.flags.push(format!("refined-failed: {e}"));
                        r
                    }
                });
            }
            out
        })
        .collect();
    for r in &mut records {
        r.flags.extend(prescription.regime_flags.iter().cloned());
    }
    records.sort_by(|a, b| a.n.total_cmp(&b.n).then(a.variant.cmp(&b.variant)));
    Ok(GapRun { prescription, records })
}

pub fn gap_table(cfg: &ExperimentConfig) -> CliResult<Table> {
    let run = gap_records(cfg)?;
    let mut warnings = 0;
    let mut rows: Vec<Row> = Vec::with_capacity(run.records.len() + 2);
    for r in &run.records {
        if !r.is_complete() {
            warnings += 1;
            warn!("n = {}: {}", r.n, join_flags(&r.flags));
        }
        rows.push(vec![
            fmt_num(r.n),
            r.model.to_string(),
            fmt_num(r.x_star),
            r.variant.to_string(),
            fmt_num(r.staffing),
            fmt_num(r.cost_prescribed),
            fmt_num(r.staffing_optimal),
            fmt_num(r.cost_optimal),
            fmt_num(r.gap),
            fmt_num(r.normalized_gap),
            join_flags(&r.flags),
        ]);
    }
    let variants: &[Variant] = if cfg.refined { &[Variant::Plain, Variant::Refined] } else { &[Variant::Plain] };
    for &variant in variants {
        let points: Vec<(f64, f64)> =
            run.records.iter().filter(|r| r.variant == variant).map(|r| (r.n, r.gap)).collect();
        let x = if variant == Variant::Plain { fmt_num(run.prescription.x_star) } else { String::new() };
        let mut row = vec![String::new(); 11];
        row[0] = "summary".into();
        row[1] = cfg.model.to_string();
        row[2] = x;
        row[3] = variant.to_string();
        row[10] = fit_note(&points);
        rows.push(row);
    }
    Ok(Table { rows, warnings })
}

/// One `approx-check` data point.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxPoint {
    pub n: f64,
    pub x: f64,
    pub exact: f64,
    pub leading: f64,
    pub correction: f64,
    pub residual: f64,
    pub flags: Vec<String>,
}

fn approx_point(cfg: &ExperimentConfig, exact: &dyn ExactModel, n: f64, x: f64) -> ApproxPoint {
    let load = n / cfg.mu;
    let root = load.sqrt();
    let mut flags = Vec::new();
    let evaluated = (|| -> gaplab_core::Result<(f64, f64, f64)> {
        match cfg.model {
            ModelTag::MmnHalfinWhitt => {
                let eq = exact.expected_queue(n, load + root * x)?;
                Ok((eq, root * hw_qbar(x)?, hw_qhat(x)?))
            }
            ModelTag::MmnaDiffusion => {
                let gamma = cfg.gamma.unwrap_or(cfg.mu);
                let servers = (load + root * x).round().max(0.0);
                let xl = (servers - load) / root;
                if xl != x {
                    flags.push(format!("lattice-x={}", fmt_num(xl)));
                }
                let eq = exact.expected_queue(n, servers)?;
                Ok((eq, root * erlang_a_qbar1(xl, cfg.mu, gamma)?, erlang_a_qhat1(xl, cfg.mu, gamma)?))
            }
            ModelTag::MmngFluid => {
                let patience = cfg.patience.expect("validated").build().map_err(|e| {
                    gaplab_core::Error::InvalidParameter(e.to_string())
                })?;
                let servers = (n * x).round().max(0.0);
                let xl = servers / n;
                if xl != x {
                    flags.push(format!("lattice-x={}", fmt_num(xl)));
                }
                let eq = exact.expected_queue(n, servers)?;
                let u = xl * cfg.mu;
                let correction = if u >= 1.0 {
                    flags.push("not-overloaded: boundary correction".into());
                    fluid_qhat_boundary(patience.as_ref())
                } else if u == 0.0 {
                    flags.push("no-servers: correction undefined".into());
                    f64::NAN
                } else {
                    fluid_qhat(xl, cfg.mu, patience.as_ref(), cfg.rho_convention)?
                };
                Ok((eq, n * fluid_qbar(xl, cfg.mu, patience.as_ref())?, correction))
            }
            other => Err(gaplab_core::Error::InvalidParameter(format!("no approximation check for {other}"))),
        }
    })();
    match evaluated {
        Ok((exact, leading, correction)) => {
            ApproxPoint { n, x, exact, leading, correction, residual: exact - leading - correction, flags }
        }
        Err(e) => {
            flags.push(format!("failed: {e}"));
            ApproxPoint { n, x, exact: f64::NAN, leading: f64::NAN, correction: f64::NAN, residual: f64::NAN, flags }
        }
    }
}

pub fn approx_points(cfg: &ExperimentConfig) -> CliResult<Vec<ApproxPoint>> {
    let setup = setup(cfg)?;
    let exact = require_exact(&setup, cfg)?;
    let mut points: Vec<ApproxPoint> = cfg
        .n_grid
        .par_iter()
        .flat_map_iter(|&n| cfg.x_probe.iter().map(move |&x| (n, x)).collect::<Vec<_>>())
        .map(|(n, x)| approx_point(cfg, exact, n, x))
        .collect();
    points.sort_by(|a, b| a.n.total_cmp(&b.n).then(a.x.total_cmp(&b.x)));
    Ok(points)
}

pub fn approx_check(cfg: &ExperimentConfig) -> CliResult<Table> {
    let points = approx_points(cfg)?;
    let mut warnings = 0;
    let mut rows: Vec<Row> = Vec::new();
    for p in &points {
        if !p.residual.is_finite() {
            warnings += 1;
            warn!("n = {}, x = {}: {}", p.n, p.x, join_flags(&p.flags));
        }
        rows.push(vec![
            fmt_num(p.n),
            fmt_num(p.x),
            fmt_num(p.exact),
            fmt_num(p.leading),
            fmt_num(p.correction),
            fmt_num(p.residual),
            join_flags(&p.flags),
        ]);
    }
    let mut xs = cfg.x_probe.clone();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in xs {
        let group: Vec<&ApproxPoint> = points.iter().filter(|p| p.x == x).collect();
        let residuals: Vec<(f64, f64)> = group.iter().map(|p| (p.n, p.residual.abs())).collect();
        let scaled = group
            .iter()
            .map(|p| (p.n / cfg.mu).sqrt() * p.residual.abs())
            .filter(|v| v.is_finite())
            .fold(f64::NAN, f64::max);
        let offset = group.iter().map(|p| (p.exact - p.leading).abs()).filter(|v| v.is_finite()).fold(f64::NAN, f64::max);
        let note = format!(
            "{}; max_sqrt_load_residual={}; max_leading_offset={}",
            fit_note(&residuals),
            fmt_num(scaled),
            fmt_num(offset)
        );
        rows.push(vec!["summary".into(), fmt_num(x), String::new(), String::new(), String::new(), String::new(), note]);
    }
    Ok(Table { rows, warnings })
}

/// One `constrained` row: square-root staffing against the exact minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstrainedPoint {
    pub n: f64,
    pub alpha: f64,
    pub x_star: f64,
    pub staffing_sqrt: u64,
    pub staffing_exact: u64,
    pub server_gap: i64,
}

pub fn constrained_points(cfg: &ExperimentConfig) -> CliResult<Vec<ConstrainedPoint>> {
    let alpha = cfg.alpha.ok_or_else(|| usage("constrained needs --alpha"))?;
    let x_star = hw_x_for_delay(alpha)?;
    let mut points = cfg
        .n_grid
        .par_iter()
        .map(|&n| -> CliResult<ConstrainedPoint> {
            let params = QueueParams::new(n, cfg.mu)?;
            let load = params.offered_load();
            let sqrt_rule = (load + load.sqrt() * x_star).ceil().max(load.floor() + 1.0) as u64;
            let exact = mmn_min_servers_wait_prob(&params, alpha)?;
            Ok(ConstrainedPoint {
                n,
                alpha,
                x_star,
                staffing_sqrt: sqrt_rule,
                staffing_exact: exact,
                server_gap: sqrt_rule as i64 - exact as i64,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    points.sort_by(|a, b| a.n.total_cmp(&b.n));
    Ok(points)
}

pub fn constrained(cfg: &ExperimentConfig) -> CliResult<Table> {
    let points = constrained_points(cfg)?;
    if log::log_enabled!(log::Level::Info) {
        let spec = constrained_staffing_expansion(cfg.mu, points[0].alpha)?;
        let samples = [0.0, 0.5, 1.0, 2.0];
        let report = probe_conditions(&spec, None, &cfg.n_grid, &samples, Bracket::new(0.0, 5.0)?);
        info!("condition probes for the constrained setup:\n{report}");
    }
    let rows = points
        .iter()
        .map(|p| {
            vec![
                fmt_num(p.n),
                fmt_num(p.alpha),
                fmt_num(p.x_star),
                p.staffing_sqrt.to_string(),
                p.staffing_exact.to_string(),
                p.server_gap.to_string(),
            ]
        })
        .collect();
    Ok(Table { rows, warnings: 0 })
}

/// Exact cost against the expansion at each `(n, x)`.
pub fn evaluate(cfg: &ExperimentConfig) -> CliResult<Table> {
    let setup = setup(cfg)?;
    let exact = require_exact(&setup, cfg)?;
    let spec = &setup.spec;
    let mut cells: Vec<(f64, f64, Row, bool)> = cfg
        .n_grid
        .par_iter()
        .flat_map_iter(|&n| cfg.x_probe.iter().map(move |&x| (n, x)).collect::<Vec<_>>())
        .map(|(n, x)| {
            let mut flags = Vec::new();
            let result = (|| -> gaplab_core::Result<(f64, f64, f64, f64, f64)> {
                let mut s = spec.staffing(n, x)?;
                let mut y = x;
                if exact.lattice() == Lattice::Integer && s.fract() != 0.0 {
                    s = s.round();
                    y = spec.scaled(n, s);
                    flags.push(format!("lattice-x={}", fmt_num(y)));
                }
                let eq = exact.expected_queue(n, s)?;
                let excess = exact.excess_cost(n, s)?;
                let offset = exact.cost_offset(n);
                let approx = spec.approximate_cost(n, y);
                let eps = (excess - (spec.a(n) - offset) - spec.b(n) * spec.pi_bar(y) - spec.c(n) * spec.pi_hat(y)) / spec.c(n);
                Ok((s, eq, excess + offset, approx, eps))
            })();
            let ok = result.is_ok();
            let row = match result {
                Ok((s, eq, cost, approx, eps)) => vec![
                    fmt_num(n),
                    fmt_num(x),
                    fmt_num(s),
                    fmt_num(eq),
                    fmt_num(cost),
                    fmt_num(approx),
                    fmt_num(eps),
                    join_flags(&flags),
                ],
                Err(e) => {
                    flags.push(format!("failed: {e}"));
                    let mut row = vec![fmt_num(n), fmt_num(x)];
                    row.extend(std::iter::repeat_n("nan".to_string(), 5));
                    row.push(join_flags(&flags));
                    row
                }
            };
            (n, x, row, ok)
        })
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let warnings = cells.iter().filter(|c| !c.3).count();
    Ok(Table { rows: cells.into_iter().map(|c| c.2).collect(), warnings })
}

/// Human-readable prescription report.
pub fn prescribe(cfg: &ExperimentConfig) -> CliResult<String> {
    let setup = setup(cfg)?;
    let spec = &setup.spec;
    let p = select_prescription(spec, setup.probe)?;
    let mut out = String::new();
    let _ = writeln!(out, "model: {}", cfg.model);
    let _ = writeln!(out, "mu = {}, h = {}, c = {}", cfg.mu, cfg.h, cfg.c);
    if let Some(g) = cfg.gamma {
        let _ = writeln!(out, "gamma = {g}");
    }
    if cfg.model == ModelTag::MmngFluid {
        let _ = writeln!(out, "rho convention: {}", cfg.rho_convention);
    }
    let _ = writeln!(out, "x_star = {}", fmt_num(p.x_star));
    let _ = writeln!(out, "pi_bar(x_star) = {}", fmt_num(p.pi_bar_value));
    let _ = writeln!(out, "pi_hat(x_star) = {}", fmt_num(p.pi_hat_value));
    let set: Vec<String> = p.argmin_set.iter().map(|&x| fmt_num(x)).collect();
    let _ = writeln!(out, "argmin set: {}", set.join(", "));
    if let Some(regime) = spec.regime {
        let _ = writeln!(out, "regime: {regime:?}");
    }
    for flag in &p.regime_flags {
        let _ = writeln!(out, "flag: {flag}");
    }
    for note in &spec.notes {
        let _ = writeln!(out, "note: {note}");
    }
    for &n in &cfg.n_grid {
        let plain = spec.staffing(n, p.x_star).map(fmt_num).unwrap_or_else(|e| format!("infeasible ({e})"));
        let _ = write!(out, "n = {}: staffing {plain}", fmt_num(n));
        if cfg.refined {
            match refined_prescription(spec, n, setup.probe) {
                Ok(x) => {
                    let s = spec.staffing(n, x).map(fmt_num).unwrap_or_else(|e| format!("infeasible ({e})"));
                    let _ = write!(out, ", refined x = {} staffing {s}", fmt_num(x));
                }
                Err(e) => {
                    let _ = write!(out, ", refined failed ({e})");
                }
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parses back the numeric part of a `key=value` note in a summary row.
pub fn note_value(note: &str, key: &str) -> Option<f64> {
    note.split(|c: char| c == ';' || c.is_whitespace())
        .filter_map(|t| t.split_once('='))
        .find(|(k, _)| *k == key)
        .and_then(|(_, v)| crate::table::parse_num(v))
}
