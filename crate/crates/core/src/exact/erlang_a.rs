use super::{CostParams, ExactOptimum, QueueParams};
use crate::error::{Error, Result};

const TAIL_RELATIVE: f64 = 1e-16;

/// Stationary law of the number in system for an M/M/N+M queue.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub servers: u64,
    /// `probs[j] = P(j customers in system)`.
    pub probs: Vec<f64>,
    /// Set when the hard state cap was reached before the tail criterion.
    pub truncated: bool,
}

impl StationaryDistribution {
    pub fn expected_queue(&self) -> f64 {
        let n = self.servers as usize;
        self.probs.iter().enumerate().skip(n + 1).map(|(j, p)| (j - n) as f64 * p).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Birth-death stationary distribution with birth rate `n` and death rate
/// `min(j, N)μ + (j − N)⁺γ`.
///
/// Weights are accumulated in log space. The chain is cut once the remaining
/// geometric tail bound drops below `1e-16` of the running mass, with a hard
/// cap of `N + 200√(n/μ) + 10⁴` states.
pub fn erlang_a_distribution(params: &QueueParams, servers: u64) -> Result<StationaryDistribution> {
    let gamma = params.require_gamma()?;
    let (arrival, mu) = (params.n(), params.mu());
    let cap = servers + (200.0 * params.offered_load().sqrt()).ceil() as u64 + 10_000;
    let ln_arrival = arrival.ln();

    let mut log_w = Vec::with_capacity((cap.min(1 << 24) + 1) as usize);
    log_w.push(0.0_f64);
    let (mut max, mut mass) = (0.0_f64, 1.0_f64);
    let mut truncated = true;
    for j in 1..=cap {
        let busy = j.min(servers) as f64;
        let waiting = j.saturating_sub(servers) as f64;
        let death = busy * mu + waiting * gamma;
        let lw = log_w[log_w.len() - 1] + ln_arrival - death.ln();
        log_w.push(lw);
        if lw > max {
            mass = mass * (max - lw).exp() + 1.0;
            max = lw;
        } else {
            mass += (lw - max).exp();
        }
        let ratio = arrival / death;
        if ratio < 1.0 && (lw - max).exp() / (1.0 - ratio) < TAIL_RELATIVE * mass {
            truncated = false;
            break;
        }
    }
    let log_norm = max + mass.ln();
    let probs = log_w.into_iter().map(|lw| (lw - log_norm).exp()).collect();
    Ok(StationaryDistribution { servers, probs, truncated })
}

/// `E[Q] = Σ_{j>N} (j − N)·p_j` for the Erlang-A queue.
pub fn erlang_a_expected_queue(params: &QueueParams, servers: u64) -> Result<f64> {
    Ok(erlang_a_distribution(params, servers)?.expected_queue())
}

pub fn erlang_a_cost(params: &QueueParams, cost: &CostParams, servers: u64) -> Result<f64> {
    Ok(cost.h() * erlang_a_expected_queue(params, servers)? + cost.c() * servers as f64)
}

/// `max(10, ⌈5√(n/μ)⌉)`.
pub fn default_search_window(params: &QueueParams) -> u64 {
    ((5.0 * params.offered_load().sqrt()).ceil() as u64).max(10)
}

/// `h·E[Q] + c·(N − n/μ)`: the cost net of the load term, with its low-order
/// digits intact.
pub fn erlang_a_excess_cost(params: &QueueParams, cost: &CostParams, servers: u64) -> Result<f64> {
    let idle = servers as f64 - params.offered_load();
    Ok(cost.h() * erlang_a_expected_queue(params, servers)? + cost.c() * idle)
}

/// Windows up to this many points are searched exhaustively.
const EXHAUSTIVE_POINTS: u64 = 401;
/// Half-width of the exhaustive confirmation around a golden-search result.
const CONFIRM_RADIUS: u64 = 3;

/// Integer minimization of `h·E[Q] + c·N` over
/// `[max(0, center − window), center + window]`.
///
/// Small windows are searched exhaustively. Wider ones use a discrete
/// golden-section search, which relies on the cost being unimodal in `N`, and
/// then re-check a few neighbours of the result exhaustively. A minimizer on
/// the window edge (other than the natural floor `N = 0`) is rejected, since
/// the true optimum may lie outside.
pub fn erlang_a_optimal_integer(
    params: &QueueParams,
    cost: &CostParams,
    center: f64,
    window: u64,
) -> Result<ExactOptimum> {
    let (servers, excess) = erlang_a_optimal_excess(params, cost, center, window)?;
    Ok(ExactOptimum { staffing: servers as f64, cost: excess + cost.c() * params.offered_load() })
}

/// [`erlang_a_optimal_integer`] returning the minimizer with its excess cost.
pub(crate) fn erlang_a_optimal_excess(
    params: &QueueParams,
    cost: &CostParams,
    center: f64,
    window: u64,
) -> Result<(u64, f64)> {
    params.require_gamma()?;
    if window == 0 {
        return Err(Error::InvalidParameter("search window must be at least 1".into()));
    }
    if !center.is_finite() {
        return Err(Error::InvalidParameter(format!("window center must be finite, got {center}")));
    }
    let mid = center.max(0.0).round() as u64;
    let lo = mid.saturating_sub(window);
    let hi = mid + window;
    let excess = |servers: u64| erlang_a_excess_cost(params, cost, servers);

    let (scan_lo, scan_hi) = if hi - lo < EXHAUSTIVE_POINTS {
        (lo, hi)
    } else {
        let guess = golden_integer(&excess, lo, hi)?;
        (guess.saturating_sub(CONFIRM_RADIUS).max(lo), (guess + CONFIRM_RADIUS).min(hi))
    };
    let mut best = (scan_lo, f64::INFINITY);
    for servers in scan_lo..=scan_hi {
        let v = excess(servers)?;
        if v < best.1 {
            best = (servers, v);
        }
    }
    if best.0 == hi || (best.0 == lo && lo > 0) {
        return Err(Error::WindowTooSmall { lo, hi, argmin: best.0 });
    }
    Ok(best)
}

/// Discrete golden-section search for the minimizer of a unimodal sequence.
fn golden_integer<F: Fn(u64) -> Result<f64>>(f: &F, mut lo: u64, mut hi: u64) -> Result<u64> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let interior = |lo: u64, hi: u64| {
        let span = (hi - lo) as f64;
        let a = lo + ((1.0 - INV_PHI) * span).round() as u64;
        let b = lo + (INV_PHI * span).round() as u64;
        (a, b.max(a + 1))
    };
    let (mut a, mut b) = interior(lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    while hi - lo > 4 {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = interior(lo, hi).0;
            if a >= b {
                a = b - 1;
            }
            fa = f(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = interior(lo, hi).1;
            if b <= a {
                b = a + 1;
            }
            fb = f(b)?;
        }
    }
    Ok(if fa <= fb { a } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    /// `E[(X − N)⁺]` for `X ~ Poisson(R)` via `R − N + Σ_{j≤N} (N − j) p_j`.
    fn poisson_excess(load: f64, servers: u64) -> f64 {
        let mut p = (-load).exp();
        let mut acc = servers as f64 * p;
        for j in 1..=servers {
            p *= load / j as f64;
            acc += (servers - j) as f64 * p;
        }
        load - servers as f64 + acc
    }

    #[test]
    fn single_server_closed_form() {
        let p = QueueParams::with_abandonment(1.0, 1.0, 1.0).unwrap();
        let d = erlang_a_distribution(&p, 1).unwrap();
        assert!((d.probs[0] - 1.0 / E).abs() < 1e-14);
        let mut fact = 1.0;
        for k in 0..10 {
            fact *= (k + 1) as f64;
            assert!((d.probs[1 + k] - 1.0 / (E * fact)).abs() < 1e-14, "k = {k}");
        }
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
        assert!((d.expected_queue() - 1.0 / E).abs() < 1e-10);
    }

    #[test]
    fn equal_rates_give_poisson() {
        for (load, servers) in [(1.0, 1), (10.0, 12), (100.0, 110)] {
            let p = QueueParams::with_abandonment(load, 1.0, 1.0).unwrap();
            let got = erlang_a_expected_queue(&p, servers).unwrap();
            let want = poisson_excess(load, servers);
            assert!((got - want).abs() < 1e-10, "R = {load}: {got} vs {want}");
            let d = erlang_a_distribution(&p, servers).unwrap();
            assert!((d.total_mass() - 1.0).abs() < 1e-12);
            assert!(!d.truncated);
        }
    }

    #[test]
    fn fast_abandonment_empties_the_queue() {
        let mut prev = f64::INFINITY;
        for gamma in [1.0, 10.0, 100.0, 1e4, 1e6] {
            let p = QueueParams::with_abandonment(50.0, 1.0, gamma).unwrap();
            let q = erlang_a_expected_queue(&p, 45).unwrap();
            assert!(q < prev);
            prev = q;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn gamma_is_required() {
        let p = QueueParams::new(1.0, 1.0).unwrap();
        assert!(erlang_a_distribution(&p, 1).is_err());
    }

    #[test]
    fn free_waiting_staffs_nobody() {
        let p = QueueParams::with_abandonment(100.0, 1.0, 1.0).unwrap();
        let c = CostParams::new(0.0, 1.0).unwrap();
        let opt = erlang_a_optimal_integer(&p, &c, 0.0, 10).unwrap();
        assert_eq!(opt.staffing, 0.0);
    }

    #[test]
    fn window_search_matches_brute_force() {
        let p = QueueParams::with_abandonment(100.0, 1.0, 1.0).unwrap();
        let c = CostParams::new(1.0, 1.0).unwrap();
        let brute = (0..=300u64)
            .map(|s| (s, erlang_a_cost(&p, &c, s).unwrap()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        // h = c with γ = μ makes the cost nearly flat; centre the window on the
        // fluid prescription boundary.
        let opt = erlang_a_optimal_integer(&p, &c, brute.0 as f64 + 3.0, 50).unwrap();
        assert_eq!(opt.staffing, brute.0 as f64);
        assert!((opt.cost - brute.1).abs() < 1e-12);
    }

    #[test]
    fn golden_search_matches_brute_force() {
        for (gamma, h) in [(1.0, 2.0), (0.5, 3.0), (2.0, 3.0)] {
            let p = QueueParams::with_abandonment(400.0, 1.0, gamma).unwrap();
            let c = CostParams::new(h, 1.0).unwrap();
            let brute = (150..=650u64)
                .map(|s| (s, erlang_a_excess_cost(&p, &c, s).unwrap()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let opt = erlang_a_optimal_integer(&p, &c, 400.0, 250).unwrap();
            assert_eq!(opt.staffing, brute.0 as f64, "gamma = {gamma}, h = {h}");
            assert!((opt.cost - 400.0 - brute.1).abs() < 1e-9);
        }
    }

    #[test]
    fn edge_minimum_asks_for_a_wider_window() {
        let p = QueueParams::with_abandonment(100.0, 1.0, 1.0).unwrap();
        let c = CostParams::new(2.0, 1.0).unwrap();
        let err = erlang_a_optimal_integer(&p, &c, 200.0, 10);
        assert!(matches!(err, Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn default_window() {
        assert_eq!(default_search_window(&QueueParams::new(1.0, 1.0).unwrap()), 10);
        assert_eq!(default_search_window(&QueueParams::new(1e4, 1.0).unwrap()), 500);
    }
}
