use super::{CostParams, ExactOptimum, QueueParams};
use crate::error::{ensure_finite, Error, Result};
use crate::numerics::{integrate_semiinfinite_log, minimize_scalar, Domain, Tolerance};

/// Quadrature tolerance for the real-valued Erlang-C integral. Gap
/// measurements at `n = 10⁶` difference costs of order 10³ to resolve
/// gaps of order 10⁻⁶, hence the tight relative target.
pub const ERLANG_C_QUADRATURE: Tolerance = Tolerance { relative: 1e-13, absolute: 0.0, max_iterations: 200 };

fn check_load(load: f64) -> Result<()> {
    if !(load > 0.0) || !load.is_finite() {
        return Err(Error::InvalidParameter(format!("offered load must be positive, got {load}")));
    }
    Ok(())
}

/// Classical Erlang-C delay probability for `servers` servers and offered load
/// `load`, via the inverse Erlang-B recursion `1/B(k) = 1 + (k/R)/B(k−1)`.
pub fn erlang_c_integer(servers: u64, load: f64) -> Result<f64> {
    check_load(load)?;
    let n = servers as f64;
    if !(n > load) {
        return Err(Error::Unstable { staffing: n, load });
    }
    let mut inv_b = 1.0;
    for k in 1..=servers {
        inv_b = 1.0 + inv_b * (k as f64 / load);
    }
    let b = 1.0 / inv_b;
    let rho = load / n;
    Ok(b / (1.0 - rho * (1.0 - b)))
}

/// Erlang-C extended to a real server count `x`:
/// `C(x, R) = [R ∫₀^∞ t e^{−Rt} (1+t)^{x−1} dt]⁻¹`.
pub fn erlang_c_real(x: f64, load: f64) -> Result<f64> {
    check_load(load)?;
    ensure_finite(x, "server count")?;
    if !(x > load) {
        return Err(Error::Unstable { staffing: x, load });
    }
    let log_kernel = |t: f64| t.ln() - load * t + (x - 1.0) * t.ln_1p();
    let log_integral = integrate_semiinfinite_log(log_kernel, &ERLANG_C_QUADRATURE)?;
    Ok((-(load.ln() + log_integral)).exp())
}

/// `E[Qₙ(x)] = n·C(x, n/μ)/(xμ − n)`.
pub fn mmn_expected_queue(params: &QueueParams, x: f64) -> Result<f64> {
    let load = params.offered_load();
    if !(x > load) {
        return Err(Error::Unstable { staffing: x, load });
    }
    let c = erlang_c_real(x, load)?;
    Ok(params.n() * c / (x * params.mu() - params.n()))
}

/// `Πₙ(x) = h·E[Qₙ(x)] + c·x`.
pub fn mmn_cost(params: &QueueParams, cost: &CostParams, x: f64) -> Result<f64> {
    Ok(cost.h() * mmn_expected_queue(params, x)? + cost.c() * x)
}

/// `Πₙ(x) − c·n/μ`. Same minimizer as [`mmn_cost`], but without the large
/// constant offset, so differences keep their low-order digits.
pub fn mmn_excess_cost(params: &QueueParams, cost: &CostParams, x: f64) -> Result<f64> {
    Ok(cost.h() * mmn_expected_queue(params, x)? + cost.c() * (x - params.offered_load()))
}

/// Minimizer of `Πₙ` over `(n/μ, ∞)`, returned with its excess cost.
pub(crate) fn mmn_optimal_excess(params: &QueueParams, cost: &CostParams) -> Result<(f64, f64)> {
    if cost.h() == 0.0 {
        return Err(Error::Degenerate("h = 0: the infimum sits on the stability boundary".into()));
    }
    let load = params.offered_load();
    let start_offset = (1e-3 * load.sqrt()).max(1e-6);
    let objective = |x: f64| mmn_excess_cost(params, cost, x).unwrap_or(f64::INFINITY);
    minimize_scalar(objective, Domain::HalfLine { lo: load, start_offset }, &Tolerance::default())
}

/// Exact minimizer of `Πₙ` over real staffing levels in `(n/μ, ∞)`.
pub fn mmn_optimal(params: &QueueParams, cost: &CostParams) -> Result<ExactOptimum> {
    let (staffing, excess) = mmn_optimal_excess(params, cost)?;
    Ok(ExactOptimum { staffing, cost: excess + cost.c() * params.offered_load() })
}

/// Smallest integer `N > n/μ` with delay probability `C(N, n/μ) ≤ alpha`.
pub fn mmn_min_servers_wait_prob(params: &QueueParams, alpha: f64) -> Result<u64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let load = params.offered_load();
    let mut inv_b = 1.0;
    let mut k: u64 = 0;
    loop {
        k += 1;
        inv_b = 1.0 + inv_b * (k as f64 / load);
        let n = k as f64;
        if n > load {
            let b = 1.0 / inv_b;
            let c = b / (1.0 - (load / n) * (1.0 - b));
            if c <= alpha {
                return Ok(k);
            }
        }
        if k == u64::MAX {
            return Err(Error::Optimization("no staffing level meets the delay target".into()));
        }
    }
}
