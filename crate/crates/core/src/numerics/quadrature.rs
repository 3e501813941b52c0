//! Adaptive Simpson quadrature, including a peak-scaled variant for integrals
//! over `(0, ∞)` whose integrand is only available through its logarithm.
//!
//! The semi-infinite routine locates the log-peak, splits the half-line there,
//! and truncates each side where the integrand has dropped `LOG_DYNAMIC_RANGE`
//! nats below the peak. Everything is integrated as `exp(log f − log f_peak)`,
//! so sharply peaked integrands (the Erlang-C kernel at `R = 10⁶`) neither
//! overflow nor underflow.

use super::Tolerance;
use crate::error::{Error, Result};

const LOG_DYNAMIC_RANGE: f64 = 45.0;
const LOG_T_MIN: f64 = -60.0;
const LOG_T_MAX: f64 = 60.0;
const LOG_T_STEP: f64 = 0.5;
const INITIAL_PANELS: usize = 8;
const COARSE_PANELS: usize = 64;
const MAX_DEPTH: usize = 60;
const EVAL_BUDGET: usize = 4_000_000;

struct Simpson<'a, F: Fn(f64) -> f64> {
    f: &'a F,
    max_depth: usize,
    evals: usize,
    exhausted: bool,
}

impl<F: Fn(f64) -> f64> Simpson<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn recurse(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: usize) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        self.evals += 2;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        let refined = left + right + delta / 15.0;
        if delta.abs() <= 15.0 * eps || lm <= a || rm >= b {
            return refined;
        }
        if depth >= self.max_depth || self.evals >= EVAL_BUDGET {
            self.exhausted = true;
            return refined;
        }
        self.recurse(a, m, fa, flm, fm, left, 0.5 * eps, depth + 1)
            + self.recurse(m, b, fm, frm, fb, right, 0.5 * eps, depth + 1)
    }

    /// Integrates over `[a, b]` split into equal panels, each refined to its
    /// width-proportional share of `eps`.
    fn integrate(&mut self, a: f64, b: f64, eps: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        let mut x0 = a;
        let mut f0 = (self.f)(a);
        for i in 0..panels {
            let x1 = if i + 1 == panels { b } else { a + (i + 1) as f64 * h };
            let xm = 0.5 * (x0 + x1);
            let fm = (self.f)(xm);
            let f1 = (self.f)(x1);
            self.evals += 2;
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            total += self.recurse(x0, x1, f0, fm, f1, whole, eps / panels as f64, 0);
            x0 = x1;
            f0 = f1;
        }
        total
    }
}

fn composite_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut f0 = f(a);
    let mut sum = 0.0;
    for i in 0..panels {
        let x0 = a + i as f64 * h;
        let x1 = if i + 1 == panels { b } else { x0 + h };
        let f1 = f(x1);
        sum += f0 + 4.0 * f(0.5 * (x0 + x1)) + f1;
        f0 = f1;
    }
    sum * h / 6.0
}

/// Adaptive Simpson on a finite interval. The absolute target is
/// `max(tol.relative·|I|, tol.absolute)` with `|I|` from a coarse pass.
pub fn integrate_interval<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: &Tolerance) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate_interval(f, b, a, tol).map(|v| -v);
    }
    let coarse = composite_simpson(&f, a, b, COARSE_PANELS);
    let eps = (tol.relative * coarse.abs()).max(tol.absolute).max(f64::MIN_POSITIVE);
    let mut s = Simpson { f: &f, max_depth: tol.max_iterations.min(MAX_DEPTH), evals: 0, exhausted: false };
    let value = s.integrate(a, b, eps, INITIAL_PANELS);
    if s.exhausted || !value.is_finite() {
        return Err(Error::Convergence { reason: "adaptive Simpson budget exhausted".into(), estimate: value });
    }
    Ok(value)
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Maximizes a unimodal function on `[a, b]` by golden-section search.
fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

struct Peak {
    t: f64,
    log_value: f64,
}

fn locate_peak<F: Fn(f64) -> f64>(lf: &F) -> Result<Peak> {
    let n = ((LOG_T_MAX - LOG_T_MIN) / LOG_T_STEP).round() as usize + 1;
    let grid: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let u = LOG_T_MIN + i as f64 * LOG_T_STEP;
            (u, sanitize(lf(u.exp())))
        })
        .collect();
    let (imax, &(umax, vmax)) = grid
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("non-empty grid");
    if vmax == f64::NEG_INFINITY || vmax.is_nan() {
        return Err(Error::Convergence { reason: "integrand vanishes on the whole scan".into(), estimate: 0.0 });
    }
    if vmax == f64::INFINITY {
        return Err(Error::Convergence { reason: "integrand has an infinite peak".into(), estimate: f64::INFINITY });
    }
    if imax + 1 == grid.len() {
        return Err(Error::Convergence {
            reason: format!("no finite peak: integrand still increasing at t = {:e}", umax.exp()),
            estimate: f64::INFINITY,
        });
    }
    if imax == 0 {
        let at_zero = sanitize(lf(f64::MIN_POSITIVE));
        return Ok(Peak { t: 0.0, log_value: at_zero.max(vmax) });
    }
    let (u, v) = golden_max(|u| sanitize(lf(u.exp())), grid[imax - 1].0, grid[imax + 1].0);
    if v >= vmax {
        Ok(Peak { t: u.exp(), log_value: v })
    } else {
        Ok(Peak { t: umax.exp(), log_value: vmax })
    }
}

/// Smallest `t > peak` (to bisection accuracy) where `lf(t) < cut`.
fn right_cutoff<F: Fn(f64) -> f64>(lf: &F, peak: f64, cut: f64) -> Result<f64> {
    let mut step = if peak > 0.0 { peak * 1e-8 } else { 1e-12 };
    let mut prev = peak;
    let mut hi = f64::NAN;
    for _ in 0..2100 {
        let t = peak + step;
        if !t.is_finite() {
            break;
        }
        if sanitize(lf(t)) < cut {
            hi = t;
            break;
        }
        prev = t;
        step *= 2.0;
    }
    if hi.is_nan() {
        return Err(Error::Convergence { reason: "integrand does not decay on the right".into(), estimate: f64::INFINITY });
    }
    let mut lo = prev;
    for _ in 0..200 {
        if hi - lo <= 1e-6 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if sanitize(lf(mid)) < cut {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Largest `t < peak` (to bisection accuracy) where `lf(t) < cut`, or 0.
fn left_cutoff<F: Fn(f64) -> f64>(lf: &F, peak: f64, cut: f64) -> f64 {
    if peak <= 0.0 || sanitize(lf(f64::MIN_POSITIVE)) >= cut {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, peak);
    for _ in 0..200 {
        if hi - lo <= 1e-6 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if sanitize(lf(mid)) < cut {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `ln ∫₀^∞ exp(log_integrand(t)) dt`.
///
/// `log_integrand` may return `−∞` where the integrand vanishes; it must be
/// unimodal (or at least have a single dominant peak on the log-`t` scan).
pub fn integrate_semiinfinite_log<F: Fn(f64) -> f64>(log_integrand: F, tol: &Tolerance) -> Result<f64> {
    let lf = &log_integrand;
    let peak = locate_peak(lf)?;
    let cut = peak.log_value - LOG_DYNAMIC_RANGE;
    let right = right_cutoff(lf, peak.t, cut)?;
    let left = left_cutoff(lf, peak.t, cut);

    // The left end is evaluated just inside the domain so that integrands
    // like `0·ln t` see their limit instead of NaN.
    let scaled = |t: f64| {
        let v = sanitize(lf(t.max(f64::MIN_POSITIVE))) - peak.log_value;
        v.exp()
    };
    let mut coarse = composite_simpson(&scaled, peak.t, right, COARSE_PANELS);
    if peak.t > left {
        coarse += composite_simpson(&scaled, left, peak.t, COARSE_PANELS);
    }
    if !(coarse > 0.0) || !coarse.is_finite() {
        return Err(Error::Convergence { reason: "coarse quadrature estimate is not positive".into(), estimate: coarse });
    }
    let eps = (tol.relative * coarse).max(f64::MIN_POSITIVE);
    let total_width = right - left;
    let mut s = Simpson { f: &scaled, max_depth: tol.max_iterations.min(MAX_DEPTH), evals: 0, exhausted: false };
    let mut value = s.integrate(peak.t, right, eps * (right - peak.t) / total_width, INITIAL_PANELS);
    if peak.t > left {
        value += s.integrate(left, peak.t, eps * (peak.t - left) / total_width, INITIAL_PANELS);
    }
    let log_value = peak.log_value + value.ln();
    if s.exhausted || !(value > 0.0) {
        return Err(Error::Convergence { reason: "adaptive Simpson budget exhausted".into(), estimate: log_value.exp() });
    }
    Ok(log_value)
}

/// `∫₀^∞ exp(log_integrand(t)) dt`; see [`integrate_semiinfinite_log`].
pub fn integrate_semiinfinite<F: Fn(f64) -> f64>(log_integrand: F, tol: &Tolerance) -> Result<f64> {
    integrate_semiinfinite_log(log_integrand, tol).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_two() {
        let v = integrate_semiinfinite(|t: f64| t.ln() - t, &tol()).unwrap();
        assert!(rel(v, 1.0) < 1e-10, "{v}");
    }

    #[test]
    fn gamma_two_plus_gamma_three() {
        let v = integrate_semiinfinite(|t: f64| t.ln() - t + t.ln_1p(), &tol()).unwrap();
        assert!(rel(v, 3.0) < 1e-10, "{v}");
    }

    #[test]
    fn half_gaussian() {
        let v = integrate_semiinfinite(|t: f64| -0.5 * t * t, &tol()).unwrap();
        assert!(rel(v, (std::f64::consts::PI / 2.0).sqrt()) < 1e-10, "{v}");
    }

    #[test]
    fn gamma_function_family() {
        let mut factorial = 1.0;
        for k in 0..=10 {
            if k > 0 {
                factorial *= k as f64;
            }
            let v = integrate_semiinfinite(|t: f64| k as f64 * t.ln() - t, &tol()).unwrap();
            assert!(rel(v, factorial) < 1e-10, "k = {k}: {v} vs {factorial}");
        }
    }

    #[test]
    fn sharply_peaked_kernel_in_log_space() {
        // ∫ t^k e^{-λt} dt = k!/λ^{k+1} with a peak of width ~1e-6.
        let (k, lambda) = (3.0_f64, 1e6_f64);
        let lv = integrate_semiinfinite_log(|t: f64| k * t.ln() - lambda * t, &tol()).unwrap();
        let want = 6f64.ln() - (k + 1.0) * lambda.ln();
        assert!((lv - want).abs() < 1e-10, "{lv} vs {want}");
    }

    #[test]
    fn growing_integrand_has_no_peak() {
        let err = integrate_semiinfinite(|t: f64| t, &tol());
        assert!(matches!(err, Err(Error::Convergence { .. })));
    }

    #[test]
    fn finite_interval() {
        let v = integrate_interval(|x: f64| x.exp(), 0.0, 1.0, &tol()).unwrap();
        assert!(rel(v, std::f64::consts::E - 1.0) < 1e-10);
        let w = integrate_interval(|x: f64| x * x, 2.0, 0.0, &tol()).unwrap();
        assert!(rel(w, -8.0 / 3.0) < 1e-12);
    }
}
