//! Global-then-local scalar minimization.
//!
//! Every search starts with a 512-point grid (half uniform, half geometric
//! toward the lower end, where boundary layers live) and refines the best grid
//! cell by golden-section search. Unimodality is never assumed.

use super::{Bracket, Domain, Tolerance};
use crate::error::{Error, Result};

const GRID_POINTS: usize = 512;
const MAX_DOUBLINGS: usize = 1100;
const DOUBLINGS_PAST_BEST: usize = 3;
/// Refined minimizers closer than `CLUSTER_TOL·(1 + |x|)` are one point.
const CLUSTER_TOL: f64 = 1e-6;

#[inline]
fn clean(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Golden-section search on `[a, b]`; returns the best point evaluated.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: &Tolerance) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = clean(f(x1));
    let mut f2 = clean(f(x2));
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..tol.max_iterations {
        if (b - a).abs() <= tol.relative * (1.0 + best.0.abs()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = clean(f(x1));
            if f1 < best.1 {
                best = (x1, f1);
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = clean(f(x2));
            if f2 < best.1 {
                best = (x2, f2);
            }
        }
    }
    best
}

/// Hybrid scan grid on `[lo, hi]`. With `open_offset`, the interval is open at
/// `lo` and the geometric half starts `open_offset` above it.
fn hybrid_grid(lo: f64, hi: f64, open_offset: Option<f64>) -> Vec<f64> {
    let span = hi - lo;
    let half = GRID_POINTS / 2;
    let (first, offset) = match open_offset {
        Some(off) => (lo + off.min(span), off.min(span)),
        None => (lo, (span * 1e-9).max(f64::MIN_POSITIVE)),
    };
    let mut xs = Vec::with_capacity(GRID_POINTS + 1);
    for i in 0..half {
        xs.push(first + (hi - first) * i as f64 / (half - 1) as f64);
    }
    let ratio = span / offset;
    for i in 0..half {
        let x = lo + offset * ratio.powf(i as f64 / (half - 1) as f64);
        if x >= first && x <= hi {
            xs.push(x);
        }
    }
    if open_offset.is_none() {
        xs.push(lo);
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

fn expand_half_line<F: Fn(f64) -> f64>(f: &F, lo: f64, start_offset: f64) -> Result<f64> {
    let mut best = (0usize, f64::INFINITY);
    let mut step = start_offset;
    for k in 0..MAX_DOUBLINGS {
        let x = lo + step;
        if !x.is_finite() {
            break;
        }
        let v = clean(f(x));
        if v == f64::NEG_INFINITY {
            return Err(Error::UnboundedBelow { x, value: v });
        }
        if v < best.1 {
            best = (k, v);
        } else if k >= best.0 + DOUBLINGS_PAST_BEST && best.1.is_finite() {
            return Ok(x);
        }
        step *= 2.0;
    }
    Err(Error::UnboundedBelow { x: lo + step, value: best.1 })
}

fn expand_real<F: Fn(f64) -> f64>(f: &F) -> Result<f64> {
    let mut best = (0usize, clean(f(0.0)));
    let mut r = 1.0_f64;
    for k in 1..MAX_DOUBLINGS {
        if !r.is_finite() {
            break;
        }
        for x in [-r, r] {
            let v = clean(f(x));
            if v == f64::NEG_INFINITY {
                return Err(Error::UnboundedBelow { x, value: v });
            }
            if v < best.1 {
                best = (k, v);
            }
        }
        if k >= best.0 + DOUBLINGS_PAST_BEST && best.1.is_finite() {
            return Ok(r);
        }
        r *= 2.0;
    }
    Err(Error::UnboundedBelow { x: r, value: best.1 })
}

/// Minimizes `f` over `domain`: geometric bracket expansion for unbounded
/// domains, a 512-point global scan, then golden-section refinement of the
/// best grid cell. The result is never worse than any scanned grid point.
pub fn minimize_scalar<F: Fn(f64) -> f64>(f: F, domain: Domain, tol: &Tolerance) -> Result<(f64, f64)> {
    let xs = match domain {
        Domain::Interval(b) => hybrid_grid(b.lo, b.hi, None),
        Domain::HalfLine { lo, start_offset } => {
            if !lo.is_finite() || !(start_offset > 0.0) {
                return Err(Error::Domain(format!("invalid half-line ({lo}, ∞) with offset {start_offset}")));
            }
            let hi = expand_half_line(&f, lo, start_offset)?;
            hybrid_grid(lo, hi, Some(start_offset))
        }
        Domain::Real => {
            let r = expand_real(&f)?;
            let mut xs: Vec<f64> = (0..GRID_POINTS).map(|i| -r + 2.0 * r * i as f64 / (GRID_POINTS - 1) as f64).collect();
            xs.push(0.0);
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            xs
        }
    };
    let fs: Vec<f64> = xs.iter().map(|&x| clean(f(x))).collect();
    let (i, &fbest) = fs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Optimization("empty scan grid".into()))?;
    if fbest == f64::INFINITY {
        return Err(Error::Optimization("objective is not finite anywhere on the scan grid".into()));
    }
    if fbest == f64::NEG_INFINITY {
        return Err(Error::UnboundedBelow { x: xs[i], value: fbest });
    }
    let a = xs[i.saturating_sub(1)];
    let b = xs[(i + 1).min(xs.len() - 1)];
    let (xr, fr) = golden_section(&f, a, b, tol);
    Ok(if fr < fbest { (xr, fr) } else { (xs[i], fbest) })
}

/// One connected component of the numerical argmin set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgminRegion {
    pub lo: f64,
    pub hi: f64,
    pub representative: f64,
    pub value: f64,
}

impl ArgminRegion {
    pub fn is_point(&self) -> bool {
        self.hi - self.lo <= CLUSTER_TOL * (1.0 + self.representative.abs())
    }
}

/// Connected regions where `f ≤ f_min + tol.absolute·(1 + |f_min|)`.
///
/// Every grid-level local minimum is refined by golden-section search; the
/// refined points and the in-band grid runs are then merged into regions.
pub fn argmin_regions<F: Fn(f64) -> f64>(f: F, domain: Bracket, tol: &Tolerance) -> Result<Vec<ArgminRegion>> {
    if !(domain.lo < domain.hi) || !domain.lo.is_finite() || !domain.hi.is_finite() {
        return Err(Error::Domain(format!("invalid domain [{}, {}]", domain.lo, domain.hi)));
    }
    let xs = hybrid_grid(domain.lo, domain.hi, None);
    let fs: Vec<f64> = xs.iter().map(|&x| clean(f(x))).collect();
    let last = xs.len() - 1;

    // Runs of consecutive grid-level local minima (plateaus form one run).
    let is_local_min = |i: usize| {
        let left = i == 0 || fs[i] <= fs[i - 1];
        let right = i == last || fs[i] <= fs[i + 1];
        left && right && fs[i].is_finite()
    };
    let mut refined: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i <= last {
        if !is_local_min(i) {
            i += 1;
            continue;
        }
        let start = i;
        while i < last && is_local_min(i + 1) {
            i += 1;
        }
        let a = xs[start.saturating_sub(1)];
        let b = xs[(i + 1).min(last)];
        let best_grid = (start..=i).map(|k| (xs[k], fs[k])).min_by(|p, q| p.1.total_cmp(&q.1)).unwrap();
        let r = golden_section(&f, a, b, tol);
        refined.push(if r.1 < best_grid.1 { r } else { best_grid });
        i += 1;
    }
    if refined.is_empty() {
        return Err(Error::Optimization("objective is not finite on the domain".into()));
    }

    let f_min = refined.iter().map(|p| p.1).chain(fs.iter().copied()).fold(f64::INFINITY, f64::min);
    if f_min == f64::NEG_INFINITY {
        return Err(Error::UnboundedBelow { x: f64::NAN, value: f_min });
    }
    let band = f_min + tol.absolute * (1.0 + f_min.abs());

    // In-band grid runs become interval regions.
    let mut regions: Vec<ArgminRegion> = Vec::new();
    let mut k = 0;
    while k <= last {
        if fs[k] > band {
            k += 1;
            continue;
        }
        let start = k;
        while k < last && fs[k + 1] <= band {
            k += 1;
        }
        let best = (start..=k).min_by(|&p, &q| fs[p].total_cmp(&fs[q])).unwrap();
        regions.push(ArgminRegion { lo: xs[start], hi: xs[k], representative: xs[best], value: fs[best] });
        k += 1;
    }
    // Refined points either sharpen a neighbouring run or stand alone.
    for &(x, v) in refined.iter().filter(|p| p.1 <= band) {
        let host = regions.iter_mut().find(|r| {
            let lo_idx = xs.partition_point(|&g| g < r.lo).saturating_sub(1);
            let hi_idx = (xs.partition_point(|&g| g <= r.hi)).min(last);
            x >= xs[lo_idx] && x <= xs[hi_idx]
        });
        match host {
            Some(r) => {
                r.lo = r.lo.min(x);
                r.hi = r.hi.max(x);
                if v < r.value {
                    r.representative = x;
                    r.value = v;
                }
            }
            None => regions.push(ArgminRegion { lo: x, hi: x, representative: x, value: v }),
        }
    }
    regions.sort_by(|a, b| a.representative.total_cmp(&b.representative));

    let mut merged: Vec<ArgminRegion> = Vec::with_capacity(regions.len());
    for r in regions {
        match merged.last_mut() {
            Some(m) if r.lo <= m.hi || (r.representative - m.representative).abs() <= CLUSTER_TOL * (1.0 + r.representative.abs()) => {
                m.lo = m.lo.min(r.lo);
                m.hi = m.hi.max(r.hi);
                if r.value < m.value {
                    m.representative = r.representative;
                    m.value = r.value;
                }
            }
            _ => merged.push(r),
        }
    }
    Ok(merged)
}

/// Sorted representatives of every connected component of the argmin set.
pub fn argmin_set<F: Fn(f64) -> f64>(f: F, domain: Bracket, tol: &Tolerance) -> Result<Vec<f64>> {
    Ok(argmin_regions(f, domain, tol)?.into_iter().map(|r| r.representative).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::mills_ratio;
    use std::f64::consts::PI;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn quadratic_on_the_real_line() {
        let (x, v) = minimize_scalar(|x| (x - 3.0).powi(2), Domain::Real, &tol()).unwrap();
        assert!((x - 3.0).abs() < 1e-6);
        assert!(v < 1e-12);
    }

    #[test]
    fn coercive_at_zero_on_half_line() {
        let (x, v) = minimize_scalar(|x| x * x + 1.0 / x, Domain::HalfLine { lo: 0.0, start_offset: 1e-6 }, &tol()).unwrap();
        let want = 2f64.powf(-1.0 / 3.0);
        assert!((x - want).abs() < 1e-6, "{x}");
        assert!((v - (want * want + 1.0 / want)).abs() < 1e-12);
        assert!((v - 1.889_881_574_842_310).abs() < 1e-9);
    }

    #[test]
    fn halfin_whitt_leading_cost_against_fine_grid() {
        let pibar = |x: f64| {
            if x <= 0.0 {
                return f64::INFINITY;
            }
            x + 1.0 / (x * (1.0 + x * mills_ratio(x).unwrap()))
        };
        let (x, _) = minimize_scalar(pibar, Domain::HalfLine { lo: 0.0, start_offset: 1e-6 }, &tol()).unwrap();
        // 10⁶-point grid on (0, 1].
        let n = 1_000_000;
        let (mut gx, mut gv) = (0.0, f64::INFINITY);
        for i in 1..=n {
            let z = i as f64 / n as f64;
            let v = pibar(z);
            if v < gv {
                gv = v;
                gx = z;
            }
        }
        assert!((x - gx).abs() <= 1e-6, "{x} vs grid {gx}");
        assert!((x - 0.8419909094974484).abs() < 1e-6);
    }

    #[test]
    fn decreasing_without_bound_is_reported() {
        let err = minimize_scalar(|x| -x, Domain::HalfLine { lo: 0.0, start_offset: 1.0 }, &tol());
        assert!(matches!(err, Err(Error::UnboundedBelow { .. })));
    }

    #[test]
    fn double_well_has_two_argmins() {
        let set = argmin_set(|x| (x * x - 1.0).powi(2), Bracket::new(-3.0, 3.0).unwrap(), &tol()).unwrap();
        assert_eq!(set.len(), 2, "{set:?}");
        assert!((set[0] + 1.0).abs() < 1e-6 && (set[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn parabola_has_one_argmin() {
        let set = argmin_set(|x| x * x, Bracket::new(-1.0, 1.0).unwrap(), &tol()).unwrap();
        assert_eq!(set.len(), 1);
        assert!(set[0].abs() < 1e-6);
    }

    #[test]
    fn cosine_minima() {
        let set = argmin_set(f64::cos, Bracket::new(0.0, 4.0 * PI).unwrap(), &tol()).unwrap();
        assert_eq!(set.len(), 2, "{set:?}");
        assert!((set[0] - PI).abs() < 1e-6 && (set[1] - 3.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn plateau_is_one_region() {
        let f = |x: f64| if (0.0..=1.0).contains(&x) { 1.0 } else { 1.0 + (x - 0.5).abs() };
        let regions = argmin_regions(f, Bracket::new(-2.0, 3.0).unwrap(), &tol()).unwrap();
        assert_eq!(regions.len(), 1, "{regions:?}");
        assert!(regions[0].lo < 0.01 && regions[0].hi > 0.99);
    }
}
