//! Log-log least-squares rate estimates.

use crate::error::{Error, Result};

/// `log value ≈ intercept + slope·log n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub used: usize,
    /// Points dropped for a non-positive or non-finite value or `n`.
    pub excluded: usize,
}

/// Fits `(n, value)` pairs with positive values; at least three are needed.
pub fn rate_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, v)| *n > 0.0 && n.is_finite() && *v > 0.0 && v.is_finite())
        .map(|&(n, v)| (n.ln(), v.ln()))
        .collect();
    let excluded = points.len() - usable.len();
    if usable.len() < 3 {
        return Err(Error::InsufficientData { usable: usable.len(), excluded });
    }
    let k = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / k;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData { usable: 1, excluded });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = usable.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    // Constant data leave only rounding noise in ss_tot.
    let r_squared = if ss_tot <= 1e-28 * k * (1.0 + my * my) { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(RateFit { slope, intercept, r_squared, used: usable.len(), excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GRID: [f64; 5] = [1e2, 1e3, 1e4, 1e5, 1e6];

    #[test]
    fn exact_power_laws() {
        let half: Vec<_> = GRID.iter().map(|&n| (n, 1.0 / n.sqrt())).collect();
        let f = rate_fit(&half).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14 && (f.r_squared - 1.0).abs() < 1e-14);

        let constant: Vec<_> = GRID.iter().map(|&n| (n, 7.0)).collect();
        let f = rate_fit(&constant).unwrap();
        assert!(f.slope.abs() < 1e-15);
        assert_eq!(f.r_squared, 1.0);

        let inverse: Vec<_> = GRID.iter().map(|&n| (n, 3.0 / n)).collect();
        let f = rate_fit(&inverse).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-14);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn bad_points_are_excluded() {
        let pts = [(1e2, 0.1), (1e3, 0.0), (1e4, -1.0), (1e5, f64::NAN), (1e6, 0.001)];
        assert_eq!(rate_fit(&pts).unwrap_err(), Error::InsufficientData { usable: 2, excluded: 3 });
        let pts = [(1e2, 0.1), (1e3, 0.0), (1e4, 0.01), (1e6, 0.001)];
        let f = rate_fit(&pts).unwrap();
        assert_eq!((f.used, f.excluded), (3, 1));
        assert!(rate_fit(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
    }

    proptest! {
        #[test]
        fn recovers_any_power_law(slope in -3.0f64..3.0, scale in 1e-6f64..1e6) {
            let pts: Vec<_> = GRID.iter().map(|&n| (n, scale * n.powf(slope))).collect();
            let f = rate_fit(&pts).unwrap();
            prop_assert!((f.slope - slope).abs() < 1e-10);
            prop_assert!((f.intercept - scale.ln()).abs() < 1e-8);
            prop_assert!((0.0..=1.0).contains(&f.r_squared));
        }

        #[test]
        fn r_squared_in_unit_interval(values in proptest::collection::vec(1e-9f64..1e9, 3..12)) {
            let pts: Vec<_> = values.iter().enumerate().map(|(i, &v)| ((i + 1) as f64, v)).collect();
            let f = rate_fit(&pts).unwrap();
            prop_assert!((0.0..=1.0).contains(&f.r_squared));
        }
    }
}
