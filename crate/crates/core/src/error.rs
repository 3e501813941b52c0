use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no sign change on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("did not converge: {reason} (best estimate {estimate})")]
    Convergence { reason: String, estimate: f64 },

    #[error("objective appears unbounded below (f({x}) = {value})")]
    UnboundedBelow { x: f64, value: f64 },

    #[error("unstable system: staffing {staffing} does not exceed offered load {load}")]
    Unstable { staffing: f64, load: f64 },

    #[error("degenerate objective: {0}")]
    Degenerate(String),

    #[error("search window [{lo}, {hi}] too small: minimum found at edge {argmin}")]
    WindowTooSmall { lo: u64, hi: u64, argmin: u64 },

    #[error("outside the valid regime: {0}")]
    Regime(String),

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("condition {condition} violated: {detail}")]
    ConditionViolation { condition: u8, detail: String },

    #[error("insufficient data: {usable} usable points ({excluded} excluded)")]
    InsufficientData { usable: usize, excluded: usize },
}

pub(crate) fn ensure_finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be finite, got {x}")))
    }
}
