//! Experiment configuration: a flat `key = value` file, overridden by flags.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use gaplab_core::expansions::{Exponential, HyperExponential, PatienceDist, RhoConvention};
use gaplab_core::ModelTag;

use crate::error::{usage, CliError, CliResult};

pub const DEFAULT_N_GRID: [f64; 5] = [1e2, 1e3, 1e4, 1e5, 1e6];
pub const DEFAULT_X_PROBE: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PatienceSpec {
    Exponential(f64),
    HyperExponential { p: f64, a: f64, b: f64 },
}

impl PatienceSpec {
    pub fn build(&self) -> CliResult<Arc<dyn PatienceDist>> {
        Ok(match *self {
            PatienceSpec::Exponential(rate) => Arc::new(Exponential::new(rate)?),
            PatienceSpec::HyperExponential { p, a, b } => Arc::new(HyperExponential::new(p, a, b)?),
        })
    }

    /// The abandonment rate when patience is exponential.
    pub fn exponential_rate(&self) -> Option<f64> {
        match *self {
            PatienceSpec::Exponential(rate) => Some(rate),
            PatienceSpec::HyperExponential { .. } => None,
        }
    }
}

impl FromStr for PatienceSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let (family, args) = s.split_once(':').ok_or_else(|| usage(format!("patience '{s}' must look like exp:γ or hyperexp:p,a,b")))?;
        let values = parse_list(args).map_err(|e| usage(format!("patience '{s}': {e}")))?;
        match (family.trim(), values.as_slice()) {
            ("exp", [rate]) => Ok(PatienceSpec::Exponential(*rate)),
            ("hyperexp", [p, a, b]) => Ok(PatienceSpec::HyperExponential { p: *p, a: *a, b: *b }),
            _ => Err(usage(format!("patience '{s}' must look like exp:γ or hyperexp:p,a,b"))),
        }
    }
}

impl fmt::Display for PatienceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatienceSpec::Exponential(rate) => write!(f, "exp:{rate}"),
            PatienceSpec::HyperExponential { p, a, b } => write!(f, "hyperexp:{p},{a},{b}"),
        }
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("'{t}' is not a number")))
        .collect()
}

fn parse_number(key: &str, value: &str) -> CliResult<f64> {
    value.trim().parse().map_err(|_| usage(format!("{key}: '{value}' is not a number")))
}

fn parse_bool(key: &str, value: &str) -> CliResult<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(usage(format!("{key}: '{other}' is not a boolean"))),
    }
}

/// Values that may come from a config file or from flags. `None` means
/// "not given here".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub model: Option<ModelTag>,
    pub n_grid: Option<Vec<f64>>,
    pub mu: Option<f64>,
    pub gamma: Option<f64>,
    pub h: Option<f64>,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub x_probe: Option<Vec<f64>>,
    pub refined: Option<bool>,
    pub rho_convention: Option<RhoConvention>,
    pub patience: Option<PatienceSpec>,
    pub output_path: Option<PathBuf>,
}

impl Overrides {
    /// Parses a `key = value` file. Blank lines and `#` comments are ignored;
    /// unknown keys are an error.
    pub fn parse_file(text: &str) -> CliResult<Self> {
        let mut o = Overrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "model" => o.model = Some(value.parse().map_err(|e: gaplab_core::Error| usage(e.to_string()))?),
                "n" => o.n_grid = Some(vec![parse_number(key, value)?]),
                "n_grid" => o.n_grid = Some(parse_list(value).map_err(|e| usage(format!("n_grid: {e}")))?),
                "mu" => o.mu = Some(parse_number(key, value)?),
                "gamma" => o.gamma = Some(parse_number(key, value)?),
                "h" => o.h = Some(parse_number(key, value)?),
                "c" => o.c = Some(parse_number(key, value)?),
                "alpha" => o.alpha = Some(parse_number(key, value)?),
                "x" => o.x_probe = Some(parse_list(value).map_err(|e| usage(format!("x: {e}")))?),
                "refined" => o.refined = Some(parse_bool(key, value)?),
                "rho_convention" => {
                    o.rho_convention = Some(value.parse().map_err(|e: gaplab_core::Error| usage(e.to_string()))?)
                }
                "patience" => o.patience = Some(value.parse()?),
                "out" => o.output_path = Some(PathBuf::from(value)),
                other => return Err(usage(format!("config line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        Ok(o)
    }

    /// `self` wins wherever it has a value.
    pub fn over(self, base: Overrides) -> Overrides {
        Overrides {
            model: self.model.or(base.model),
            n_grid: self.n_grid.or(base.n_grid),
            mu: self.mu.or(base.mu),
            gamma: self.gamma.or(base.gamma),
            h: self.h.or(base.h),
            c: self.c.or(base.c),
            alpha: self.alpha.or(base.alpha),
            x_probe: self.x_probe.or(base.x_probe),
            refined: self.refined.or(base.refined),
            rho_convention: self.rho_convention.or(base.rho_convention),
            patience: self.patience.or(base.patience),
            output_path: self.output_path.or(base.output_path),
        }
    }
}

/// A fully resolved, validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelTag,
    pub n_grid: Vec<f64>,
    pub mu: f64,
    pub gamma: Option<f64>,
    pub h: f64,
    pub c: f64,
    pub alpha: Option<f64>,
    pub x_probe: Vec<f64>,
    pub refined: bool,
    pub rho_convention: RhoConvention,
    pub patience: Option<PatienceSpec>,
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn resolve(o: Overrides) -> CliResult<Self> {
        let model = o.model.unwrap_or(ModelTag::MmnHalfinWhitt);
        if !matches!(model, ModelTag::MmnHalfinWhitt | ModelTag::MmnaDiffusion | ModelTag::MmngFluid) {
            return Err(usage(format!("model must be mmn-hw, mmna-diffusion or mmng-fluid, got {model}")));
        }
        let n_grid = o.n_grid.unwrap_or_else(|| DEFAULT_N_GRID.to_vec());
        if n_grid.is_empty() {
            return Err(usage("n grid is empty"));
        }
        if n_grid.iter().any(|&n| !(n > 0.0) || !n.is_finite()) {
            return Err(usage("every n must be positive and finite"));
        }
        if n_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(usage("n grid must be strictly increasing"));
        }
        let mu = o.mu.unwrap_or(1.0);
        let h = o.h.unwrap_or(1.0);
        let c = o.c.unwrap_or(1.0);
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(usage(format!("mu must be positive, got {mu}")));
        }
        if !(h >= 0.0) || !h.is_finite() {
            return Err(usage(format!("h must be non-negative, got {h}")));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(usage(format!("c must be positive, got {c}")));
        }
        if let Some(g) = o.gamma {
            if !(g > 0.0) || !g.is_finite() {
                return Err(usage(format!("gamma must be positive, got {g}")));
            }
        }
        if let Some(a) = o.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(usage(format!("alpha must lie in (0, 1), got {a}")));
            }
        }
        let x_probe = o.x_probe.unwrap_or_else(|| DEFAULT_X_PROBE.to_vec());
        if x_probe.is_empty() || x_probe.iter().any(|x| !x.is_finite()) {
            return Err(usage("x list must be non-empty and finite"));
        }
        // Exponential patience and gamma describe the same thing; keep them in sync.
        let mut gamma = o.gamma;
        let mut patience = o.patience;
        match (gamma, patience.and_then(|p| p.exponential_rate())) {
            (Some(g), Some(r)) if g != r => {
                return Err(usage(format!("gamma = {g} contradicts patience exp:{r}")));
            }
            (None, Some(r)) => gamma = Some(r),
            _ => {}
        }
        if patience.is_none() {
            patience = gamma.map(PatienceSpec::Exponential);
        }
        match model {
            ModelTag::MmnaDiffusion if gamma.is_none() => {
                return Err(usage("mmna-diffusion needs --gamma or --patience exp:γ"));
            }
            ModelTag::MmngFluid if patience.is_none() => {
                return Err(usage("mmng-fluid needs --patience or --gamma"));
            }
            _ => {}
        }
        if let Some(p) = patience {
            p.build()?;
        }
        Ok(Self {
            model,
            n_grid,
            mu,
            gamma,
            h,
            c,
            alpha: o.alpha,
            x_probe,
            refined: o.refined.unwrap_or(false),
            rho_convention: o.rho_convention.unwrap_or_default(),
            patience,
            output_path: o.output_path,
        })
    }

    pub fn cost(&self) -> CliResult<gaplab_core::CostParams> {
        Ok(gaplab_core::CostParams::new(self.h, self.c)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let file = Overrides::parse_file(
            "# experiment\nmodel = mmna-diffusion\nn_grid = 100, 1000\ngamma = 0.5\nh = 2 # waiting cost\nrefined = true\n",
        )
        .unwrap();
        let flags = Overrides { h: Some(3.0), ..Default::default() };
        let cfg = ExperimentConfig::resolve(flags.over(file)).unwrap();
        assert_eq!(cfg.model, ModelTag::MmnaDiffusion);
        assert_eq!(cfg.n_grid, vec![100.0, 1000.0]);
        assert_eq!(cfg.h, 3.0);
        assert_eq!(cfg.gamma, Some(0.5));
        assert_eq!(cfg.patience, Some(PatienceSpec::Exponential(0.5)));
        assert!(cfg.refined);
    }

    #[test]
    fn defaults() {
        let cfg = ExperimentConfig::resolve(Overrides::default()).unwrap();
        assert_eq!(cfg.model, ModelTag::MmnHalfinWhitt);
        assert_eq!(cfg.n_grid, DEFAULT_N_GRID.to_vec());
        assert_eq!((cfg.mu, cfg.h, cfg.c), (1.0, 1.0, 1.0));
        assert_eq!(cfg.rho_convention, RhoConvention::Utilization);
        assert!(!cfg.refined);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Overrides::parse_file("colour = blue").is_err());
        assert!(Overrides::parse_file("mu: 1").is_err());
        assert!(Overrides::parse_file("mu = one").is_err());
        let bad = [
            Overrides { n_grid: Some(vec![100.0, 10.0]), ..Default::default() },
            Overrides { n_grid: Some(vec![]), ..Default::default() },
            Overrides { mu: Some(0.0), ..Default::default() },
            Overrides { alpha: Some(1.0), ..Default::default() },
            Overrides { model: Some(ModelTag::MmnaDiffusion), ..Default::default() },
            Overrides { model: Some(ModelTag::Synthetic), ..Default::default() },
            Overrides { gamma: Some(1.0), patience: Some(PatienceSpec::Exponential(2.0)), ..Default::default() },
        ];
        for o in bad {
            assert!(matches!(ExperimentConfig::resolve(o.clone()), Err(CliError::Usage(_))), "{o:?}");
        }
    }

    #[test]
    fn patience_specs() {
        assert_eq!("exp:2".parse::<PatienceSpec>().unwrap(), PatienceSpec::Exponential(2.0));
        assert_eq!(
            "hyperexp:0.3,0.5,2".parse::<PatienceSpec>().unwrap(),
            PatienceSpec::HyperExponential { p: 0.3, a: 0.5, b: 2.0 }
        );
        assert!("exp:1,2".parse::<PatienceSpec>().is_err());
        assert!("weibull:1".parse::<PatienceSpec>().is_err());
        let spec: PatienceSpec = "hyperexp:0.3,0.5,2".parse().unwrap();
        assert_eq!(spec.to_string().parse::<PatienceSpec>().unwrap(), spec);
    }
}
