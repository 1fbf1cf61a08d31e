//! Run configuration: model, sampling grid, tolerances and output.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::geometry::{build_euclidean_conformal, EuclideanConformal};
use crate::phi::{PhiModel, PhiSpec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaKind {
    /// `a = delta`, `b_i = lambda x_i + shift_i`
    #[default]
    Euclidean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub alpha: AlphaKind,
    pub n: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub shift: Vec<f64>,
    pub phi: PhiSpec,
    /// Range of `b = |beta|_alpha` sampled by grids.
    #[serde(default = "default_b_range")]
    pub b_range: [f64; 2],
}

fn default_lambda() -> f64 {
    1.0
}

fn default_b_range() -> [f64; 2] {
    [0.5, 1.5]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_points: usize,
    pub directions: usize,
    /// Requested `s / b` range; clipped to the admissible interval.
    #[serde(default = "default_s_range")]
    pub s_range: [f64; 2],
    #[serde(default)]
    pub seed: u64,
    /// Distance kept from `s = +-b` and from singular directions, relative to `b`.
    #[serde(default = "default_edge_margin")]
    pub edge_margin: f64,
}

fn default_edge_margin() -> f64 {
    1e-3
}

fn default_s_range() -> [f64; 2] {
    [-0.6, 0.95]
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            x_points: 10,
            directions: 32,
            s_range: default_s_range(),
            seed: 0,
            edge_margin: default_edge_margin(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Scalar characterization residuals.
    pub scalar: f64,
    /// Tensor norms relative to `rho / alpha^3`.
    pub tensor: f64,
    /// Smallest Berwald residual accepted as a strict failure.
    pub nonberwald_margin: f64,
    /// Largest fraction of unclassifiable points.
    pub coverage: f64,
    /// Relative change of `g_ij` under a change of `y` for a Riemannian metric.
    pub riemannian: f64,
    pub compatibility: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            scalar: 1e-7,
            tensor: 1e-6,
            nonberwald_margin: 1e-3,
            coverage: 0.01,
            riemannian: 1e-8,
            compatibility: 1e-8,
        }
    }
}

impl Tolerances {
    /// Every tolerance replaced by `tol` except the margins.
    pub fn with_override(self, tol: f64) -> Self {
        Tolerances {
            scalar: tol,
            tensor: tol,
            riemannian: tol,
            compatibility: tol,
            ..self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

fn default_dir() -> String {
    "out".into()
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Json, OutputFormat::Csv]
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Number of `b^2` samples used when checking coefficient signs.
const SIGN_SAMPLES: usize = 64;

impl RunConfig {
    /// The example model on `E^3` with default grid and tolerances.
    pub fn example() -> Self {
        RunConfig {
            model: ModelConfig {
                alpha: AlphaKind::Euclidean,
                n: 3,
                lambda: 1.0,
                shift: Vec::new(),
                phi: PhiSpec::ShenExample,
                b_range: default_b_range(),
            },
            grid: GridSpec::default(),
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = &self.model;
        if m.n < 2 {
            return Err(ConfigError::Invalid(format!(
                "n must be at least 2, got {}",
                m.n
            )));
        }
        if !m.shift.is_empty() && m.shift.len() != m.n {
            return Err(ConfigError::Invalid(format!(
                "shift has {} entries, expected {}",
                m.shift.len(),
                m.n
            )));
        }
        let [lo, hi] = m.b_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "b_range [{lo}, {hi}] must satisfy 0 < lo <= hi"
            )));
        }
        let coeffs = match &m.phi {
            PhiSpec::Riemannian(p) => vec![
                ("lambda0", &p.lambda0),
                ("lambda1", &p.lambda1),
                ("lambda3", &p.lambda3),
            ],
            PhiSpec::Unicorn(p) => vec![
                ("c1", &p.c1),
                ("lambda0", &p.lambda0),
                ("lambda1", &p.lambda1),
                ("lambda2", &p.lambda2),
                ("lambda3", &p.lambda3),
            ],
            PhiSpec::ShenExample | PhiSpec::Custom { .. } => Vec::new(),
        };
        for (name, c) in &coeffs {
            if c.0.is_empty() {
                return Err(ConfigError::Invalid(format!(
                    "coefficient list `{name}` is empty"
                )));
            }
        }
        if let Some((_, l3)) = coeffs.iter().find(|(name, _)| *name == "lambda3") {
            for k in 0..=SIGN_SAMPLES {
                let b = lo + (hi - lo) * k as f64 / SIGN_SAMPLES as f64;
                let b2 = b * b;
                let v = l3.eval(b2);
                if !(v > 0.0) {
                    return Err(ConfigError::Invalid(format!(
                        "lambda3 = {v} is not positive at b^2 = {b2}"
                    )));
                }
            }
        }
        if !(self.grid.edge_margin >= 0.0 && self.grid.edge_margin < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "grid edge_margin {} must lie in [0, 1)",
                self.grid.edge_margin
            )));
        }
        if self.grid.s_range[0] >= self.grid.s_range[1] {
            return Err(ConfigError::Invalid("grid s_range is empty".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("scalar", t.scalar),
            ("tensor", t.tensor),
            ("nonberwald_margin", t.nonberwald_margin),
            ("coverage", t.coverage),
            ("riemannian", t.riemannian),
            ("compatibility", t.compatibility),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid(format!("tolerance `{name}` = {v}")));
            }
        }
        Ok(())
    }

    pub fn structure(&self) -> Result<EuclideanConformal, ConfigError> {
        let m = &self.model;
        Ok(build_euclidean_conformal(m.n, m.lambda, &m.shift)?)
    }

    pub fn phi(&self) -> PhiModel {
        PhiModel::from_spec(self.model.phi.clone())
    }
}
