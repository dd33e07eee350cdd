//! Run configuration: one TOML (or JSON) file per experiment.

use std::path::Path;

use kpplab_core::conv::Boundary;
use kpplab_core::suite::SuiteOptions;
use kpplab_core::{KernelSpec, ModelParams, Tolerances};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Run directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub model: ModelParams,
    pub kernels: Kernels,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub speed: SpeedConfig,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub verify: SuiteOptions,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kernels {
    pub aplus: KernelSpec,
    pub aminus: KernelSpec,
    /// Unit propagation direction; defaults to the first coordinate axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
}

impl Kernels {
    pub fn direction(&self) -> Vec<f64> {
        self.direction.clone().unwrap_or_else(|| {
            let mut e = vec![0.0; self.aplus.dim()];
            e[0] = 1.0;
            e
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub step: f64,
    pub half_width: f64,
    pub boundary: Boundary,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            step: 0.05,
            half_width: 60.0,
            boundary: Boundary::Wave,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scheme {
    Rk4 { dt: f64 },
    Picard { tau_hat: f64, substeps: usize, max_iter: usize },
}

impl Default for Scheme {
    fn default() -> Self {
        Scheme::Rk4 { dt: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Initial {
    /// `theta` for `s <= position`, zero beyond.
    Step { position: f64 },
    Constant { value: f64 },
    /// `amplitude * exp(-(s / width)^2)`.
    Bump { amplitude: f64, width: f64 },
    /// Seeded random field with values in `[0, theta]`.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub horizon: f64,
    pub sample_every: f64,
    /// Front level; defaults to `theta / 2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    pub initial: Initial,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            horizon: 30.0,
            sample_every: 0.5,
            level: None,
            initial: Initial::Step { position: -40.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpeedConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub n: usize,
}

impl Default for SpeedConfig {
    fn default() -> Self {
        Self {
            lambda_min: 0.01,
            lambda_max: 3.0,
            n: 300,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    /// Wave speed; defaults to `c* + offset`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub offset: f64,
    pub half_width: f64,
    pub dt: f64,
    pub max_iter: usize,
    pub omega: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            c: None,
            offset: 0.5,
            half_width: 60.0,
            dt: 0.02,
            max_iter: 3000,
            omega: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub n_directions: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { n_directions: 16 }
    }
}

impl RunConfig {
    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let cfg = if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
        .map_err(|e| format!("{}: {e}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| match e.span() {
            Some(span) => {
                let (line, col) = line_col(text, span.start);
                format!("line {line}, column {col}: {}", e.message())
            }
            None => e.message().to_string(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("line {}, column {}: {e}", e.line(), e.column()))
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes to JSON");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn validate(&self) -> Result<(), String> {
        self.tolerances.validate().map_err(|e| e.to_string())?;
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be positive, got {v}"))
            }
        };
        positive("grid.step", self.grid.step)?;
        positive("grid.half_width", self.grid.half_width)?;
        match self.scheme {
            Scheme::Rk4 { dt } => positive("scheme.dt", dt)?,
            Scheme::Picard { tau_hat, substeps, max_iter } => {
                positive("scheme.tau_hat", tau_hat)?;
                if substeps == 0 || max_iter == 0 {
                    return Err("scheme.substeps and scheme.max_iter must be positive".into());
                }
            }
        }
        positive("simulate.horizon", self.simulate.horizon)?;
        positive("simulate.sample_every", self.simulate.sample_every)?;
        if let Initial::Bump { width, .. } = self.simulate.initial {
            positive("simulate.initial.width", width)?;
        }
        positive("speed.lambda_min", self.speed.lambda_min)?;
        if !(self.speed.lambda_max >= self.speed.lambda_min && self.speed.lambda_max.is_finite()) {
            return Err(format!(
                "speed.lambda_max must be finite and at least lambda_min, got {}",
                self.speed.lambda_max
            ));
        }
        if self.speed.n < 2 {
            return Err("speed.n must be at least 2".into());
        }
        positive("profile.half_width", self.profile.half_width)?;
        positive("profile.dt", self.profile.dt)?;
        if self.profile.max_iter == 0 {
            return Err("profile.max_iter must be positive".into());
        }
        if let Some(c) = self.profile.c {
            if !c.is_finite() {
                return Err(format!("profile.c must be finite, got {c}"));
            }
        }
        if self.sweep.n_directions == 0 {
            return Err("sweep.n_directions must be positive".into());
        }
        let dim = self.kernels.aplus.dim();
        if self.kernels.aminus.dim() != dim {
            return Err(format!(
                "kernel dimensions differ: aplus is {dim}D, aminus is {}D",
                self.kernels.aminus.dim()
            ));
        }
        let xi = self.kernels.direction();
        if xi.len() != dim {
            return Err(format!("direction has {} components, kernels are {dim}D", xi.len()));
        }
        let norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(format!("direction must be a unit vector, has norm {norm}"));
        }
        Ok(())
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
kappa_plus = 2.0
mortality = 1.0
kappa_local = 1.0
kappa_nonlocal = 0.0

[kernels.aplus]
family = "gaussian"
covariance = [[1.0]]

[kernels.aminus]
family = "gaussian"
covariance = [[0.25]]
"#;

    #[test]
    fn defaults_fill_missing_sections() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.grid, GridConfig::default());
        assert_eq!(cfg.scheme, Scheme::Rk4 { dt: 0.01 });
        assert_eq!(cfg.kernels.direction(), vec![1.0]);
        cfg.validate().unwrap();
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig::from_toml(MINIMAL).unwrap();
        cfg.profile.c = Some(2.5);
        cfg.simulate.level = Some(0.3);
        cfg.scheme = Scheme::Picard { tau_hat: 0.25, substeps: 100, max_iter: 200 };
        cfg.grid.boundary = Boundary::WaveTail { rate: 0.8 };
        cfg.simulate.initial = Initial::Bump { amplitude: 0.5, width: 2.0 };
        cfg.kernels.aminus = KernelSpec::laplace(&[2.0]).unwrap().with_shift(vec![0.5]).unwrap();
        let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.hash(), cfg.hash());
    }

    #[test]
    fn json_round_trip() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        let again = RunConfig::from_json(&serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn parse_errors_carry_a_position() {
        let bad = MINIMAL.replace("mortality = 1.0", "mortality = ");
        let e = RunConfig::from_toml(&bad).unwrap_err();
        assert!(e.starts_with("line 4, column"), "{e}");
        let e = RunConfig::from_json("{\n  \"seed\": x }").unwrap_err();
        assert!(e.starts_with("line 2"), "{e}");
    }

    #[test]
    fn validation_rejects_nonpositive_lambda() {
        let mut cfg = RunConfig::from_toml(MINIMAL).unwrap();
        cfg.speed.lambda_min = 0.0;
        assert!(cfg.validate().unwrap_err().contains("lambda_min"));
        cfg.speed.lambda_min = 0.1;
        cfg.tolerances.residual_tol = -1.0;
        assert!(cfg.validate().is_err());
        cfg.tolerances.residual_tol = 1e-6;
        cfg.kernels.direction = Some(vec![0.5]);
        assert!(cfg.validate().unwrap_err().contains("unit"));
    }
}
