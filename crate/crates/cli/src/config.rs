//! JSON configuration types.

use std::path::Path;

use num_complex::Complex64;
use qkl::estimation::degree_grid;
use qkl::model::{
    build_feedback_squeezer_controller, build_feedback_squeezer_plant, build_squeezer_controller,
    build_squeezer_plant,
};
use qkl::realizability::DEFAULT_TOL;
use qkl::{QuantumSystem, Scheme, SqueezerParams};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::{CliError, Result};

/// Environment variable overriding the default residual tolerance.
pub const TOLERANCE_ENV: &str = "QKL_TOL";

/// A single-mode squeezer. `C_re`/`C_im` are only read for plants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub gamma: f64,
    pub kappas: Vec<f64>,
    #[serde(default)]
    pub chi_re: f64,
    #[serde(default)]
    pub chi_im: f64,
    #[serde(rename = "C_re", default, skip_serializing_if = "Option::is_none")]
    pub c_re: Option<Vec<f64>>,
    #[serde(rename = "C_im", default, skip_serializing_if = "Option::is_none")]
    pub c_im: Option<Vec<f64>>,
}

impl SystemConfig {
    pub fn new(gamma: f64, kappas: &[f64], chi: f64) -> Self {
        Self {
            gamma,
            kappas: kappas.to_vec(),
            chi_re: chi,
            chi_im: 0.0,
            c_re: None,
            c_im: None,
        }
    }

    pub fn with_estimand(mut self, c_re: &[f64]) -> Self {
        self.c_re = Some(c_re.to_vec());
        self
    }

    pub fn params(&self) -> SqueezerParams {
        SqueezerParams::new(
            self.gamma,
            self.kappas.clone(),
            Complex64::new(self.chi_re, self.chi_im),
        )
    }

    pub fn estimand(&self) -> Result<Vec<Complex64>> {
        let re = self
            .c_re
            .as_ref()
            .ok_or_else(|| CliError::Config("plant needs an estimand row C_re".into()))?;
        let im = self.c_im.clone().unwrap_or_else(|| vec![0.0; re.len()]);
        if im.len() != re.len() {
            return Err(CliError::Config(format!(
                "C_re has {} entries but C_im has {}",
                re.len(),
                im.len()
            )));
        }
        Ok(re
            .iter()
            .zip(&im)
            .map(|(r, i)| Complex64::new(*r, *i))
            .collect())
    }

    /// Plant layout: one channel for a plain squeezer, two (noise, control)
    /// for a feedback-capable plant.
    pub fn build_plant(&self) -> Result<QuantumSystem> {
        let c = self.estimand()?;
        Ok(match self.kappas.len() {
            2 => build_feedback_squeezer_plant(&self.params(), &c)?,
            _ => build_squeezer_plant(&self.params(), &c)?,
        })
    }

    /// Controller layout: one channel without feedback, two with.
    pub fn build_controller(&self) -> Result<QuantumSystem> {
        Ok(match self.kappas.len() {
            2 => build_feedback_squeezer_controller(&self.params())?,
            _ => build_squeezer_controller(&self.params())?,
        })
    }
}

/// Homodyne angle grid in degrees, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start_deg: f64,
    pub end_deg: f64,
    pub count: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            start_deg: 0.0,
            end_deg: 180.0,
            count: 181,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let inside = |d: f64| (0.0..=180.0).contains(&d);
        if !inside(self.start_deg) || !inside(self.end_deg) {
            return Err(CliError::Config(format!(
                "grid bounds {}..{} must lie within [0, 180] degrees",
                self.start_deg, self.end_deg
            )));
        }
        if self.count == 0 {
            return Err(CliError::Config("grid count must be positive".into()));
        }
        if self.start_deg > self.end_deg {
            return Err(CliError::Config("grid start exceeds grid end".into()));
        }
        Ok(())
    }

    /// Angles in radians.
    pub fn angles(&self) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(degree_grid(self.start_deg, self.end_deg, self.count))
    }

    /// Applies command-line overrides field by field.
    pub fn overridden(self, start: Option<f64>, end: Option<f64>, count: Option<usize>) -> Self {
        Self {
            start_deg: start.unwrap_or(self.start_deg),
            end_deg: end.unwrap_or(self.end_deg),
            count: count.unwrap_or(self.count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub plant: SystemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<SystemConfig>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        match (self.scheme, &self.controller) {
            (Scheme::Classical, Some(_)) => {
                return Err(CliError::Config(
                    "classical scheme takes no controller".into(),
                ))
            }
            (s, None) if s != Scheme::Classical => {
                return Err(CliError::Config(format!(
                    "scheme {} needs a controller",
                    s.as_str()
                )))
            }
            _ => {}
        }
        let channels = match self.scheme {
            Scheme::Classical => None,
            Scheme::Coherent => Some(1),
            Scheme::CoherentFeedback => Some(2),
        };
        if let Some(n) = channels {
            for (role, sys) in [
                ("plant", Some(&self.plant)),
                ("controller", self.controller.as_ref()),
            ] {
                let sys = sys.expect("controller presence checked above");
                if sys.kappas.len() != n {
                    return Err(CliError::Config(format!(
                        "{role} needs {n} coupling rate(s) for the {} scheme, got {}",
                        self.scheme.as_str(),
                        sys.kappas.len()
                    )));
                }
            }
        }
        self.grid.validate()
    }

    pub fn label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| self.scheme.as_str().to_string())
    }

    pub fn build(&self) -> Result<Experiment> {
        self.validate()?;
        Ok(Experiment {
            label: self.label(),
            scheme: self.scheme,
            plant: self.plant.build_plant()?,
            controller: self
                .controller
                .as_ref()
                .map(|c| c.build_controller())
                .transpose()?,
            grid: self.grid.angles()?,
        })
    }
}

/// A validated experiment with its systems built.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub label: String,
    pub scheme: Scheme,
    pub plant: QuantumSystem,
    pub controller: Option<QuantumSystem>,
    pub grid: Vec<f64>,
}

impl Experiment {
    pub fn sweep(&self) -> Result<qkl::CostCurve> {
        Ok(qkl::sweep(
            &self.label,
            &self.plant,
            self.controller.as_ref(),
            self.scheme,
            &self.grid,
        )?)
    }
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Tolerance precedence: explicit flag, then `QKL_TOL`, then the library default.
pub fn resolve_tolerance(flag: Option<f64>) -> Result<f64> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOLERANCE_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{TOLERANCE_ENV}={v:?} is not a number")))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if tol <= 0.0 || !tol.is_finite() {
        return Err(CliError::Config(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    Ok(tol)
}
