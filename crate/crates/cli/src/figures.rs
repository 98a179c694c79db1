//! Built-in parameter sets for the published cost-versus-angle figures.

use std::fmt;
use std::str::FromStr;

use qkl::{CostCurve, Scheme};

use crate::config::{ExperimentConfig, GridSpec, SystemConfig};
use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum FigureId {
    Fig3,
    Fig4,
    Fig5,
    /// Passive plant and passive controller with coherent feedback.
    Thm4,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Thm4,
        FigureId::Fig6,
        FigureId::Fig7,
        FigureId::Fig8,
        FigureId::Fig9,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Thm4 => "thm4",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
        }
    }

    /// `(plant chi, controller chi)`; gamma and kappa are fixed per scheme.
    fn squeezing(self) -> (f64, f64) {
        match self {
            FigureId::Fig3 => (0.0, 2.0),
            FigureId::Fig4 => (0.5, 0.0),
            FigureId::Fig5 => (1.0, 4.0),
            FigureId::Thm4 => (0.0, 0.0),
            FigureId::Fig6 => (0.5, 0.0),
            FigureId::Fig7 => (0.0, -0.5),
            FigureId::Fig8 => (1.0, -0.5),
            FigureId::Fig9 => (0.5, 0.5),
        }
    }

    pub fn is_feedback(self) -> bool {
        !matches!(self, FigureId::Fig3 | FigureId::Fig4 | FigureId::Fig5)
    }

    pub fn config(self) -> ExperimentConfig {
        let (chi, chi_c) = self.squeezing();
        let (scheme, plant, controller) = if self.is_feedback() {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            (
                Scheme::CoherentFeedback,
                SystemConfig::new(4.0, &[2.0, 2.0], chi).with_estimand(&[s, -s]),
                SystemConfig::new(16.0, &[8.0, 8.0], chi_c),
            )
        } else {
            (
                Scheme::Coherent,
                SystemConfig::new(4.0, &[4.0], chi).with_estimand(&[0.2, -0.2]),
                SystemConfig::new(16.0, &[16.0], chi_c),
            )
        };
        ExperimentConfig {
            scheme,
            plant,
            controller: Some(controller),
            grid: GridSpec::default(),
            output_path: None,
            label: Some(self.as_str().to_string()),
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| CliError::Config(format!("unknown figure {s:?}")))
    }
}

/// The figure configurations followed by a lone passive cavity under
/// purely-classical estimation.
pub fn reference_configurations() -> Vec<ExperimentConfig> {
    let mut all: Vec<_> = FigureId::ALL.iter().map(|id| id.config()).collect();
    all.push(ExperimentConfig {
        scheme: Scheme::Classical,
        plant: SystemConfig::new(4.0, &[4.0], 0.0).with_estimand(&[0.2, -0.2]),
        controller: None,
        grid: GridSpec::default(),
        output_path: None,
        label: Some("cavity".into()),
    });
    all
}

/// Sweeps a figure's configuration over `grid` (the 181-point default if `None`).
pub fn run_figure(id: FigureId, grid: Option<GridSpec>) -> Result<CostCurve> {
    let mut cfg = id.config();
    if let Some(g) = grid {
        cfg.grid = g;
    }
    cfg.build()?.sweep()
}
