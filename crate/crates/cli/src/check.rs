//! Physical-realizability reports for configured systems.

use std::fmt;

use qkl::realizability::CheckKind;
use qkl::{check_realizable, RealizabilityReport};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SystemConfig};
use crate::Result;

/// A check request: a full experiment (plant and controller are both
/// checked) or a bare system.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum CheckInput {
    Experiment(ExperimentConfig),
    System(SystemConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Plant,
    Controller,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemCheck {
    pub role: Role,
    pub parameters: SystemConfig,
    /// `gamma` equals the summed coupling rates.
    pub decay_balance: bool,
    pub report: RealizabilityReport,
}

/// Checks every system in `input`; a bare system is built in `role`'s port
/// layout.
pub fn check_system(input: &CheckInput, role: Role, tol: f64) -> Result<Vec<SystemCheck>> {
    let systems: Vec<(Role, &SystemConfig)> = match input {
        CheckInput::Experiment(exp) => std::iter::once((Role::Plant, &exp.plant))
            .chain(exp.controller.as_ref().map(|c| (Role::Controller, c)))
            .collect(),
        CheckInput::System(s) => vec![(role, s)],
    };
    systems
        .into_iter()
        .map(|(role, params)| {
            let sys = match role {
                Role::Plant if params.c_re.is_some() => params.build_plant()?,
                // the estimand does not enter realizability
                Role::Plant => params.clone().with_estimand(&[0.0, 0.0]).build_plant()?,
                Role::Controller => params.build_controller()?,
            };
            Ok(SystemCheck {
                role,
                parameters: params.clone(),
                decay_balance: params.params().satisfies_decay_balance(tol),
                report: check_realizable(&sys, tol)?,
            })
        })
        .collect()
}

impl fmt::Display for SystemCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.parameters;
        let r = &self.report;
        let role = match self.role {
            Role::Plant => "plant",
            Role::Controller => "controller",
        };
        let verdict = if r.realizable {
            "realizable"
        } else {
            "NOT realizable"
        };
        writeln!(
            f,
            "{role} (gamma = {}, kappas = {:?}, chi = {}{:+}i): {verdict}",
            p.gamma, p.kappas, p.chi_re, p.chi_im
        )?;
        let kind = match r.kind {
            CheckKind::AnnihilationOnly => "annihilation-only conditions",
            CheckKind::General => "general doubled-up conditions",
        };
        writeln!(
            f,
            "  checked:              {kind} (tolerance {:e})",
            r.tolerance
        )?;
        writeln!(f, "  lyapunov residual:    {:.3e}", r.lyapunov_residual)?;
        writeln!(f, "  coupling residual:    {:.3e}", r.coupling_residual)?;
        writeln!(f, "  feedthrough residual: {:.3e}", r.feedthrough_residual)?;
        writeln!(
            f,
            "  commutation matrix positive definite: {}",
            r.theta_positive_definite
        )?;
        write!(f, "  gamma = sum of kappas: {}", self.decay_balance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(gamma: f64, kappas: &[f64], role: Role) -> SystemCheck {
        let input = CheckInput::System(SystemConfig::new(gamma, kappas, 0.0));
        check_system(&input, role, 1e-9).unwrap().remove(0)
    }

    #[test]
    fn balanced_cavity_realizable() {
        assert!(one(4.0, &[4.0], Role::Plant).report.realizable);
    }

    #[test]
    fn unbalanced_cavity_not_realizable() {
        let c = one(4.0, &[3.0], Role::Plant);
        assert!(!c.report.realizable);
        assert!(c.report.max_residual() > 0.0);
        assert!(!c.decay_balance);
    }

    #[test]
    fn two_channel_cavity_realizable() {
        assert!(one(4.0, &[2.0, 2.0], Role::Plant).report.realizable);
        assert!(one(4.0, &[2.0, 2.0], Role::Controller).report.realizable);
    }

    #[test]
    fn experiment_checks_both_systems() {
        let input: CheckInput = serde_json::from_str(
            r#"{"scheme": "coherent",
                "plant": {"gamma": 4, "kappas": [4], "chi_re": 1, "C_re": [0.2, -0.2]},
                "controller": {"gamma": 16, "kappas": [16], "chi_re": 4}}"#,
        )
        .unwrap();
        let checks = check_system(&input, Role::Plant, 1e-9).unwrap();
        assert_eq!(checks.len(), 2);
        assert!(checks.iter().all(|c| c.report.realizable));
        assert_eq!(checks[1].role, Role::Controller);
        let text = checks[0].to_string();
        assert!(text.contains("plant") && text.contains("realizable"));
    }

    #[test]
    fn bare_system_json() {
        let input: CheckInput = serde_json::from_str(r#"{"gamma": 4, "kappas": [3]}"#).unwrap();
        assert!(matches!(input, CheckInput::System(_)));
    }
}
