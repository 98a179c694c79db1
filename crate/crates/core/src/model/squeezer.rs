//! Builders for the single-mode dynamic squeezer and its passive-cavity
//! special case, in the port layouts used by the three estimation schemes.

use nalgebra::RowDVector;
use num_complex::Complex64;

use super::doubled::DoubledMatrix;
use super::system::{Ports, QuantumSystem};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat};

/// Parameters of a linearized dynamic optical squeezer
///
/// ```text
/// da = -(gamma/2) a dt - chi a* dt - sum_i sqrt(kappa_i) dA_i
/// ```
///
/// `chi = 0` gives a passive optical cavity.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezerParams {
    pub gamma: f64,
    pub kappas: Vec<f64>,
    pub chi: Complex64,
}

impl SqueezerParams {
    pub fn new(gamma: f64, kappas: Vec<f64>, chi: Complex64) -> Self {
        Self { gamma, kappas, chi }
    }

    pub fn real(gamma: f64, kappas: &[f64], chi: f64) -> Self {
        Self::new(gamma, kappas.to_vec(), c(chi))
    }

    pub fn total_coupling(&self) -> f64 {
        self.kappas.iter().sum()
    }

    /// `gamma` equals the summed coupling rates within `tol`.
    pub fn satisfies_decay_balance(&self, tol: f64) -> bool {
        (self.gamma - self.total_coupling()).abs() <= tol
    }

    pub fn is_passive(&self) -> bool {
        self.chi == Complex64::new(0.0, 0.0)
    }

    fn validate(&self, expected_channels: usize) -> Result<()> {
        if self.kappas.len() != expected_channels {
            return Err(Error::Parameter(format!(
                "expected {expected_channels} coupling rate(s), got {}",
                self.kappas.len()
            )));
        }
        if let Some(k) = self.kappas.iter().find(|k| **k <= 0.0 || !k.is_finite()) {
            return Err(Error::Parameter(format!(
                "coupling rate {k} must be positive"
            )));
        }
        if !self.gamma.is_finite() || !self.chi.re.is_finite() || !self.chi.im.is_finite() {
            return Err(Error::Parameter("gamma and chi must be finite".into()));
        }
        Ok(())
    }

    fn drift(&self) -> DoubledMatrix {
        DoubledMatrix::scalar(c(-self.gamma / 2.0), -self.chi)
    }

    fn input_row(&self) -> DoubledMatrix {
        let row = CMat::from_iterator(
            1,
            self.kappas.len(),
            self.kappas.iter().map(|k| c(-k.sqrt())),
        );
        DoubledMatrix::passive(row)
    }

    /// Reads the parameters back out of a built single-mode squeezer.
    pub fn from_system(sys: &QuantumSystem) -> Result<Self> {
        if sys.n_modes() != 1 {
            return Err(Error::Dimension(
                "squeezer systems have exactly one mode".into(),
            ));
        }
        let f = sys.drift();
        let gamma = -2.0 * f.block1()[(0, 0)].re;
        let chi = -f.block2()[(0, 0)];
        let kappas = sys.input().block1().iter().map(|g| g.norm_sqr()).collect();
        Ok(Self { gamma, kappas, chi })
    }
}

fn estimand_row(c_row: &[Complex64]) -> Result<RowDVector<Complex64>> {
    if c_row.len() != 2 {
        return Err(Error::Dimension(format!(
            "single-mode estimand needs 2 entries, got {}",
            c_row.len()
        )));
    }
    Ok(RowDVector::from_row_slice(c_row))
}

/// Single-input squeezer plant: `G = -sqrt(kappa) I`, `H = sqrt(kappa) I`, `K = I`.
pub fn build_squeezer_plant(p: &SqueezerParams, c_row: &[Complex64]) -> Result<QuantumSystem> {
    p.validate(1)?;
    let root = p.kappas[0].sqrt();
    QuantumSystem::new(
        p.drift(),
        p.input_row(),
        DoubledMatrix::scalar(c(root), c(0.0)),
        DoubledMatrix::identity(1),
        Some(estimand_row(c_row)?),
        Ports::plain(1, 1),
    )
}

/// Squeezer plant with a noise input `A` (rate `kappas[0]`) and a control
/// input `U` (rate `kappas[1]`). Only the `A` channel's output `Y` is
/// exposed, so `K = [I 0]`.
pub fn build_feedback_squeezer_plant(
    p: &SqueezerParams,
    c_row: &[Complex64],
) -> Result<QuantumSystem> {
    p.validate(2)?;
    let feedthrough = DoubledMatrix::passive(CMat::from_row_slice(1, 2, &[c(1.0), c(0.0)]));
    QuantumSystem::new(
        p.drift(),
        p.input_row(),
        DoubledMatrix::scalar(c(p.kappas[0].sqrt()), c(0.0)),
        feedthrough,
        Some(estimand_row(c_row)?),
        Ports {
            noise: 0..1,
            coupled: 1..2,
            measured: 0..1,
            fed_back: 1..1,
        },
    )
}

/// Squeezer used as a coherent controller without feedback: its single
/// input is the plant output `Y`, its output `Y~` goes to the detector.
pub fn build_squeezer_controller(p: &SqueezerParams) -> Result<QuantumSystem> {
    p.validate(1)?;
    let root = p.kappas[0].sqrt();
    QuantumSystem::new(
        p.drift(),
        p.input_row(),
        DoubledMatrix::scalar(c(root), c(0.0)),
        DoubledMatrix::identity(1),
        None,
        Ports {
            noise: 0..0,
            coupled: 0..1,
            measured: 0..1,
            fed_back: 1..1,
        },
    )
}

/// Two-port squeezer controller for coherent feedback. Inputs are
/// `[A~ | Y]`, outputs `[Y~ | U]`; `kappas[0]` couples `A~`/`Y~` and
/// `kappas[1]` couples `Y`/`U`, with identity feedthrough.
pub fn build_feedback_squeezer_controller(p: &SqueezerParams) -> Result<QuantumSystem> {
    p.validate(2)?;
    let output = CMat::from_row_slice(2, 1, &[c(p.kappas[0].sqrt()), c(p.kappas[1].sqrt())]);
    QuantumSystem::new(
        p.drift(),
        p.input_row(),
        DoubledMatrix::passive(output),
        DoubledMatrix::identity(2),
        None,
        Ports {
            noise: 0..1,
            coupled: 1..2,
            measured: 0..1,
            fed_back: 1..2,
        },
    )
}
