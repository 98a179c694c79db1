use std::ops::Range;

use nalgebra::RowDVector;
use num_complex::Complex64;

use super::doubled::DoubledMatrix;
use crate::error::{Error, Result};

/// Channel bookkeeping for a system's field ports.
///
/// Input channels are split into `noise` (driven by external vacuum
/// fields) followed by `coupled` (driven by another system: the control
/// input `U` of a feedback plant, or the plant output `Y` for a
/// controller). Output channels are split into `measured` (sent on to
/// homodyne detection or to a downstream controller) and `fed_back`
/// (returned to the plant). Ranges index block columns/rows of the
/// doubled matrices, noise channels first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ports {
    pub noise: Range<usize>,
    pub coupled: Range<usize>,
    pub measured: Range<usize>,
    pub fed_back: Range<usize>,
}

impl Ports {
    /// Plain system: all inputs are noise, all outputs are measured.
    pub fn plain(inputs: usize, outputs: usize) -> Self {
        Self {
            noise: 0..inputs,
            coupled: inputs..inputs,
            measured: 0..outputs,
            fed_back: outputs..outputs,
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.coupled.end
    }

    pub fn n_outputs(&self) -> usize {
        self.fed_back.end
    }
}

/// State-space record of a linear quantum system in doubled-up form:
///
/// ```text
/// d(a; a#)     = F (a; a#) dt + G d(A; A#)
/// d(Aout; Aout#) = H (a; a#) dt + K d(A; A#)
/// z            = C (a; a#)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSystem {
    drift: DoubledMatrix,
    input: DoubledMatrix,
    output: DoubledMatrix,
    feedthrough: DoubledMatrix,
    estimand: Option<RowDVector<Complex64>>,
    ports: Ports,
    annihilation_only: bool,
}

impl QuantumSystem {
    pub fn new(
        drift: DoubledMatrix,
        input: DoubledMatrix,
        output: DoubledMatrix,
        feedthrough: DoubledMatrix,
        estimand: Option<RowDVector<Complex64>>,
        ports: Ports,
    ) -> Result<Self> {
        let n = drift.rows();
        if drift.cols() != n {
            return Err(Error::Dimension("drift must be square".into()));
        }
        if input.rows() != n || output.cols() != n {
            return Err(Error::Dimension(format!(
                "input has {} block rows and output {} block columns; expected {n} modes",
                input.rows(),
                output.cols()
            )));
        }
        if feedthrough.rows() != output.rows() || feedthrough.cols() != input.cols() {
            return Err(Error::Dimension(format!(
                "feedthrough is {}x{} but system has {} outputs and {} inputs",
                feedthrough.rows(),
                feedthrough.cols(),
                output.rows(),
                input.cols()
            )));
        }
        if ports.n_inputs() != input.cols()
            || ports.n_outputs() != output.rows()
            || ports.noise.start != 0
            || ports.noise.end != ports.coupled.start
            || ports.measured.start != 0
            || ports.measured.end != ports.fed_back.start
        {
            return Err(Error::Dimension(format!(
                "port partition {ports:?} does not cover {} inputs / {} outputs",
                input.cols(),
                output.rows()
            )));
        }
        if let Some(c) = &estimand {
            if c.len() != 2 * n {
                return Err(Error::Dimension(format!(
                    "estimand row has {} entries, expected {}",
                    c.len(),
                    2 * n
                )));
            }
        }
        let annihilation_only = drift.has_zero_block2()
            && input.has_zero_block2()
            && output.has_zero_block2()
            && feedthrough.has_zero_block2();
        Ok(Self {
            drift,
            input,
            output,
            feedthrough,
            estimand,
            ports,
            annihilation_only,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.drift.rows()
    }

    pub fn n_inputs(&self) -> usize {
        self.input.cols()
    }

    pub fn n_outputs(&self) -> usize {
        self.output.rows()
    }

    /// `F`.
    pub fn drift(&self) -> &DoubledMatrix {
        &self.drift
    }

    /// `G`, columns ordered by input channel.
    pub fn input(&self) -> &DoubledMatrix {
        &self.input
    }

    /// `H`, rows ordered by output channel.
    pub fn output(&self) -> &DoubledMatrix {
        &self.output
    }

    /// `K`.
    pub fn feedthrough(&self) -> &DoubledMatrix {
        &self.feedthrough
    }

    /// The row `C` selecting the estimated quantity `z = C (a; a#)`.
    pub fn estimand(&self) -> Option<&RowDVector<Complex64>> {
        self.estimand.as_ref()
    }

    pub fn ports(&self) -> &Ports {
        &self.ports
    }

    /// True iff every "2" block of `F`, `G`, `H`, `K` is exactly zero.
    pub fn annihilation_only(&self) -> bool {
        self.annihilation_only
    }

    pub fn with_estimand(mut self, c: RowDVector<Complex64>) -> Result<Self> {
        if c.len() != 2 * self.n_modes() {
            return Err(Error::Dimension(format!(
                "estimand row has {} entries, expected {}",
                c.len(),
                2 * self.n_modes()
            )));
        }
        self.estimand = Some(c);
        Ok(self)
    }
}
