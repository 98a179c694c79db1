//! Commutation matrices and physical realizability of linear quantum systems.
//!
//! Two checks are provided. The general one works on the doubled-up
//! matrices with the signature `J = diag(I_m, -I_m)`:
//!
//! ```text
//! F Θ + Θ F† + G J G† = 0,   G = -Θ H† J,   K = I
//! ```
//!
//! The annihilation-only one works on the "1" blocks alone and also
//! requires `Θ > 0`:
//!
//! ```text
//! F1 Θ + Θ F1† + G1 G1† = 0,   G1 = -Θ H1†,   K1 = I
//! ```
//!
//! `Θ` is always obtained from the Lyapunov equation, so for an
//! unbalanced system the violation shows up in the coupling residual.
//! When a system has fewer outputs than inputs (a plant with a control
//! input), output `i` is paired with input channel `i` and the unpaired
//! input columns are treated as driving an unused output `H̄` defined by
//! `G2 = -Θ H̄†`; they enter the Lyapunov term only.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_hurwitz, hermitian_eigenvalues, hermitian_part, op_norm, solve_lyapunov, CMat,
};
use crate::model::{DoubledMatrix, QuantumSystem};

/// Default residual tolerance (operator 2-norm).
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CommutationMatrix {
    pub theta: CMat,
    pub positive_definite: bool,
}

impl CommutationMatrix {
    fn from_solution(theta: CMat) -> Self {
        let theta = hermitian_part(&theta);
        let positive_definite = hermitian_eigenvalues(&theta)
            .first()
            .is_some_and(|e| *e > 0.0);
        Self {
            theta,
            positive_definite,
        }
    }
}

/// Solves `F Θ + Θ F† + G G† = 0` for the commutation matrix.
pub fn solve_commutation(drift: &CMat, input: &CMat) -> Result<CommutationMatrix> {
    if input.nrows() != drift.nrows() {
        return Err(Error::Dimension(format!(
            "input has {} rows, drift is {}x{}",
            input.nrows(),
            drift.nrows(),
            drift.ncols()
        )));
    }
    ensure_hurwitz(drift)?;
    let theta = solve_lyapunov(drift, &(input * input.adjoint()))?;
    Ok(CommutationMatrix::from_solution(theta))
}

/// Solves `F Θ + Θ F† + G J G† = 0` with `J` the doubled signature matrix
/// matching the columns of `G`.
pub fn solve_commutation_signed(drift: &CMat, input: &CMat) -> Result<CommutationMatrix> {
    if input.nrows() != drift.nrows() || !input.ncols().is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "doubled input of shape {:?} does not fit drift {:?}",
            input.shape(),
            drift.shape()
        )));
    }
    ensure_hurwitz(drift)?;
    let j = signature(input.ncols() / 2);
    let theta = solve_lyapunov(drift, &(input * &j * input.adjoint()))?;
    Ok(CommutationMatrix::from_solution(theta))
}

/// `J = diag(I_m, -I_m)`.
pub fn signature(m: usize) -> CMat {
    CMat::from_fn(2 * m, 2 * m, |i, j| match (i == j, i < m) {
        (true, true) => crate::linalg::ONE,
        (true, false) => -crate::linalg::ONE,
        _ => crate::linalg::ZERO,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    AnnihilationOnly,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizabilityReport {
    pub kind: CheckKind,
    pub realizable: bool,
    pub lyapunov_residual: f64,
    pub coupling_residual: f64,
    pub feedthrough_residual: f64,
    pub theta_positive_definite: bool,
    pub tolerance: f64,
    #[serde(skip)]
    pub theta: CMat,
}

impl RealizabilityReport {
    pub fn max_residual(&self) -> f64 {
        self.lyapunov_residual
            .max(self.coupling_residual)
            .max(self.feedthrough_residual)
    }
}

fn paired_outputs(sys: &QuantumSystem) -> Result<usize> {
    let p = sys.n_outputs();
    if p > sys.n_inputs() {
        return Err(Error::Dimension(format!(
            "system has {p} outputs but only {} inputs",
            sys.n_inputs()
        )));
    }
    Ok(p)
}

fn unit_feedthrough(p: usize, m: usize) -> DoubledMatrix {
    DoubledMatrix::passive(CMat::identity(p, m))
}

/// Realizability test for annihilation-operator-only systems.
pub fn check_annihilation_realizable(sys: &QuantumSystem, tol: f64) -> Result<RealizabilityReport> {
    if !sys.annihilation_only() {
        return Err(Error::Precondition(
            "annihilation-only check applied to a system with non-zero creation-operator blocks"
                .into(),
        ));
    }
    let p = paired_outputs(sys)?;
    let f1 = sys.drift().block1();
    let g1 = sys.input().block1();
    let h1 = sys.output().block1();
    let k1 = sys.feedthrough().block1();

    let comm = solve_commutation(f1, g1)?;
    let theta = &comm.theta;
    let lyapunov = f1 * theta + theta * f1.adjoint() + g1 * g1.adjoint();
    let paired = g1.columns(0, p).into_owned();
    let coupling = paired + theta * h1.adjoint();
    let feedthrough = k1 - CMat::identity(p, sys.n_inputs());

    Ok(finish(
        CheckKind::AnnihilationOnly,
        &lyapunov,
        &coupling,
        &feedthrough,
        comm,
        tol,
        true,
    ))
}

/// Realizability test for general doubled-up systems.
pub fn check_general_realizable(sys: &QuantumSystem, tol: f64) -> Result<RealizabilityReport> {
    let p = paired_outputs(sys)?;
    let f = sys.drift().realized();
    let g = sys.input().realized();
    let h = sys.output().realized();

    let comm = solve_commutation_signed(f, g)?;
    let theta = &comm.theta;
    let j_in = signature(sys.n_inputs());
    let j_out = signature(p);
    let lyapunov = f * theta + theta * f.adjoint() + g * &j_in * g.adjoint();
    let paired = sys.input().select_columns(0..p);
    let coupling = paired.realized() + theta * h.adjoint() * &j_out;
    let feedthrough = sys.feedthrough().realized() - unit_feedthrough(p, sys.n_inputs()).realized();

    Ok(finish(
        CheckKind::General,
        &lyapunov,
        &coupling,
        &feedthrough,
        comm,
        tol,
        false,
    ))
}

fn finish(
    kind: CheckKind,
    lyapunov: &CMat,
    coupling: &CMat,
    feedthrough: &CMat,
    comm: CommutationMatrix,
    tol: f64,
    require_positive: bool,
) -> RealizabilityReport {
    let lyapunov_residual = op_norm(lyapunov);
    let coupling_residual = op_norm(coupling);
    let feedthrough_residual = op_norm(feedthrough);
    let realizable = lyapunov_residual <= tol
        && coupling_residual <= tol
        && feedthrough_residual <= tol
        && (!require_positive || comm.positive_definite);
    RealizabilityReport {
        kind,
        realizable,
        lyapunov_residual,
        coupling_residual,
        feedthrough_residual,
        theta_positive_definite: comm.positive_definite,
        tolerance: tol,
        theta: comm.theta,
    }
}

/// Runs the annihilation-only check when the system qualifies and the
/// general check otherwise.
pub fn check_realizable(sys: &QuantumSystem, tol: f64) -> Result<RealizabilityReport> {
    if sys.annihilation_only() {
        check_annihilation_realizable(sys, tol)
    } else {
        check_general_realizable(sys, tol)
    }
}

/// Doubled commutation matrix `diag(Θ1, conj Θ1)` of an annihilation-only
/// system, as used when lifting the block conditions to doubled form.
pub fn doubled_commutation(theta1: &CMat) -> CMat {
    crate::linalg::block_diag(&[theta1, &theta1.conjugate()])
}

/// Unused-output matrix `H̄` for the unpaired input channels, from
/// `G2 = -Θ H̄†`.
pub fn unused_output(sys: &QuantumSystem, theta1: &CMat) -> Result<CMat> {
    let p = paired_outputs(sys)?;
    let g2 = sys
        .input()
        .block1()
        .columns(p, sys.n_inputs() - p)
        .into_owned();
    let theta_inv = crate::linalg::inverse(theta1, "commutation matrix")?;
    Ok(-(theta_inv * g2).adjoint())
}
