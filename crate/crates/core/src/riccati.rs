//! Steady-state filter Riccati equation with correlated process and
//! measurement noise:
//!
//! ```text
//! Fa P + P Fa† + Ga Ga†
//!   - (Ga Ka† + P Ha†) L† (L Ka Ka† L†)⁻¹ L (Ga Ka† + P Ha†)† = 0
//! ```
//!
//! The stabilizing solution is found by removing the cross term, realifying
//! the resulting cross-term-free equation, taking the stable invariant
//! subspace of its Hamiltonian from an ordered Schur form, and polishing
//! with Newton–Kleinman steps. [`integrate_care_oracle`] integrates the
//! Riccati differential equation as an independent check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    c, complexify, eigenvalues, hermitian_eigenvalues, hermitian_part, inverse, op_norm,
    ordered_schur, realify, smallest_singular_value, solve_lyapunov, spectral_abscissa, to_complex,
    CMat, RMat,
};

/// Required bound on the Riccati residual of a returned solution.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Eigenvalues of the Hamiltonian with real part inside `(-MARGIN, MARGIN)`
/// are treated as lying on the imaginary axis.
const IMAGINARY_AXIS_MARGIN: f64 = 1e-12;

const MAX_POLISH_STEPS: usize = 25;

/// Data of one filtering problem. `projection` is the real homodyne
/// matrix `L = [L1 L2]` acting on the doubled output.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterData {
    pub drift: CMat,
    pub noise_input: CMat,
    pub output: CMat,
    pub feedthrough: CMat,
    pub projection: RMat,
}

impl FilterData {
    pub fn new(
        drift: CMat,
        noise_input: CMat,
        output: CMat,
        feedthrough: CMat,
        projection: RMat,
    ) -> Result<Self> {
        let n = drift.nrows();
        let dims_ok = drift.is_square()
            && noise_input.nrows() == n
            && output.ncols() == n
            && feedthrough.nrows() == output.nrows()
            && feedthrough.ncols() == noise_input.ncols()
            && projection.ncols() == output.nrows();
        if !dims_ok {
            return Err(Error::Dimension(format!(
                "filter data shapes: Fa {:?}, Ga {:?}, Ha {:?}, Ka {:?}, L {:?}",
                drift.shape(),
                noise_input.shape(),
                output.shape(),
                feedthrough.shape(),
                projection.shape()
            )));
        }
        let q = projection.nrows();
        let gram = &projection * projection.transpose();
        let dev = (gram - RMat::identity(q, q)).abs().max();
        if dev > 1e-12 {
            return Err(Error::Configuration(format!(
                "measurement projection rows are not orthonormal (deviation {dev:.3e})"
            )));
        }
        Ok(Self {
            drift,
            noise_input,
            output,
            feedthrough,
            projection,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.drift.nrows()
    }

    fn projection_c(&self) -> CMat {
        to_complex(&self.projection)
    }

    /// `L Ha`.
    pub fn measured_output(&self) -> CMat {
        self.projection_c() * &self.output
    }

    /// `L Ka Ka† L†`.
    pub fn innovation_covariance(&self) -> CMat {
        let l = self.projection_c();
        &l * &self.feedthrough * self.feedthrough.adjoint() * l.adjoint()
    }

    /// PBH test: `[Fa - λI; L Ha]` has full column rank at every eigenvalue
    /// with non-negative real part.
    pub fn is_detectable(&self) -> Result<bool> {
        pbh(&self.drift, &self.measured_output(), true)
    }

    /// PBH test: `[Fa - λI, Ga]` has full row rank at every eigenvalue with
    /// non-negative real part.
    pub fn is_stabilizable(&self) -> Result<bool> {
        pbh(&self.drift, &self.noise_input, false)
    }

    fn weights(&self) -> Result<Weights> {
        let r = self.innovation_covariance();
        let scale = op_norm(&r).max(1.0);
        if smallest_singular_value(&r) <= 1e-12 * scale {
            return Err(Error::Singular(
                "innovation covariance L Ka Ka† L† is singular".into(),
            ));
        }
        let r_inv = hermitian_part(&inverse(&r, "innovation covariance")?);
        let cross = &self.noise_input * self.feedthrough.adjoint() * self.projection_c().adjoint();
        let process = &self.noise_input * self.noise_input.adjoint();
        Ok(Weights {
            r_inv,
            cross,
            process,
            measured: self.measured_output(),
        })
    }
}

fn pbh(a: &CMat, other: &CMat, stack_rows: bool) -> Result<bool> {
    let n = a.nrows();
    for lambda in eigenvalues(a)? {
        if lambda.re < 0.0 {
            continue;
        }
        let shifted = a - CMat::identity(n, n) * lambda;
        let pencil = if stack_rows {
            crate::linalg::block_matrix(&[&[&shifted], &[other]])?
        } else {
            crate::linalg::block_matrix(&[&[&shifted, other]])?
        };
        let pencil = if stack_rows { pencil } else { pencil.adjoint() };
        let scale = op_norm(&pencil).max(1.0);
        if smallest_singular_value(&pencil) <= 1e-10 * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Precomputed products shared by the residual, the solver and the oracle.
struct Weights {
    r_inv: CMat,
    /// `Ga Ka† L†`
    cross: CMat,
    /// `Ga Ga†`
    process: CMat,
    /// `L Ha`
    measured: CMat,
}

impl Weights {
    fn lhs(&self, fd: &FilterData, p: &CMat) -> CMat {
        let corr = &self.cross + p * self.measured.adjoint();
        &fd.drift * p + p * fd.drift.adjoint() + &self.process
            - &corr * &self.r_inv * corr.adjoint()
    }
}

/// Left-hand side of the Riccati equation evaluated at `p`.
pub fn care_lhs(fd: &FilterData, p: &CMat) -> Result<CMat> {
    check_square(fd, p)?;
    Ok(fd.weights()?.lhs(fd, p))
}

/// Operator 2-norm of [`care_lhs`].
pub fn care_residual(fd: &FilterData, p: &CMat) -> Result<f64> {
    Ok(op_norm(&care_lhs(fd, p)?))
}

fn check_square(fd: &FilterData, p: &CMat) -> Result<()> {
    let n = fd.state_dim();
    if p.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "covariance is {:?}, expected {n}x{n}",
            p.shape()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSolution {
    /// Steady-state error covariance.
    pub covariance: CMat,
    pub residual: f64,
    /// Kalman gain `(Ga Ka† + P Ha†) L† (L Ka Ka† L†)⁻¹`.
    pub gain: CMat,
    /// Spectrum of `Fa - gain L Ha`.
    pub closed_loop_spectrum: Vec<Complex64>,
}

impl RiccatiSolution {
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.covariance)
            .first()
            .copied()
            .unwrap_or(0.0)
    }

    pub fn closed_loop_abscissa(&self) -> f64 {
        self.closed_loop_spectrum
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Cross-term-free form `A P + P A† + Q - P B P = 0` with
/// `A = Fa - S R⁻¹ L Ha`, `Q = Ga Ga† - S R⁻¹ S†`, `B = (L Ha)† R⁻¹ L Ha`.
struct Reduced {
    a: CMat,
    q: CMat,
    b: CMat,
}

impl Reduced {
    fn new(fd: &FilterData, w: &Weights) -> Self {
        let s_rinv = &w.cross * &w.r_inv;
        Self {
            a: &fd.drift - &s_rinv * &w.measured,
            q: hermitian_part(&(&w.process - &s_rinv * w.cross.adjoint())),
            b: hermitian_part(&(w.measured.adjoint() * &w.r_inv * &w.measured)),
        }
    }
}

/// Stabilizing Hermitian solution of the filter Riccati equation.
pub fn solve_care(fd: &FilterData) -> Result<RiccatiSolution> {
    let w = fd.weights()?;
    if !fd.is_detectable()? {
        return Err(Error::NoStabilizingSolution(
            "(Fa, L Ha) is not detectable".into(),
        ));
    }
    let reduced = Reduced::new(fd, &w);
    let mut p = subspace_solution(&reduced)?;
    let mut residual = op_norm(&w.lhs(fd, &p));

    // Newton–Kleinman polish on the complex equation
    for _ in 0..MAX_POLISH_STEPS {
        if residual <= 1e-14 {
            break;
        }
        let closed = &reduced.a - &p * &reduced.b;
        if spectral_abscissa(&closed)? >= 0.0 {
            break;
        }
        let rhs = &reduced.q + &p * &reduced.b * &p;
        let next = hermitian_part(&solve_lyapunov(&closed, &rhs)?);
        let next_residual = op_norm(&w.lhs(fd, &next));
        if next_residual >= residual {
            break;
        }
        p = next;
        residual = next_residual;
    }
    if residual > RESIDUAL_TOL {
        return Err(Error::Convergence {
            iterations: MAX_POLISH_STEPS,
            residual,
        });
    }

    let gain = (&w.cross + &p * fd.output.adjoint() * fd.projection_c().adjoint()) * &w.r_inv;
    let closed_loop = &fd.drift - &gain * &w.measured;
    let closed_loop_spectrum = eigenvalues(&closed_loop)?;
    if closed_loop_spectrum.iter().any(|z| z.re >= 0.0) {
        return Err(Error::NoStabilizingSolution(
            "filter closed loop is not asymptotically stable".into(),
        ));
    }
    Ok(RiccatiSolution {
        covariance: p,
        residual,
        gain,
        closed_loop_spectrum,
    })
}

/// Solution read off the stable invariant subspace of the realified
/// Hamiltonian `[[Aᵀ, -B], [-Q, -A]]`.
fn subspace_solution(reduced: &Reduced) -> Result<CMat> {
    let a = realify(&reduced.a);
    let q = realify(&reduced.q);
    let b = realify(&reduced.b);
    let n = a.nrows();

    let mut ham = RMat::zeros(2 * n, 2 * n);
    ham.view_mut((0, 0), (n, n)).copy_from(&a.transpose());
    ham.view_mut((0, n), (n, n)).copy_from(&(-&b));
    ham.view_mut((n, 0), (n, n)).copy_from(&(-&q));
    ham.view_mut((n, n), (n, n)).copy_from(&(-&a));

    let ham = to_complex(&ham);
    if let Some(ev) = eigenvalues(&ham)?
        .iter()
        .find(|z| z.re.abs() <= IMAGINARY_AXIS_MARGIN)
    {
        return Err(Error::NoStabilizingSolution(format!(
            "Hamiltonian eigenvalue {ev} lies on the imaginary axis"
        )));
    }
    let (z, _, stable) = ordered_schur(&ham, |e| e.re < -IMAGINARY_AXIS_MARGIN)?;
    if stable != n {
        return Err(Error::NoStabilizingSolution(format!(
            "Hamiltonian has {stable} stable eigenvalues, expected {n}"
        )));
    }
    let u1 = z.view((0, 0), (n, n)).into_owned();
    let u2 = z.view((n, 0), (n, n)).into_owned();
    if smallest_singular_value(&u1) <= 1e-10 {
        return Err(Error::NoStabilizingSolution(
            "stable invariant subspace is not a graph".into(),
        ));
    }
    // X U1 = U2  <=>  U1ᵀ Xᵀ = U2ᵀ
    let xt = u1
        .transpose()
        .lu()
        .solve(&u2.transpose())
        .ok_or_else(|| Error::Singular("stable subspace basis".into()))?;
    let x = xt.transpose().map(|v| v.re);
    let x = (&x + x.transpose()) * 0.5;
    Ok(hermitian_part(&complexify(&x)))
}

/// Default integration horizon for [`integrate_care_oracle`]: long enough
/// for the slowest drift mode to decay by many e-folds.
pub fn default_oracle_horizon(fd: &FilterData) -> Result<f64> {
    let slowest = eigenvalues(&fd.drift)?
        .iter()
        .map(|z| -z.re)
        .filter(|r| *r > 0.0)
        .fold(f64::INFINITY, f64::min);
    let rate = if slowest.is_finite() { slowest } else { 1.0 };
    Ok((25.0 / rate).clamp(10.0, 200.0))
}

pub const DEFAULT_ORACLE_STEP: f64 = 1e-3;

/// Integrates `dP/dt = Fa P + P Fa† + ... ` (the Riccati left-hand side)
/// with classical fourth-order Runge–Kutta from `P(0) = I` up to `horizon`.
///
/// The start is positive definite so that modes the noise never excites
/// still converge to the stabilizing branch.
pub fn integrate_care_oracle(fd: &FilterData, horizon: f64, step: f64) -> Result<CMat> {
    let n = fd.state_dim();
    integrate_care_from(fd, CMat::identity(n, n), horizon, step)
}

pub fn integrate_care_from(fd: &FilterData, start: CMat, horizon: f64, step: f64) -> Result<CMat> {
    check_square(fd, &start)?;
    if step.is_nan() || step <= 0.0 || horizon.is_nan() || horizon < 0.0 {
        return Err(Error::Parameter(format!(
            "oracle needs positive step and non-negative horizon, got {step} and {horizon}"
        )));
    }
    let w = fd.weights()?;
    let steps = (horizon / step).ceil() as usize;
    let half = c(0.5 * step);
    let full = c(step);
    let sixth = c(step / 6.0);
    let blow_up = 1e8 * (1.0 + op_norm(&start));
    let mut p = start;
    for i in 0..steps {
        let k1 = w.lhs(fd, &p);
        let k2 = w.lhs(fd, &(&p + &k1 * half));
        let k3 = w.lhs(fd, &(&p + &k2 * half));
        let k4 = w.lhs(fd, &(&p + &k3 * full));
        p += (k1 + (k2 + k3) * c(2.0) + k4) * sixth;
        p = hermitian_part(&p);
        let size = p.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !size.is_finite() || size > blow_up {
            return Err(Error::StepSize {
                time: (i + 1) as f64 * step,
                step,
            });
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn scalar(x: f64) -> CMat {
        CMat::from_element(1, 1, c(x))
    }

    fn homodyne(theta: f64) -> RMat {
        RMat::from_row_slice(1, 2, &[theta.cos(), theta.sin()])
    }

    fn cavity(theta: f64) -> FilterData {
        let eye = CMat::identity(2, 2);
        FilterData::new(
            &eye * c(-2.0),
            &eye * c(-2.0),
            &eye * c(2.0),
            eye.clone(),
            homodyne(theta),
        )
        .unwrap()
    }

    #[test]
    fn scalar_real_problem_matches_closed_form() {
        // -2P + 1 - (1 + P)^2 = -P (P + 4); P = 0 is the stabilizing root
        // (closed loop -2), P = -4 gives closed loop +2.
        let fd = FilterData::new(
            scalar(-1.0),
            scalar(1.0),
            scalar(1.0),
            scalar(1.0),
            RMat::identity(1, 1),
        )
        .unwrap();
        let sol = solve_care(&fd).unwrap();
        let oracle = integrate_care_oracle(&fd, 20.0, 1e-3).unwrap();
        assert!(max_abs(&(&sol.covariance - &oracle)) < 1e-8);
        assert!(sol.residual < 1e-12);
        assert!(sol.closed_loop_abscissa() < 0.0);
    }

    #[test]
    fn scalar_problem_without_cross_term() {
        // -2P + 1 - P^2 = 0  =>  P = -1 + sqrt(2)
        let fd = FilterData::new(
            scalar(-1.0),
            CMat::from_row_slice(1, 2, &[c(1.0), c(0.0)]),
            scalar(1.0),
            CMat::from_row_slice(1, 2, &[c(0.0), c(1.0)]),
            RMat::identity(1, 1),
        )
        .unwrap();
        let sol = solve_care(&fd).unwrap();
        assert!((sol.covariance[(0, 0)].re - (2f64.sqrt() - 1.0)).abs() < 1e-13);
        let oracle = integrate_care_oracle(&fd, 20.0, 1e-3).unwrap();
        assert!((oracle[(0, 0)].re - (2f64.sqrt() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn passive_cavity_has_identity_covariance_and_zero_gain() {
        for deg in [0.0, 30.0, 90.0, 150.0, 180.0] {
            let fd = cavity(f64::to_radians(deg));
            let sol = solve_care(&fd).unwrap();
            assert!(
                max_abs(&(&sol.covariance - CMat::identity(2, 2))) < 1e-12,
                "{deg}"
            );
            assert!(max_abs(&sol.gain) < 1e-12);
            assert!(care_residual(&fd, &CMat::identity(2, 2)).unwrap() < 1e-14);
        }
    }

    #[test]
    fn oracle_from_zero_misses_the_stabilizing_branch() {
        let fd = cavity(0.3);
        match integrate_care_from(&fd, CMat::zeros(2, 2), 10.0, 1e-3) {
            Ok(p) => assert!(max_abs(&(&p - CMat::identity(2, 2))) > 0.5),
            Err(e) => assert!(matches!(e, Error::StepSize { .. })),
        }
        let oracle = integrate_care_oracle(&fd, 10.0, 1e-3).unwrap();
        assert!(max_abs(&(&oracle - CMat::identity(2, 2))) < 1e-8);
    }

    #[test]
    fn zero_noise_gives_zero_covariance() {
        let eye = CMat::identity(2, 2);
        let fd = FilterData::new(
            &eye * c(-2.0),
            CMat::zeros(2, 2),
            &eye * c(2.0),
            eye.clone(),
            homodyne(0.4),
        )
        .unwrap();
        assert_eq!(care_residual(&fd, &CMat::zeros(2, 2)).unwrap(), 0.0);
        let sol = solve_care(&fd).unwrap();
        assert!(max_abs(&sol.covariance) < 1e-12);
        let oracle = integrate_care_oracle(&fd, 20.0, 1e-3).unwrap();
        assert!(max_abs(&oracle) < 1e-8);
    }

    #[test]
    fn residual_grows_linearly_under_perturbation() {
        let fd = cavity(0.7);
        let e = CMat::from_row_slice(
            2,
            2,
            &[
                c(1.0),
                Complex64::new(0.3, 0.2),
                Complex64::new(0.3, -0.2),
                c(-0.5),
            ],
        );
        let slope =
            |eps: f64| care_residual(&fd, &(CMat::identity(2, 2) + &e * c(eps))).unwrap() / eps;
        let (s1, s2) = (slope(1e-4), slope(1e-5));
        assert!(s1 > 0.1);
        assert!((s1 - s2).abs() / s2 < 1e-2);
    }

    #[test]
    fn singular_innovation_covariance_rejected() {
        let eye = CMat::identity(2, 2);
        let fd = FilterData::new(
            &eye * c(-2.0),
            eye.clone(),
            eye.clone(),
            CMat::zeros(2, 2),
            homodyne(0.0),
        )
        .unwrap();
        assert!(matches!(solve_care(&fd), Err(Error::Singular(_))));
        assert!(matches!(care_residual(&fd, &eye), Err(Error::Singular(_))));
    }

    #[test]
    fn undetectable_unstable_mode_rejected() {
        let drift = CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        let output = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(1.0)]);
        let fd = FilterData::new(
            drift,
            CMat::identity(2, 2),
            output,
            CMat::identity(2, 2),
            homodyne(0.2),
        )
        .unwrap();
        assert!(!fd.is_detectable().unwrap());
        assert!(matches!(
            solve_care(&fd),
            Err(Error::NoStabilizingSolution(_))
        ));
    }

    #[test]
    fn non_orthonormal_projection_rejected() {
        let eye = CMat::identity(2, 2);
        let bad = RMat::from_row_slice(1, 2, &[1.0, 1.0]);
        assert!(matches!(
            FilterData::new(eye.clone(), eye.clone(), eye.clone(), eye, bad),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn oracle_reports_blow_up() {
        let fd = cavity(0.3);
        let err = integrate_care_from(&fd, CMat::identity(2, 2) * c(1e3), 10.0, 0.5).unwrap_err();
        assert!(matches!(err, Error::StepSize { .. }));
    }

    #[test]
    fn stabilizability_pbh() {
        assert!(cavity(0.0).is_stabilizable().unwrap());
        let drift = CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        let input = CMat::from_row_slice(2, 1, &[c(0.0), c(1.0)]);
        let fd = FilterData::new(
            drift,
            input,
            CMat::identity(2, 2),
            CMat::from_row_slice(2, 1, &[c(1.0), c(0.0)]),
            homodyne(0.0),
        )
        .unwrap();
        assert!(!fd.is_stabilizable().unwrap());
    }
}
