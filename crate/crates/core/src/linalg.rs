//! Dense complex linear algebra helpers shared by the solvers.
//!
//! Everything here works on small dense matrices (doubled-up systems of at
//! most a few modes), so the routines favour directness over asymptotics.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(c)
}

/// Operator 2-norm (largest singular value). Empty matrices have norm 0.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a general complex matrix, read off its complex Schur form.
pub fn eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let (_, t) = schur(m)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

pub fn spectral_abscissa(m: &CMat) -> Result<f64> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

pub fn ensure_hurwitz(m: &CMat) -> Result<()> {
    let max_real = spectral_abscissa(m)?;
    if max_real < 0.0 {
        Ok(())
    } else {
        Err(Error::NotHurwitz { max_real })
    }
}

pub fn smallest_singular_value(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.min()
}

pub fn inverse(m: &CMat, what: &str) -> Result<CMat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("{what} is not invertible")))
}

/// Solves `A X + X A† + Q = 0` through its Kronecker (vectorised) form.
pub fn solve_lyapunov(a: &CMat, q: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if !a.is_square() || q.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "Lyapunov equation needs square A and matching Q, got {:?} and {:?}",
            a.shape(),
            q.shape()
        )));
    }
    let eye = CMat::identity(n, n);
    // column-major vec: vec(A X) = (I ⊗ A) vec X, vec(X A†) = (conj(A) ⊗ I) vec X
    let op = eye.kronecker(a) + a.conjugate().kronecker(&eye);
    let rhs = DVector::from_iterator(n * n, q.iter().map(|z| -z));
    let lu = op.lu();
    let x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("Lyapunov operator is singular".into()))?;
    Ok(CMat::from_column_slice(n, n, x.as_slice()))
}

/// Real representation `[[Re, -Im], [Im, Re]]` of a complex matrix.
pub fn realify(m: &CMat) -> RMat {
    let (r, k) = m.shape();
    let mut out = RMat::zeros(2 * r, 2 * k);
    for i in 0..r {
        for j in 0..k {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(i, j + k)] = -z.im;
            out[(i + r, j)] = z.im;
            out[(i + r, j + k)] = z.re;
        }
    }
    out
}

/// Inverse of [`realify`], averaging the redundant copies.
pub fn complexify(m: &RMat) -> CMat {
    let r = m.nrows() / 2;
    let k = m.ncols() / 2;
    CMat::from_fn(r, k, |i, j| {
        Complex64::new(
            0.5 * (m[(i, j)] + m[(i + r, j + k)]),
            0.5 * (m[(i + r, j)] - m[(i, j + k)]),
        )
    })
}

const SCHUR_SWEEPS_PER_ROW: usize = 40;

/// Complex Schur decomposition `M = Z T Z†` with a bounded iteration count.
///
/// The shifted QR iteration can stall on matrices with special symmetry
/// (the Hamiltonians here have eigenvalues in ± pairs). On a stall the
/// matrix is first rotated by a fixed unitary `V` and the factorization of
/// `V† M V` is mapped back.
pub fn schur(m: &CMat) -> Result<(CMat, CMat)> {
    let n = m.nrows();
    let limit = SCHUR_SWEEPS_PER_ROW * n.max(1);
    if let Some(s) = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, limit) {
        return Ok(s.unpack());
    }
    for attempt in 1..=3 {
        let v = fixed_unitary(n, attempt);
        let rotated = v.adjoint() * m * &v;
        if let Some(s) = nalgebra::Schur::try_new(rotated, f64::EPSILON, limit) {
            let (z, t) = s.unpack();
            return Ok((v * z, t));
        }
    }
    Err(Error::Eigen(format!(
        "{n}x{n} matrix after {limit} iterations"
    )))
}

fn fixed_unitary(n: usize, seed: usize) -> CMat {
    let a = CMat::from_fn(n, n, |i, j| {
        let k = (i * n + j + 1) as f64 * (seed as f64 + 0.5);
        Complex64::new(k.sin(), (1.7 * k).cos())
    });
    a.qr().q()
}

/// Complex Schur decomposition `M = Z T Z†` whose leading `k` diagonal
/// entries of `T` are exactly the eigenvalues accepted by `select`.
///
/// Returns `(Z, T, k)`. Reordering uses adjacent Givens swaps on the
/// triangular factor.
pub fn ordered_schur(m: &CMat, select: impl Fn(Complex64) -> bool) -> Result<(CMat, CMat, usize)> {
    let n = m.nrows();
    let (mut z, mut t) = schur(m)?;
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = ZERO;
        }
    }
    let mut next = 0;
    for i in 0..n {
        if select(t[(i, i)]) {
            for k in (next..i).rev() {
                swap_adjacent(&mut t, &mut z, k);
            }
            next += 1;
        }
    }
    Ok((z, t, next))
}

fn swap_adjacent(t: &mut CMat, z: &mut CMat, k: usize) {
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    let x = t[(k, k + 1)];
    let d = b - a;
    let r = (x.norm_sqr() + d.norm_sqr()).sqrt();
    if r == 0.0 {
        return;
    }
    // first column spans the eigenvector of `b` in the 2x2 block
    let cs = x / r;
    let sn = d / r;
    let q = nalgebra::Matrix2::new(cs, -sn.conj(), sn, cs.conj());
    let qa = q.adjoint();
    let n = t.nrows();
    for j in 0..n {
        let (u, v) = (t[(k, j)], t[(k + 1, j)]);
        t[(k, j)] = qa[(0, 0)] * u + qa[(0, 1)] * v;
        t[(k + 1, j)] = qa[(1, 0)] * u + qa[(1, 1)] * v;
    }
    for i in 0..n {
        let (u, v) = (t[(i, k)], t[(i, k + 1)]);
        t[(i, k)] = u * q[(0, 0)] + v * q[(1, 0)];
        t[(i, k + 1)] = u * q[(0, 1)] + v * q[(1, 1)];
        let (u, v) = (z[(i, k)], z[(i, k + 1)]);
        z[(i, k)] = u * q[(0, 0)] + v * q[(1, 0)];
        z[(i, k + 1)] = u * q[(0, 1)] + v * q[(1, 1)];
    }
    t[(k + 1, k)] = ZERO;
}

/// Block-diagonal assembly of square or rectangular blocks.
pub fn block_diag(blocks: &[&CMat]) -> CMat {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let (mut r, mut k) = (0, 0);
    for b in blocks {
        out.view_mut((r, k), b.shape()).copy_from(*b);
        r += b.nrows();
        k += b.ncols();
    }
    out
}

/// Assembles a matrix from a row-major grid of blocks with consistent shapes.
pub fn block_matrix(grid: &[&[&CMat]]) -> Result<CMat> {
    let row_heights: Vec<usize> = grid.iter().map(|row| row[0].nrows()).collect();
    let col_widths: Vec<usize> = grid[0].iter().map(|b| b.ncols()).collect();
    let mut out = CMat::zeros(row_heights.iter().sum(), col_widths.iter().sum());
    let mut r = 0;
    for (i, row) in grid.iter().enumerate() {
        if row.len() != col_widths.len() {
            return Err(Error::Dimension("ragged block matrix".into()));
        }
        let mut k = 0;
        for (j, b) in row.iter().enumerate() {
            if b.shape() != (row_heights[i], col_widths[j]) {
                return Err(Error::Dimension(format!(
                    "block ({i}, {j}) has shape {:?}, expected {:?}",
                    b.shape(),
                    (row_heights[i], col_widths[j])
                )));
            }
            out.view_mut((r, k), b.shape()).copy_from(*b);
            k += b.ncols();
        }
        r += row_heights[i];
    }
    Ok(out)
}
