use std::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, CMat, ZERO};

/// Absolute tolerance used by structural predicates on entry magnitudes.
pub const STRUCTURE_TOL: f64 = 1e-10;

/// A `2n × 2m` complex matrix of the block-conjugate form
///
/// ```text
/// [ A1      A2     ]
/// [ conj A2 conj A1 ]
/// ```
///
/// acting on doubled-up vectors `(a; a#)`. Both the `n × m` generating
/// blocks and the assembled matrix are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubledMatrix {
    block1: CMat,
    block2: CMat,
    realized: CMat,
}

impl DoubledMatrix {
    pub fn new(block1: CMat, block2: CMat) -> Result<Self> {
        if block1.shape() != block2.shape() {
            return Err(Error::Dimension(format!(
                "doubled blocks differ in shape: {:?} vs {:?}",
                block1.shape(),
                block2.shape()
            )));
        }
        let (n, m) = block1.shape();
        let mut realized = CMat::zeros(2 * n, 2 * m);
        realized.view_mut((0, 0), (n, m)).copy_from(&block1);
        realized.view_mut((0, m), (n, m)).copy_from(&block2);
        realized
            .view_mut((n, 0), (n, m))
            .copy_from(&block2.conjugate());
        realized
            .view_mut((n, m), (n, m))
            .copy_from(&block1.conjugate());
        Ok(Self {
            block1,
            block2,
            realized,
        })
    }

    /// Passive (annihilation-only) matrix with a zero "2" block.
    pub fn passive(block1: CMat) -> Self {
        let block2 = CMat::zeros(block1.nrows(), block1.ncols());
        Self::new(block1, block2).expect("blocks share a shape")
    }

    pub fn scalar(b1: Complex64, b2: Complex64) -> Self {
        Self::new(CMat::from_element(1, 1, b1), CMat::from_element(1, 1, b2)).expect("1x1 blocks")
    }

    pub fn identity(n: usize) -> Self {
        Self::passive(CMat::identity(n, n))
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self::passive(CMat::zeros(n, m))
    }

    /// Recovers the generating blocks from an assembled matrix, rejecting
    /// matrices whose lower half is not the conjugate of the upper half.
    pub fn from_realized(m: &CMat, tol: f64) -> Result<Self> {
        if !m.nrows().is_multiple_of(2) || !m.ncols().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "doubled matrix must have even dimensions, got {:?}",
                m.shape()
            )));
        }
        let (n, k) = (m.nrows() / 2, m.ncols() / 2);
        let out = Self::new(
            m.view((0, 0), (n, k)).into_owned(),
            m.view((0, k), (n, k)).into_owned(),
        )?;
        if max_abs(&(out.realized() - m)) > tol {
            return Err(Error::Dimension(
                "matrix does not have the block-conjugate doubled structure".into(),
            ));
        }
        Ok(out)
    }

    pub fn block1(&self) -> &CMat {
        &self.block1
    }

    pub fn block2(&self) -> &CMat {
        &self.block2
    }

    pub fn realized(&self) -> &CMat {
        &self.realized
    }

    /// Number of block rows `n` (the realized matrix has `2n`).
    pub fn rows(&self) -> usize {
        self.block1.nrows()
    }

    /// Number of block columns `m` (the realized matrix has `2m`).
    pub fn cols(&self) -> usize {
        self.block1.ncols()
    }

    pub fn has_zero_block2(&self) -> bool {
        self.block2.iter().all(|z| *z == ZERO)
    }

    pub fn is_passive(&self, tol: f64) -> bool {
        max_abs(&self.block2) <= tol
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.block1.adjoint(), self.block2.transpose()).expect("shapes agree")
    }

    pub fn scale(&self, factor: f64) -> Self {
        let f = Complex64::new(factor, 0.0);
        Self::new(&self.block1 * f, &self.block2 * f).expect("shapes agree")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.block1.shape() != other.block1.shape() {
            return Err(Error::Dimension(format!(
                "cannot add doubled matrices of block shapes {:?} and {:?}",
                self.block1.shape(),
                other.block1.shape()
            )));
        }
        Self::new(&self.block1 + &other.block1, &self.block2 + &other.block2)
    }

    /// Product computed on the blocks:
    /// `Δ(A1, A2) Δ(B1, B2) = Δ(A1 B1 + A2 conj B2, A1 B2 + A2 conj B1)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::Dimension(format!(
                "cannot multiply doubled matrices with block shapes {:?} and {:?}",
                self.block1.shape(),
                other.block1.shape()
            )));
        }
        let b1 = &self.block1 * &other.block1 + &self.block2 * other.block2.conjugate();
        let b2 = &self.block1 * &other.block2 + &self.block2 * other.block1.conjugate();
        Self::new(b1, b2)
    }

    /// Sub-matrix restricted to block rows `rows` and block columns `cols`.
    /// The result is again doubled, so a channel range picks both the
    /// channel and its adjoint out of the realized matrix.
    pub fn select(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        let shape = (rows.len(), cols.len());
        Self::new(
            self.block1
                .view((rows.start, cols.start), shape)
                .into_owned(),
            self.block2
                .view((rows.start, cols.start), shape)
                .into_owned(),
        )
        .expect("shapes agree")
    }

    pub fn select_columns(&self, cols: Range<usize>) -> Self {
        self.select(0..self.rows(), cols)
    }

    pub fn select_rows(&self, rows: Range<usize>) -> Self {
        self.select(rows, 0..self.cols())
    }

    /// Horizontal concatenation on the blocks: `Δ([A1 B1], [A2 B2])`.
    pub fn hstack(parts: &[&Self]) -> Result<Self> {
        let n = parts.first().map_or(0, |p| p.rows());
        if parts.iter().any(|p| p.rows() != n) {
            return Err(Error::Dimension(
                "hstack of doubled matrices with different row counts".into(),
            ));
        }
        let m: usize = parts.iter().map(|p| p.cols()).sum();
        let mut b1 = CMat::zeros(n, m);
        let mut b2 = CMat::zeros(n, m);
        let mut at = 0;
        for p in parts {
            b1.view_mut((0, at), p.block1.shape()).copy_from(&p.block1);
            b2.view_mut((0, at), p.block2.shape()).copy_from(&p.block2);
            at += p.cols();
        }
        Self::new(b1, b2)
    }
}

/// Permutation exchanging the two halves of each doubled group.
///
/// `groups` lists the number of modes of consecutive doubled sub-vectors,
/// e.g. `[1, 1]` for a plant mode followed by a controller mode
/// (state ordering `a, a#, a_c, a_c#`).
pub fn conjugation_swap(groups: &[usize]) -> CMat {
    let dim: usize = groups.iter().map(|g| 2 * g).sum();
    let mut p = CMat::zeros(dim, dim);
    let mut offset = 0;
    for &g in groups {
        for i in 0..g {
            p[(offset + i, offset + g + i)] = Complex64::new(1.0, 0.0);
            p[(offset + g + i, offset + i)] = Complex64::new(1.0, 0.0);
        }
        offset += 2 * g;
    }
    p
}

/// Largest entry of `P_r conj(M) P_c - M`; zero for doubled matrices.
pub fn conjugation_asymmetry(m: &CMat, row_groups: &[usize], col_groups: &[usize]) -> f64 {
    let pr = conjugation_swap(row_groups);
    let pc = conjugation_swap(col_groups);
    max_abs(&(pr * m.conjugate() * pc - m))
}
