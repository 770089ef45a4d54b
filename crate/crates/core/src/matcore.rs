//! Dense complex linear algebra: square matrices, Kronecker products,
//! Hermitian eigendecomposition and functions of Hermitian matrices.
//!
//! Everything is double-precision complex. Matrix dimensions are capped at
//! [`DEFAULT_DIMENSION_CAP`] (twelve qubits) unless a caller passes its own cap.

use std::ops::{Add, Deref, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVector = DVector<C64>;

/// Largest Hilbert-space dimension handled by default (2^12).
pub const DEFAULT_DIMENSION_CAP: usize = 1 << 12;

/// Max elementwise |A - A^dagger| accepted as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn new(inner: DMatrix<C64>) -> Result<Self> {
        let (rows, cols) = inner.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        if inner.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(inner))
    }

    /// Wraps a matrix produced by arithmetic on already validated matrices.
    pub(crate) fn from_raw(inner: DMatrix<C64>) -> Self {
        debug_assert!(inner.is_square());
        Self(inner)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    /// Builds from row-major complex entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::NotSquare { rows: dim, cols: bad.len() });
        }
        Self::new(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO }))
    }

    /// |v><v| for a (not necessarily normalized) vector.
    pub fn outer(v: &CVector) -> Self {
        Self(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff on mismatched dimensions");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max elementwise |A - A^dagger|.
    pub fn hermiticity_residue(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// (A + A^dagger) / 2
    pub fn symmetrized(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let max_asymmetry = self.hermiticity_residue();
        if max_asymmetry > HERMITICITY_TOL {
            return Err(Error::NotHermitian { max_asymmetry });
        }
        Ok(())
    }

    /// Real part of <v|A|v>.
    pub fn expectation(&self, v: &CVector) -> f64 {
        v.dotc(&(&self.0 * v)).re
    }

    /// Tr(A B) without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.0 * v
    }

    /// V^dagger A V for a unitary (or isometry) V.
    pub fn change_basis(&self, basis: &DMatrix<C64>) -> DMatrix<C64> {
        basis.adjoint() * (&self.0 * basis)
    }
}

impl Deref for ComplexMatrix {
    type Target = DMatrix<C64>;

    fn deref(&self) -> &DMatrix<C64> {
        &self.0
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Kronecker product with the default dimension cap.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_capped(a, b, DEFAULT_DIMENSION_CAP)
}

/// Kronecker product; `a`'s indices are the major ones.
pub fn kron_capped(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    let dim = a
        .dim()
        .checked_mul(b.dim())
        .ok_or(Error::DimensionCap { dim: usize::MAX, cap })?;
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    Ok(ComplexMatrix(a.0.kronecker(&b.0)))
}

/// Kronecker product of state vectors (no cap; callers size-check states).
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<C64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k).into_owned()
    }

    /// V diag(f(lambda)) V^dagger
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= w);
        }
        ComplexMatrix(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_eigenvalues(|l| C64::new(l, 0.0))
    }
}

/// Hermitian eigendecomposition. Inputs within [`HERMITICITY_TOL`] of Hermitian are
/// symmetrized first; anything further off is rejected.
pub fn eigh(a: &ComplexMatrix) -> Result<SpectralDecomposition> {
    a.check_hermitian()?;
    let sym = a.symmetrized();
    let n = sym.dim();
    let eig = SymmetricEigen::new(sym.0);
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep decomposition order
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(Error::Numerical("eigensolver produced non-finite eigenvalues".into()));
    }
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

/// e^{i t A} for Hermitian A.
pub fn herm_exp(a: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    if t == 0.0 {
        a.check_hermitian()?;
        return Ok(ComplexMatrix::identity(a.dim()));
    }
    let spec = eigh(a)?;
    Ok(spec.map_eigenvalues(|l| C64::from_polar(1.0, t * l)))
}

/// Pauli matrix for axis index 0 (x), 1 (y) or 2 (z).
pub(crate) fn pauli(axis: usize) -> ComplexMatrix {
    let m = match axis {
        0 => [[ZERO, ONE], [ONE, ZERO]],
        1 => [[ZERO, -I], [I, ZERO]],
        2 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => unreachable!("axis index {axis}"),
    };
    ComplexMatrix::from_fn(2, |i, j| m[i][j])
}
