//! Dense complex linear algebra for bipartite operators.
//!
//! Bipartite index convention: row/column index `i * d + j`, where `i` labels
//! the first (system 1, "output") factor and `j` the second (ancilla) factor.
//! Every partial operation below derives from that single convention.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix, stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::ShapeMismatch {
                expected: (r, c),
                found: (r, bad.len()),
            });
        }
        Self::from_vec(r, c, rows.concat())
    }

    /// Real-valued convenience constructor, mostly for fixtures.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// `|u><v|`
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    fn ensure_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.shape(),
                found: other.shape(),
            })
        }
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Sum of the diagonal; non-square matrices use the leading diagonal.
    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `(A + A†) / 2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.dagger()) <= tol
    }

    /// Matrix product. Zero entries of the left operand are skipped, and a
    /// sparse right operand is walked through its nonzero pattern, so products
    /// with permutation-like operators (SWAP, χ₀ᵀ¹) cost O(n²).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                expected: (self.cols, other.cols),
                found: other.shape(),
            });
        }
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * p];
        let nnz = other.data.iter().filter(|z| **z != ZERO).count();
        if nnz * 4 < other.data.len() {
            let pattern: Vec<Vec<(usize, C64)>> = (0..m)
                .map(|k| {
                    other
                        .row(k)
                        .iter()
                        .enumerate()
                        .filter(|(_, z)| **z != ZERO)
                        .map(|(j, z)| (j, *z))
                        .collect()
                })
                .collect();
            for i in 0..n {
                let dst = &mut out[i * p..(i + 1) * p];
                for (k, a) in self.row(i).iter().enumerate() {
                    if *a == ZERO {
                        continue;
                    }
                    for &(j, b) in &pattern[k] {
                        dst[j] += a * b;
                    }
                }
            }
        } else {
            for i in 0..n {
                let dst = &mut out[i * p..(i + 1) * p];
                for (k, a) in self.row(i).iter().enumerate() {
                    if *a == ZERO {
                        continue;
                    }
                    for (d, b) in dst.iter_mut().zip(other.row(k)) {
                        *d += a * b;
                    }
                }
            }
        }
        Ok(Self {
            rows: n,
            cols: p,
            data: out,
        })
    }

    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch {
                expected: (self.cols, 1),
                found: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `<u|A|v>`
    pub fn sandwich(&self, u: &[C64], v: &[C64]) -> Result<C64> {
        let av = self.matvec(v)?;
        Ok(inner(u, &av))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.ensure_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.ensure_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    pub(crate) fn add_scaled_in_place(&mut self, other: &Self, s: C64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on inner-dimension mismatch; use [`ComplexMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

/// `<u|v>`, conjugating the left argument.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// One of the two tensor factors of a bipartite operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

impl Subsystem {
    /// Maps the 1-based labels used in formulas (`tr₁`, `T₂`, ...) to a factor.
    pub fn from_index(index: usize) -> Result<Self> {
        match index {
            1 => Ok(Self::First),
            2 => Ok(Self::Second),
            other => Err(Error::InvalidSubsystem(other)),
        }
    }
}

/// A `d²×d²` operator on `H ⊗ H`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteOperator {
    local_dim: usize,
    matrix: ComplexMatrix,
}

impl BipartiteOperator {
    pub fn new(local_dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        let side = local_dim * local_dim;
        if matrix.shape() != (side, side) {
            return Err(Error::ShapeMismatch {
                expected: (side, side),
                found: matrix.shape(),
            });
        }
        Ok(Self { local_dim, matrix })
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Entry `[(i, j), (k, l)]` in the product basis.
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        let d = self.local_dim;
        self.matrix[(i * d + j, k * d + l)]
    }

    pub fn partial_trace(&self, subsystem: Subsystem) -> ComplexMatrix {
        partial_trace(self, subsystem)
    }

    pub fn partial_transpose(&self, subsystem: Subsystem) -> BipartiteOperator {
        partial_transpose(self, subsystem)
    }

    /// Product of two operators on the same bipartite space.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.local_dim != other.local_dim {
            return Err(Error::DimensionMismatch {
                left: self.local_dim,
                right: other.local_dim,
            });
        }
        Ok(Self {
            local_dim: self.local_dim,
            matrix: self.matrix.matmul(&other.matrix)?,
        })
    }

    pub fn dagger(&self) -> Self {
        Self {
            local_dim: self.local_dim,
            matrix: self.matrix.dagger(),
        }
    }
}

pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    ComplexMatrix::from_fn(ar * br, ac * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Hilbert-Schmidt inner product `tr(A†B)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    a.ensure_same_shape(b)?;
    Ok(inner(&a.data, &b.data))
}

/// `tr(AB)` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.cols != b.rows || a.rows != b.cols {
        return Err(Error::ShapeMismatch {
            expected: (a.cols, a.rows),
            found: b.shape(),
        });
    }
    let mut acc = ZERO;
    for i in 0..a.rows {
        for (k, x) in a.row(i).iter().enumerate() {
            acc += x * b[(k, i)];
        }
    }
    Ok(acc)
}

/// Traces out `subsystem`, returning the reduced `d×d` operator on the other factor.
pub fn partial_trace(a: &BipartiteOperator, subsystem: Subsystem) -> ComplexMatrix {
    let d = a.local_dim;
    match subsystem {
        Subsystem::First => {
            ComplexMatrix::from_fn(d, d, |j, l| (0..d).map(|i| a.get(i, j, i, l)).sum())
        }
        Subsystem::Second => {
            ComplexMatrix::from_fn(d, d, |i, k| (0..d).map(|j| a.get(i, j, k, j)).sum())
        }
    }
}

/// Transposes the chosen tensor factor only.
pub fn partial_transpose(a: &BipartiteOperator, subsystem: Subsystem) -> BipartiteOperator {
    let d = a.local_dim;
    let n = d * d;
    let matrix = ComplexMatrix::from_fn(n, n, |r, c| {
        let (i, j, k, l) = (r / d, r % d, c / d, c % d);
        match subsystem {
            Subsystem::First => a.get(k, j, i, l),
            Subsystem::Second => a.get(i, l, k, j),
        }
    });
    BipartiteOperator {
        local_dim: d,
        matrix,
    }
}

/// SWAP: `|l>⊗|m> → |m>⊗|l>`.
pub fn swap_operator(d: usize) -> Result<BipartiteOperator> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let n = d * d;
    let mut matrix = ComplexMatrix::zeros(n, n);
    for l in 0..d {
        for m in 0..d {
            matrix[(m * d + l, l * d + m)] = ONE;
        }
    }
    Ok(BipartiteOperator {
        local_dim: d,
        matrix,
    })
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Sorted in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.rows)
            .map(|i| self.vectors[(i, k)])
            .collect()
    }
}

/// Diagonalizes `(A + A†)/2`.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = a.ensure_square()?;
    let sym = a.hermitian_part();
    let eig = SymmetricEigen::new(sym.to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdVerdict {
    pub is_psd: bool,
    pub min_eig: f64,
}

pub const DEFAULT_PSD_TOL: f64 = 1e-9;

/// PSD test on the Hermitian part, with threshold `-tol * max(1, ‖A‖_F)`.
pub fn is_psd(a: &ComplexMatrix, tol: f64) -> Result<PsdVerdict> {
    let eig = eig_hermitian(a)?;
    let min_eig = eig.values.last().copied().unwrap_or(0.0);
    let threshold = -tol * a.frobenius_norm().max(1.0);
    Ok(PsdVerdict {
        is_psd: min_eig >= threshold,
        min_eig,
    })
}
