use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tag recorded in serialized superoperators.
pub const BASIS_CONVENTION: &str = "column-stacking";

/// Largest entry modulus of a complex matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Dense complex operator on the system Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: CMatrix,
}

impl OperatorMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), got: entries.ncols() });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("operator has non-finite entries".into()));
        }
        Ok(Self { entries })
    }

    /// Wraps a matrix known to be square; used internally where shapes are
    /// guaranteed by construction.
    pub(crate) fn from_square(entries: CMatrix) -> Self {
        debug_assert_eq!(entries.nrows(), entries.ncols());
        Self { entries }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self { entries: CMatrix::from_fn(dim, dim, f) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { entries: CMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: CMatrix::zeros(dim, dim) }
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        Self { entries: CMatrix::from_diagonal(&CVector::from_column_slice(values)) }
    }

    /// Matrix unit `|i⟩⟨j|`.
    pub fn basis(dim: usize, i: usize, j: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(i, j)] = Complex64::new(1.0, 0.0);
        Self { entries: m }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn dagger(&self) -> Self {
        Self { entries: self.entries.adjoint() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { entries: &self.entries * c }
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Hilbert–Schmidt inner product `Tr(self† · other)`.
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        self.entries.iter().zip(other.entries.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.entries)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs(&(&self.entries - &other.entries))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        max_abs(&(&self.entries - self.entries.adjoint())) <= tol
    }

    /// Anticommutator `{self, other}`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        Self { entries: &self.entries * &other.entries + &other.entries * &self.entries }
    }

    /// Multiplies by the phase that makes the largest-magnitude entry real
    /// and positive. Ties are broken by the first entry in column-major order.
    pub fn gauge_fixed(&self) -> Self {
        let mut best = Complex64::new(0.0, 0.0);
        let mut best_norm = -1.0;
        for z in self.entries.iter() {
            if z.norm() > best_norm * (1.0 + 1e-12) {
                best = *z;
                best_norm = z.norm();
            }
        }
        if best_norm <= 0.0 {
            return self.clone();
        }
        self.scale(best.conj() / best_norm)
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix { entries: &self.entries * &rhs.entries }
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix { entries: &self.entries + &rhs.entries }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix { entries: &self.entries - &rhs.entries }
    }
}

/// Column-stacking vectorization.
pub fn vectorize(x: &OperatorMatrix) -> CVector {
    CVector::from_column_slice(x.entries.as_slice())
}

/// Inverse of [`vectorize`] for a `d²`-component vector.
pub fn devectorize(v: &CVector, dim: usize) -> Result<OperatorMatrix> {
    if v.len() != dim * dim {
        return Err(Error::DimensionMismatch { expected: dim * dim, got: v.len() });
    }
    Ok(OperatorMatrix { entries: CMatrix::from_column_slice(dim, dim, v.as_slice()) })
}

#[derive(Serialize, Deserialize)]
pub(crate) struct MatrixJson {
    pub dim: usize,
    pub basis_convention: String,
    pub entries: Vec<Vec<[f64; 2]>>,
}

pub(crate) fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub(crate) fn rows_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput("matrix rows must form a nonempty square array".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

impl Serialize for OperatorMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson { dim: self.dim(), basis_convention: BASIS_CONVENTION.into(), entries: matrix_to_rows(&self.entries) }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        let m = rows_to_matrix(&raw.entries).map_err(serde::de::Error::custom)?;
        if m.nrows() != raw.dim {
            return Err(serde::de::Error::custom("dim does not match entries"));
        }
        OperatorMatrix::new(m).map_err(serde::de::Error::custom)
    }
}
