use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::operator::{matrix_to_rows, max_abs, rows_to_matrix, vectorize, CMatrix, MatrixJson, OperatorMatrix};
use super::{choi_of, BASIS_CONVENTION};
use crate::{Error, Result};

/// Linear map on vectorized operators (`d²×d²`, column-stacking basis).
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    entries: CMatrix,
    dim: usize,
}

impl SuperOperator {
    pub fn new(entries: CMatrix) -> Result<Self> {
        let n = entries.nrows();
        if n != entries.ncols() {
            return Err(Error::DimensionMismatch { expected: n, got: entries.ncols() });
        }
        let dim = (n as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != n {
            return Err(Error::InvalidInput(format!("superoperator size {n} is not a perfect square")));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("superoperator has non-finite entries".into()));
        }
        Ok(Self { entries, dim })
    }

    pub(crate) fn from_square(entries: CMatrix, dim: usize) -> Self {
        debug_assert_eq!(entries.nrows(), dim * dim);
        Self { entries, dim }
    }

    pub fn identity(dim: usize) -> Self {
        Self { entries: CMatrix::identity(dim * dim, dim * dim), dim }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: CMatrix::zeros(dim * dim, dim * dim), dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn apply(&self, x: &OperatorMatrix) -> OperatorMatrix {
        let v = &self.entries * vectorize(x);
        OperatorMatrix::from_square(CMatrix::from_column_slice(self.dim, self.dim, v.as_slice()))
    }

    /// The operator `B` with `⟨B| = ⟨a|·self`, i.e. `self‡ a`.
    pub fn bra_apply(&self, a: &OperatorMatrix) -> OperatorMatrix {
        superadjoint(self).apply(a)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { entries: &self.entries * c, dim: self.dim }
    }

    pub fn exp(&self) -> Self {
        Self { entries: self.entries.clone().exp(), dim: self.dim }
    }

    pub fn try_inverse(&self) -> Result<Self> {
        self.entries
            .clone()
            .try_inverse()
            .map(|m| Self { entries: m, dim: self.dim })
            .ok_or_else(|| Error::Singular("superoperator is not invertible".into()))
    }

    /// 2-norm condition number.
    pub fn condition_number(&self) -> f64 {
        let sv = self.entries.clone().singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.entries)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs(&(&self.entries - &other.entries))
    }

    /// Hilbert–Schmidt matrix element `⟨a|self|b⟩`.
    pub fn element(&self, a: &OperatorMatrix, b: &OperatorMatrix) -> Complex64 {
        vectorize(a).dotc(&(&self.entries * vectorize(b)))
    }
}

impl Mul for &SuperOperator {
    type Output = SuperOperator;
    fn mul(self, rhs: Self) -> SuperOperator {
        SuperOperator { entries: &self.entries * &rhs.entries, dim: self.dim }
    }
}

impl Add for &SuperOperator {
    type Output = SuperOperator;
    fn add(self, rhs: Self) -> SuperOperator {
        SuperOperator { entries: &self.entries + &rhs.entries, dim: self.dim }
    }
}

impl Sub for &SuperOperator {
    type Output = SuperOperator;
    fn sub(self, rhs: Self) -> SuperOperator {
        SuperOperator { entries: &self.entries - &rhs.entries, dim: self.dim }
    }
}

/// The map `X ↦ L·X·R`.
pub fn lmul_rmul(l: &OperatorMatrix, r: &OperatorMatrix) -> Result<SuperOperator> {
    if l.dim() != r.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), got: r.dim() });
    }
    Ok(SuperOperator { entries: r.entries().transpose().kronecker(l.entries()), dim: l.dim() })
}

/// Adjoint with respect to the Hilbert–Schmidt inner product.
pub fn superadjoint(s: &SuperOperator) -> SuperOperator {
    SuperOperator { entries: s.entries.adjoint(), dim: s.dim }
}

/// Rank-one superoperator `|a⟩⟨b|`.
pub fn outer(a: &OperatorMatrix, b: &OperatorMatrix) -> SuperOperator {
    let m = vectorize(a) * vectorize(b).adjoint();
    SuperOperator { entries: m, dim: a.dim() }
}

/// The map `X ↦ [H, X]`.
pub fn commutator_superop(h: &OperatorMatrix) -> SuperOperator {
    let one = OperatorMatrix::identity(h.dim());
    let left = lmul_rmul(h, &one).expect("same dimension");
    let right = lmul_rmul(&one, h).expect("same dimension");
    &left - &right
}

/// Schrödinger dissipator `X ↦ J X J† − ½{J†J, X}`.
pub fn dissipator(j: &OperatorMatrix) -> SuperOperator {
    let one = OperatorMatrix::identity(j.dim());
    let jd = j.dagger();
    let jdj = &jd * j;
    let jump = lmul_rmul(j, &jd).expect("same dimension");
    let anti = &lmul_rmul(&jdj, &one).expect("same dimension") + &lmul_rmul(&one, &jdj).expect("same dimension");
    &jump - &anti.scale(Complex64::new(0.5, 0.0))
}

/// Unit-preserving (Heisenberg) dissipator `X ↦ J X J† − ½{J J†, X}`.
pub fn heisenberg_dissipator(j: &OperatorMatrix) -> SuperOperator {
    let one = OperatorMatrix::identity(j.dim());
    let jd = j.dagger();
    let jjd = j * &jd;
    let jump = lmul_rmul(j, &jd).expect("same dimension");
    let anti = &lmul_rmul(&jjd, &one).expect("same dimension") + &lmul_rmul(&one, &jjd).expect("same dimension");
    &jump - &anti.scale(Complex64::new(0.5, 0.0))
}

/// Trace preservation: `⟨𝟙|S = ⟨𝟙|` within `tol` (max norm).
pub fn is_tp(s: &SuperOperator, tol: f64) -> bool {
    let one = OperatorMatrix::identity(s.dim());
    s.bra_apply(&one).max_abs_diff(&one) <= tol
}

/// Hermiticity preservation: the Choi operator is Hermitian within `tol`.
pub fn is_hermiticity_preserving(s: &SuperOperator, tol: f64) -> bool {
    let c = choi_of(s);
    max_abs(&(c.entries() - c.entries().adjoint())) <= tol
}

impl Serialize for SuperOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson { dim: self.dim, basis_convention: BASIS_CONVENTION.into(), entries: matrix_to_rows(&self.entries) }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SuperOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        if raw.basis_convention != BASIS_CONVENTION {
            return Err(serde::de::Error::custom(format!("unsupported basis convention {}", raw.basis_convention)));
        }
        let m = rows_to_matrix(&raw.entries).map_err(serde::de::Error::custom)?;
        let s = SuperOperator::new(m).map_err(serde::de::Error::custom)?;
        if s.dim != raw.dim {
            return Err(serde::de::Error::custom("dim does not match entries"));
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn sample(dim: usize, seed: f64) -> OperatorMatrix {
        OperatorMatrix::from_fn(dim, |i, j| {
            let x = seed + 1.3 * i as f64 + 0.7 * j as f64;
            c64(x.sin(), (2.1 * x).cos())
        })
    }

    #[test]
    fn lmul_rmul_acts_as_sandwich() {
        let (l, r, x) = (sample(3, 0.1), sample(3, 0.9), sample(3, 2.0));
        let s = lmul_rmul(&l, &r).unwrap();
        assert!(s.apply(&x).max_abs_diff(&(&(&l * &x) * &r)) < 1e-14);
        let adj = superadjoint(&s);
        assert!(adj.max_abs_diff(&lmul_rmul(&l.dagger(), &r.dagger()).unwrap()) < 1e-14);
    }

    #[test]
    fn identity_superop() {
        let one = OperatorMatrix::identity(2);
        assert_eq!(lmul_rmul(&one, &one).unwrap(), SuperOperator::identity(2));
        assert_eq!(superadjoint(&SuperOperator::identity(2)), SuperOperator::identity(2));
    }

    #[test]
    fn dissipator_of_annihilator() {
        let d = OperatorMatrix::basis(2, 0, 1);
        let out = dissipator(&d).apply(&OperatorMatrix::basis(2, 1, 1));
        let expected = &OperatorMatrix::basis(2, 0, 0) - &OperatorMatrix::basis(2, 1, 1);
        assert!(out.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn commutator_of_hermitian_is_self_adjoint() {
        let a = sample(2, 0.3);
        let h = &a + &a.dagger();
        let c = commutator_superop(&h);
        assert!(superadjoint(&c).max_abs_diff(&c) < 1e-14);
        let l = c.scale(c64(0.0, -1.0));
        assert!(superadjoint(&l).max_abs_diff(&l.scale(c64(-1.0, 0.0))) < 1e-14);
    }

    #[test]
    fn heisenberg_dissipator_is_unital() {
        let j = sample(3, 1.7);
        let one = OperatorMatrix::identity(3);
        assert!(heisenberg_dissipator(&j).apply(&one).max_abs() < 1e-14);
        assert!(is_tp(&(&SuperOperator::identity(3) + &dissipator(&j)), 1e-13));
    }

    #[test]
    fn json_round_trip() {
        let s = lmul_rmul(&sample(2, 0.2), &sample(2, 0.5)).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("column-stacking"));
        let back: SuperOperator = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
