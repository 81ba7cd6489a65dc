use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::operator::{max_abs, CMatrix};
use super::SuperOperator;
use crate::{Error, Result};

/// Choi operator `(S ⊗ id)|𝟙⟩⟨𝟙|` with `|𝟙⟩ = Σ_k |k⟩|k⟩`.
///
/// Bipartite index `(i, k)` (system, ancilla) maps to `i·d + k`, so the
/// vector `|M⟩ = (M ⊗ 𝟙)|𝟙⟩` has components `M_ij` at `i·d + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiOperator {
    entries: CMatrix,
    dim: usize,
}

impl ChoiOperator {
    pub fn new(entries: CMatrix, dim: usize) -> Result<Self> {
        if entries.nrows() != dim * dim || entries.ncols() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: entries.nrows() });
        }
        Ok(Self { entries, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs(&(&self.entries - self.entries.adjoint()))
    }

    /// Eigen-decomposition of the Hermitian part, eigenvalues ascending.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, CMatrix) {
        let h = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.hermitian_eigen().0.first().copied().unwrap_or(0.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs(&(&self.entries - &other.entries))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { entries: &self.entries * c, dim: self.dim }
    }

    /// Multiplies from the left by a bipartite operator.
    pub fn left_multiply(&self, m: &CMatrix) -> Self {
        Self { entries: m * &self.entries, dim: self.dim }
    }
}

#[inline]
fn choi_to_super_index(i: usize, k: usize, j: usize, l: usize, d: usize) -> (usize, usize) {
    // choi[(i,k),(j,l)] = S(|k⟩⟨l|)_{ij}
    (j * d + i, l * d + k)
}

pub fn choi_of(s: &SuperOperator) -> ChoiOperator {
    let d = s.dim();
    let n = d * d;
    let se = s.entries();
    let mut c = CMatrix::zeros(n, n);
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                for l in 0..d {
                    let (r, col) = choi_to_super_index(i, k, j, l, d);
                    c[(i * d + k, j * d + l)] = se[(r, col)];
                }
            }
        }
    }
    ChoiOperator { entries: c, dim: d }
}

pub fn superop_from_choi(c: &ChoiOperator) -> SuperOperator {
    let d = c.dim;
    let n = d * d;
    let mut s = CMatrix::zeros(n, n);
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                for l in 0..d {
                    let (r, col) = choi_to_super_index(i, k, j, l, d);
                    s[(r, col)] = c.entries[(i * d + k, j * d + l)];
                }
            }
        }
    }
    SuperOperator::from_square(s, d)
}

/// Bipartite swap `𝕊|i⟩|k⟩ = |k⟩|i⟩`.
pub fn bipartite_swap(dim: usize) -> CMatrix {
    let n = dim * dim;
    let mut m = CMatrix::zeros(n, n);
    for i in 0..dim {
        for k in 0..dim {
            m[(k * dim + i, i * dim + k)] = Complex64::new(1.0, 0.0);
        }
    }
    m
}

/// `C ↦ 𝕊 C* 𝕊`, the Choi image of the superadjoint of a
/// Hermiticity-preserving map.
pub fn choi_duality_transform(c: &ChoiOperator) -> ChoiOperator {
    let sw = bipartite_swap(c.dim);
    ChoiOperator { entries: &sw * c.entries.map(|z| z.conj()) * &sw, dim: c.dim }
}

/// Complete positivity within `tol`; returns the minimal Choi eigenvalue as
/// witness.
pub fn is_cp(s: &SuperOperator, tol: f64) -> (bool, f64) {
    let min = choi_of(s).min_eigenvalue();
    (min >= -tol, min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::liouville::{lmul_rmul, superadjoint, OperatorMatrix};

    fn sample(dim: usize, seed: f64) -> OperatorMatrix {
        OperatorMatrix::from_fn(dim, |i, j| {
            let x = seed + 1.1 * i as f64 + 0.3 * j as f64;
            c64((3.0 * x).sin(), x.cos())
        })
    }

    fn ket(m: &OperatorMatrix) -> nalgebra::DVector<Complex64> {
        let d = m.dim();
        nalgebra::DVector::from_fn(d * d, |r, _| m.entries()[(r / d, r % d)])
    }

    #[test]
    fn identity_gives_maximally_entangled_projector() {
        let c = choi_of(&SuperOperator::identity(2));
        let one = ket(&OperatorMatrix::identity(2));
        assert!(max_abs(&(c.entries() - &one * one.adjoint())) < 1e-15);
        let (vals, _) = c.hermitian_eigen();
        assert!((vals[3] - 2.0).abs() < 1e-14 && vals[0].abs() < 1e-14);
        assert!(is_cp(&SuperOperator::identity(2), 1e-9).0);
    }

    #[test]
    fn rank_one_kraus_term() {
        let m = sample(2, 0.4);
        let c = choi_of(&lmul_rmul(&m, &m.dagger()).unwrap());
        let k = ket(&m);
        assert!(max_abs(&(c.entries() - &k * k.adjoint())) < 1e-14);
    }

    #[test]
    fn round_trip() {
        let s = SuperOperator::new(CMatrix::from_fn(9, 9, |i, j| c64((i as f64).sin() + j as f64, (i * j) as f64)))
            .unwrap();
        assert!(superop_from_choi(&choi_of(&s)).max_abs_diff(&s) < 1e-13);
    }

    #[test]
    fn duality_transform_is_choi_of_superadjoint() {
        let m = sample(2, 1.9);
        let s = lmul_rmul(&m, &m.dagger()).unwrap();
        let lhs = choi_duality_transform(&choi_of(&s));
        let rhs = choi_of(&superadjoint(&s));
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
        let rhs2 = choi_of(&lmul_rmul(&m.dagger(), &m).unwrap());
        assert!(lhs.max_abs_diff(&rhs2) < 1e-14);
        let one = choi_of(&SuperOperator::identity(2));
        assert!(choi_duality_transform(&one).max_abs_diff(&one) < 1e-15);
    }
}
