use std::cmp::Ordering;

use nalgebra::Schur;
use num_complex::Complex64;

use super::operator::{devectorize, CMatrix, CVector, OperatorMatrix};
use super::SuperOperator;
use crate::{Error, Result};

/// Relative tolerance under which eigenvalues are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Overlap floor below which a left/right pair signals a defective matrix.
const DEFECTIVE_OVERLAP: f64 = 1e-12;

/// One eigenmode: `S|right⟩ = λ|right⟩`, `⟨left|S = λ⟨left|`.
#[derive(Debug, Clone)]
pub struct Mode {
    pub eigenvalue: Complex64,
    pub right: OperatorMatrix,
    pub left: OperatorMatrix,
}

impl Mode {
    /// Rank-one projector `|right⟩⟨left|`.
    pub fn projector(&self) -> SuperOperator {
        super::outer(&self.right, &self.left)
    }
}

/// A cluster of (numerically) degenerate eigenvalues and its spectral
/// projector.
#[derive(Debug, Clone)]
pub struct DegeneracyGroup {
    pub indices: Vec<usize>,
    pub projector: SuperOperator,
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub modes: Vec<Mode>,
    pub degeneracy_groups: Vec<DegeneracyGroup>,
}

impl SpectralDecomposition {
    /// Sorts externally supplied modes and groups degeneracies.
    pub fn from_modes(mut modes: Vec<Mode>) -> Self {
        modes.sort_by(|a, b| eigen_order(a.eigenvalue, b.eigenvalue));
        let values: Vec<Complex64> = modes.iter().map(|m| m.eigenvalue).collect();
        let dim = modes[0].right.dim();
        let degeneracy_groups = cluster(&values, |a, b| nearly_equal(*a, *b))
            .into_iter()
            .map(|indices| {
                let mut projector = SuperOperator::zeros(dim);
                for &i in &indices {
                    projector = &projector + &modes[i].projector();
                }
                DegeneracyGroup { indices, projector }
            })
            .collect();
        Self { modes, degeneracy_groups }
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.modes.iter().map(|m| m.eigenvalue).collect()
    }

    /// `Σ_i λ_i |right_i⟩⟨left_i|`.
    pub fn reconstruct(&self) -> SuperOperator {
        let dim = self.modes[0].right.dim();
        let mut acc = SuperOperator::zeros(dim);
        for m in &self.modes {
            acc = &acc + &m.projector().scale(m.eigenvalue);
        }
        acc
    }

    /// Largest deviation of `⟨left_i|right_j⟩` from `δ_ij`.
    pub fn binormalization_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.modes.iter().enumerate() {
            for (j, b) in self.modes.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.left.hs_inner(&b.right) - target).norm());
            }
        }
        worst
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.degeneracy_groups.iter().all(|g| g.indices.len() == 1)
    }
}

/// Ordering: descending real part, then ascending imaginary part, with real
/// parts compared up to the degeneracy tolerance.
pub(crate) fn eigen_order(a: Complex64, b: Complex64) -> Ordering {
    let scale = 1.0f64.max(a.norm()).max(b.norm());
    if (a.re - b.re).abs() > DEGENERACY_TOL * scale {
        b.re.total_cmp(&a.re)
    } else {
        a.im.total_cmp(&b.im)
    }
}

pub(crate) fn nearly_equal(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < DEGENERACY_TOL * 1.0f64.max(a.norm()).max(b.norm())
}

/// Clusters indices by pairwise near-equality (transitive closure).
pub(crate) fn cluster<T>(items: &[T], same: impl Fn(&T, &T) -> bool) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if same(&items[i], &items[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Right eigenvectors of an upper-triangular Schur factor by
/// back-substitution.
fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let norm = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let smin = (f64::EPSILON * norm).max(1e-300);
    let mut x = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        x[(k, k)] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for m in j + 1..=k {
                s += t[(j, m)] * x[(m, k)];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < smin {
                denom = Complex64::new(smin, 0.0);
            }
            x[(j, k)] = -s / denom;
        }
    }
    x
}

fn normalize(v: &mut CVector) -> f64 {
    let n = v.norm();
    if n > 0.0 {
        *v /= Complex64::new(n, 0.0);
    }
    n
}

fn gauge(v: &mut CVector) {
    let mut best = Complex64::new(0.0, 0.0);
    let mut best_norm = -1.0;
    for z in v.iter() {
        if z.norm() > best_norm * (1.0 + 1e-12) {
            best = *z;
            best_norm = z.norm();
        }
    }
    if best_norm > 0.0 {
        *v *= best.conj() / best_norm;
    }
}

/// Biorthogonal spectral decomposition of a diagonalizable superoperator.
pub fn spectral_decompose(s: &SuperOperator) -> Result<SpectralDecomposition> {
    let dim = s.dim();
    let n = dim * dim;
    let (q, t) = Schur::new(s.entries().clone()).unpack();
    let eigenvalues: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();
    let y = triangular_eigenvectors(&t);
    let vectors = &q * y;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen_order(eigenvalues[a], eigenvalues[b]));
    let sorted_vals: Vec<Complex64> = order.iter().map(|&k| eigenvalues[k]).collect();
    let mut right: Vec<CVector> = order.iter().map(|&k| vectors.column(k).into_owned()).collect();

    let groups = cluster(&sorted_vals, |a, b| nearly_equal(*a, *b));
    for g in &groups {
        // Orthonormal basis of each eigenspace (Gram–Schmidt in sorted order).
        for (pos, &i) in g.iter().enumerate() {
            let mut v = right[i].clone();
            for &j in &g[..pos] {
                let proj = right[j].dotc(&v);
                v -= &right[j] * proj;
            }
            let norm = normalize(&mut v);
            if norm < 1e-8 * right[i].norm().max(f64::MIN_POSITIVE) {
                return Err(Error::Defective { eigenvalue: sorted_vals[i], overlap: norm });
            }
            gauge(&mut v);
            right[i] = v;
        }
    }

    let r = CMatrix::from_columns(&right);
    let l = r
        .clone()
        .try_inverse()
        .ok_or(Error::Defective { eigenvalue: sorted_vals[0], overlap: 0.0 })?;
    let mut modes = Vec::with_capacity(n);
    for i in 0..n {
        let row = l.row(i);
        let row_norm = row.norm();
        let overlap = if row_norm > 0.0 { 1.0 / row_norm } else { 0.0 };
        if !(overlap >= DEFECTIVE_OVERLAP) {
            return Err(Error::Defective { eigenvalue: sorted_vals[i], overlap });
        }
        let left_vec = CVector::from_iterator(n, row.iter().map(|z| z.conj()));
        modes.push(Mode {
            eigenvalue: sorted_vals[i],
            right: devectorize(&right[i], dim)?,
            left: devectorize(&left_vec, dim)?,
        });
    }
    let degeneracy_groups = groups
        .into_iter()
        .map(|indices| {
            let mut projector = SuperOperator::zeros(dim);
            for &i in &indices {
                projector = &projector + &modes[i].projector();
            }
            DegeneracyGroup { indices, projector }
        })
        .collect();
    Ok(SpectralDecomposition { modes, degeneracy_groups })
}
