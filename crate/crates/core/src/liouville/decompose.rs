use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{max_abs, CMatrix, CVector, OperatorMatrix};
use super::spectral::cluster;
use super::{choi_of, commutator_superop, dissipator, heisenberg_dissipator, lmul_rmul, superadjoint, SuperOperator};
use crate::{Error, Result};

/// Fermion-parity label of an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// `(−1)^N` of the label.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Parity of `m` under conjugation with `parity`, with the size of the
/// component that breaks it.
pub fn parity_of(m: &OperatorMatrix, parity: &OperatorMatrix) -> (Parity, f64) {
    let conj = &(parity * m) * parity;
    let even = conj.max_abs_diff(m);
    let odd = conj.max_abs_diff(&m.scale(Complex64::new(-1.0, 0.0)));
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    if even <= odd {
        (Parity::Even, even / scale)
    } else {
        (Parity::Odd, odd / scale)
    }
}

#[derive(Debug, Clone)]
pub struct KrausTerm {
    pub coefficient: f64,
    pub operator: OperatorMatrix,
    pub parity: Parity,
}

/// `S = Σ_α m_α M_α • M_α†` with orthonormal `M_α`.
#[derive(Debug, Clone)]
pub struct KrausSet {
    pub terms: Vec<KrausTerm>,
}

impl KrausSet {
    pub fn reconstruct(&self, dim: usize) -> SuperOperator {
        let mut acc = SuperOperator::zeros(dim);
        for t in &self.terms {
            let s = lmul_rmul(&t.operator, &t.operator.dagger()).expect("same dimension");
            acc = &acc + &s.scale(Complex64::new(t.coefficient, 0.0));
        }
        acc
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient).sum()
    }

    /// `Σ_α (−1)^{N_α} m_α`.
    pub fn signed_coefficient_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.parity.sign() * t.coefficient).sum()
    }

    /// Largest deviation of `Tr M_α† M_β` from `δ_αβ`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.terms.iter().enumerate() {
            for (j, b) in self.terms.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.operator.hs_inner(&b.operator) - target).norm());
            }
        }
        worst
    }
}

#[derive(Debug, Clone)]
pub struct JumpTerm {
    pub rate: f64,
    pub operator: OperatorMatrix,
    pub parity: Parity,
}

/// Canonical jump expansion `−iG = −i[H,•] + Σ_α j_α D(J_α)`; for the
/// Heisenberg variant `iG^H = i[H,•] + Σ_α j_α D^H(J_α)`.
#[derive(Debug, Clone)]
pub struct JumpSet {
    pub effective_hamiltonian: OperatorMatrix,
    pub terms: Vec<JumpTerm>,
}

impl JumpSet {
    /// The generator `G` whose Schrödinger expansion this set is.
    pub fn generator(&self) -> SuperOperator {
        let i = Complex64::new(0.0, 1.0);
        let mut g = commutator_superop(&self.effective_hamiltonian);
        for t in &self.terms {
            g = &g + &dissipator(&t.operator).scale(i * t.rate);
        }
        g
    }

    /// The generator `G^H` whose Heisenberg expansion this set is.
    pub fn heisenberg_generator(&self) -> SuperOperator {
        let i = Complex64::new(0.0, 1.0);
        let mut g = commutator_superop(&self.effective_hamiltonian);
        for t in &self.terms {
            g = &g + &heisenberg_dissipator(&t.operator).scale(-i * t.rate);
        }
        g
    }

    /// `‖Σ_α j_α[J_α†J_α − (−1)^{N_α} J_α J_α†] − Γ𝟙‖_max`.
    pub fn sum_rule_residual(&self, gamma: f64) -> f64 {
        let dim = self.effective_hamiltonian.dim();
        let mut acc = OperatorMatrix::identity(dim).scale(Complex64::new(-gamma, 0.0));
        for t in &self.terms {
            let jdj = &t.operator.dagger() * &t.operator;
            let jjd = &t.operator * &t.operator.dagger();
            let term = &jdj - &jjd.scale(Complex64::new(t.parity.sign(), 0.0));
            acc = &acc + &term.scale(Complex64::new(t.rate, 0.0));
        }
        acc.max_abs()
    }

    pub fn odd_rate_sum(&self) -> f64 {
        self.terms.iter().filter(|t| t.parity == Parity::Odd).map(|t| t.rate).sum()
    }

    pub fn rate_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.rate).sum()
    }
}

fn bipartite_parity(parity: &OperatorMatrix) -> CMatrix {
    parity.entries().kronecker(&parity.entries().transpose())
}

/// Operator with `|M⟩ = (M ⊗ 𝟙)|𝟙⟩` equal to `v`.
fn operator_from_ket(v: &CVector, dim: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(dim, |i, j| v[i * dim + j])
}

fn ket_from_operator(m: &OperatorMatrix) -> CVector {
    let d = m.dim();
    CVector::from_fn(d * d, |r, _| m.entries()[(r / d, r % d)])
}

/// Rotates each degenerate eigenspace onto definite bipartite parity and
/// rejects nondegenerate eigenvectors that mix parity sectors.
fn parity_resolve(values: &[f64], vectors: &mut [CVector], parity: &OperatorMatrix) -> Result<()> {
    let pb = bipartite_parity(parity);
    let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let groups = cluster(values, |a, b| (a - b).abs() <= 1e-9 * scale);
    for g in groups {
        if g.len() == 1 {
            let v = &vectors[g[0]];
            let pv = &pb * v;
            let expectation = v.dotc(&pv).re;
            let leak = (&pv - v * Complex64::new(expectation.signum(), 0.0)).norm();
            if leak > 1e-8 {
                return Err(Error::ParityMixing { eigenvalue: values[g[0]], leak });
            }
            continue;
        }
        let basis = CMatrix::from_columns(&g.iter().map(|&i| vectors[i].clone()).collect::<Vec<_>>());
        let projected = basis.adjoint() * &pb * &basis;
        let herm = (&projected + projected.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(herm);
        let rotated = &basis * &eig.eigenvectors;
        for (col, &i) in g.iter().enumerate() {
            let mut v = rotated.column(col).into_owned();
            let n = v.norm();
            v /= Complex64::new(n, 0.0);
            vectors[i] = v;
        }
    }
    Ok(())
}

fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, Vec<CVector>) {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();
    (values, vectors)
}

fn check_hermitian_choi(c: &CMatrix) -> Result<()> {
    let deviation = max_abs(&(c - c.adjoint()));
    if deviation > 1e-9 * max_abs(c).max(1.0) {
        return Err(Error::NonHermitianChoi { deviation });
    }
    Ok(())
}

/// Canonical Kraus form from the eigen-decomposition of the Choi operator.
///
/// Terms are sorted by descending coefficient; coefficients that vanish to
/// machine precision are dropped.
pub fn canonical_kraus(s: &SuperOperator, parity: &OperatorMatrix) -> Result<KrausSet> {
    let dim = s.dim();
    if parity.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: parity.dim() });
    }
    let c = choi_of(s);
    check_hermitian_choi(c.entries())?;
    let (values, mut vectors) = hermitian_eigen(c.entries());
    parity_resolve(&values, &mut vectors, parity)?;
    let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let mut terms = Vec::new();
    for (m, v) in values.iter().zip(vectors.iter()) {
        if m.abs() <= 1e-13 * scale {
            continue;
        }
        let operator = operator_from_ket(v, dim).gauge_fixed();
        let (p, _) = parity_of(&operator, parity);
        terms.push(KrausTerm { coefficient: *m, operator, parity: p });
    }
    Ok(KrausSet { terms })
}

/// Orthonormal basis of the complement of `|𝟙⟩` in the bipartite space.
fn complement_of_unit(dim: usize) -> CMatrix {
    let n = dim * dim;
    let unit = ket_from_operator(&OperatorMatrix::identity(dim)) / Complex64::new((dim as f64).sqrt(), 0.0);
    let mut basis: Vec<CVector> = vec![unit];
    for e in 0..n {
        let mut v = CVector::zeros(n);
        v[e] = Complex64::new(1.0, 0.0);
        for b in &basis {
            let p = b.dotc(&v);
            v -= b * p;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / Complex64::new(norm, 0.0));
        }
        if basis.len() == n {
            break;
        }
    }
    CMatrix::from_columns(&basis[1..])
}

/// Canonical GKSL expansion of `−iG`.
///
/// The Hamiltonian is fixed only up to a multiple of the identity; the
/// traceless representative is returned.
pub fn gksl_decompose(g: &SuperOperator, parity: &OperatorMatrix) -> Result<JumpSet> {
    let dim = g.dim();
    if parity.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: parity.dim() });
    }
    let scale = g.max_abs().max(1.0);
    let one = OperatorMatrix::identity(dim);
    let deviation = g.bra_apply(&one).max_abs();
    if deviation > 1e-9 * scale {
        return Err(Error::TraceViolation { deviation });
    }
    let minus_i = Complex64::new(0.0, -1.0);
    let l = g.scale(minus_i);
    let c = choi_of(&l).entries().clone();
    check_hermitian_choi(&c)?;

    let w = complement_of_unit(dim);
    let reduced = w.adjoint() * &c * &w;
    let (values, small) = hermitian_eigen(&reduced);
    let mut vectors: Vec<CVector> = small.iter().map(|u| &w * u).collect();
    parity_resolve(&values, &mut vectors, parity)?;

    let mut terms = Vec::new();
    let mut jump_part = CMatrix::zeros(dim * dim, dim * dim);
    for (j, v) in values.iter().zip(vectors.iter()) {
        if j.abs() <= 1e-12 * scale {
            continue;
        }
        let operator = operator_from_ket(v, dim).gauge_fixed();
        let k = ket_from_operator(&operator);
        jump_part += &k * k.adjoint() * Complex64::new(*j, 0.0);
        let (p, _) = parity_of(&operator, parity);
        terms.push(JumpTerm { rate: *j, operator, parity: p });
    }

    // C − Σ j|J⟩⟨J| = |𝟙⟩⟨B| + |B⟩⟨𝟙|, with the gauge Im Tr B = 0.
    let rest = &c - &jump_part;
    let unit = ket_from_operator(&one);
    let trace_b = unit.dotc(&(&rest * &unit)).re / (2.0 * dim as f64);
    let b_ket = (&rest * &unit - &unit * Complex64::new(trace_b, 0.0)) / Complex64::new(dim as f64, 0.0);
    let b = operator_from_ket(&b_ket, dim);
    let h = (&b - &b.dagger()).scale(Complex64::new(0.0, 0.5));

    let mut re_b_expected = OperatorMatrix::zeros(dim);
    for t in &terms {
        let jdj = &t.operator.dagger() * &t.operator;
        re_b_expected = &re_b_expected + &jdj.scale(Complex64::new(-0.5 * t.rate, 0.0));
    }
    let re_b = (&b + &b.dagger()).scale(Complex64::new(0.5, 0.0));
    let consistency = re_b.max_abs_diff(&re_b_expected);
    let set = JumpSet { effective_hamiltonian: h, terms };
    let residual = set.generator().max_abs_diff(g).max(consistency);
    if residual > 1e-9 * scale {
        return Err(Error::Reconstruction { residual });
    }
    Ok(set)
}

/// Heisenberg GKSL expansion `iG^H = i[H,•] + Σ_α j_α (J_α•J_α† − ½{J_α J_α†, •})`.
pub fn gksl_decompose_heisenberg(gh: &SuperOperator, parity: &OperatorMatrix) -> Result<JumpSet> {
    // (iG^H)‡ = −i[H,•] + Σ j D(J†), a Schrödinger expansion of (G^H)‡.
    let dual = gksl_decompose(&superadjoint(gh), parity)?;
    let terms = dual
        .terms
        .into_iter()
        .map(|t| JumpTerm { rate: t.rate, operator: t.operator.dagger().gauge_fixed(), parity: t.parity })
        .collect();
    let set = JumpSet { effective_hamiltonian: dual.effective_hamiltonian, terms };
    let residual = set.heisenberg_generator().max_abs_diff(gh);
    if residual > 1e-9 * gh.max_abs().max(1.0) {
        return Err(Error::Reconstruction { residual });
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn parity() -> OperatorMatrix {
        OperatorMatrix::diagonal(&[c64(1.0, 0.0), c64(-1.0, 0.0)])
    }

    fn annihilator() -> OperatorMatrix {
        OperatorMatrix::basis(2, 0, 1)
    }

    #[test]
    fn kraus_of_identity() {
        let k = canonical_kraus(&SuperOperator::identity(2), &parity()).unwrap();
        assert_eq!(k.terms.len(), 1);
        assert!((k.terms[0].coefficient - 2.0).abs() < 1e-13);
        let expected = OperatorMatrix::identity(2).scale(c64(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        assert!(k.terms[0].operator.max_abs_diff(&expected) < 1e-13);
        assert_eq!(k.terms[0].parity, Parity::Even);
    }

    #[test]
    fn kraus_reconstructs_parity_covariant_map() {
        let d = annihilator();
        let one = OperatorMatrix::identity(2);
        let s = &(&SuperOperator::identity(2) + &dissipator(&d).scale(c64(0.3, 0.0)))
            + &dissipator(&d.dagger()).scale(c64(0.1, 0.0));
        let s = &s + &commutator_superop(&(&d.dagger() * &d)).scale(c64(0.0, -0.2));
        let k = canonical_kraus(&s, &parity()).unwrap();
        assert!(k.reconstruct(2).max_abs_diff(&s) < 1e-12);
        assert!(k.orthonormality_error() < 1e-12);
        assert!((k.coefficient_sum() - 2.0).abs() < 1e-12);
        for t in &k.terms {
            assert!(parity_of(&t.operator, &parity()).1 < 1e-10);
        }
        let _ = one;
    }

    #[test]
    fn parity_mixing_detected() {
        let x = OperatorMatrix::from_fn(2, |i, j| if i == j { c64(0.0, 0.0) } else { c64(1.0, 0.0) });
        let m = &OperatorMatrix::identity(2) + &x.scale(c64(0.5, 0.0));
        let s = lmul_rmul(&m, &m.dagger()).unwrap();
        assert!(matches!(canonical_kraus(&s, &parity()), Err(Error::ParityMixing { .. })));
    }

    #[test]
    fn hamiltonian_generator_has_no_jumps() {
        let h = OperatorMatrix::diagonal(&[c64(0.5, 0.0), c64(-0.5, 0.0)]);
        let g = commutator_superop(&h);
        let set = gksl_decompose(&g, &parity()).unwrap();
        assert!(set.terms.is_empty());
        assert!(set.effective_hamiltonian.max_abs_diff(&h) < 1e-13);
    }

    #[test]
    fn lindblad_generator_recovered() {
        let d = annihilator();
        let h = OperatorMatrix::diagonal(&[c64(0.25, 0.0), c64(-0.25, 0.0)]);
        let set = JumpSet {
            effective_hamiltonian: h.clone(),
            terms: vec![
                JumpTerm { rate: 0.7, operator: d.clone(), parity: Parity::Odd },
                JumpTerm { rate: 0.2, operator: d.dagger(), parity: Parity::Odd },
            ],
        };
        let g = set.generator();
        let out = gksl_decompose(&g, &parity()).unwrap();
        assert_eq!(out.terms.len(), 2);
        assert!((out.terms[0].rate - 0.7).abs() < 1e-12);
        assert!(out.terms[0].operator.max_abs_diff(&d) < 1e-12);
        assert!(out.effective_hamiltonian.max_abs_diff(&h) < 1e-12);
        assert!((out.sum_rule_residual(0.9)) < 1e-12);
        let heis = JumpSet { effective_hamiltonian: h, terms: set.terms.clone() };
        let back = gksl_decompose_heisenberg(&heis.heisenberg_generator(), &parity()).unwrap();
        assert!((back.rate_sum() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn trace_violation_detected() {
        let g = SuperOperator::identity(2);
        assert!(matches!(gksl_decompose(&g, &parity()), Err(Error::TraceViolation { .. })));
    }
}
