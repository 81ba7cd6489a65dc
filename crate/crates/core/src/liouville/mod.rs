//! Dense Liouville-space algebra.
//!
//! Operators on a `d`-dimensional Hilbert space are vectorized by stacking
//! columns: entry `(i, j)` maps to component `j·d + i`, so that
//! `vec(L·X·R) = (Rᵀ ⊗ L)·vec(X)`. Superoperators are `d²×d²` matrices in
//! that basis and the Hilbert–Schmidt inner product `⟨A|B⟩ = Tr A†B` is the
//! Euclidean inner product of the vectorized operators.

mod choi;
mod decompose;
pub(crate) mod operator;
mod spectral;
mod superop;

pub use choi::{bipartite_swap, choi_duality_transform, choi_of, is_cp, superop_from_choi, ChoiOperator};
pub use decompose::{
    canonical_kraus, gksl_decompose, gksl_decompose_heisenberg, parity_of, JumpSet, JumpTerm, KrausSet, KrausTerm,
    Parity,
};
pub use operator::{devectorize, max_abs, vectorize, CMatrix, CVector, OperatorMatrix, BASIS_CONVENTION};
pub use spectral::{spectral_decompose, DegeneracyGroup, Mode, SpectralDecomposition, DEGENERACY_TOL};
pub use superop::{
    commutator_superop, dissipator, heisenberg_dissipator, is_hermiticity_preserving, is_tp, lmul_rmul, outer,
    superadjoint, SuperOperator,
};
