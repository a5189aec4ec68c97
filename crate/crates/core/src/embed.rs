//! Pure-state embedding of density matrices and the effective Hamiltonian.
//!
//! `ρ` becomes the vector `|Ψ_ρ⟩ = Σ ρ_mn |m⟩|n⟩` with flat index `m·N + n`, so system
//! operators act as `O ⊗ I` and ancilla operators as `I ⊗ O^A`. The master equation then
//! reads `i ∂|Ψ⟩/∂t = H_T |Ψ⟩` with
//!
//! `H_T = 𝓗 ⊗ I − I ⊗ 𝓗^A + i Σ_k L_k ⊗ L_k^A`,  `𝓗 = H − (i/2) Σ_k L_k†L_k`,
//!
//! where the lift `O^A` is the entrywise conjugate of `O` in the fixed basis.

use crate::error::{Error, Result};
use crate::model::{liouvillian_apply, DensityMatrix, LindbladModel};
use crate::numerics::eigen::hermitian_eigen;
use crate::numerics::matrix::{self, CMatrix, CVector};
use crate::scalar::{cr, Cx, Real};

/// Row-major vectorized density matrix on system ⊗ ancilla.
#[derive(Debug, Clone, PartialEq)]
pub struct PureEmbedding<T: Real> {
    dim: usize,
    vector: CVector<T>,
}

impl<T: Real> PureEmbedding<T> {
    pub fn from_vector(vector: CVector<T>) -> Result<Self> {
        let dim = matrix::perfect_square_root(vector.len()).ok_or_else(|| {
            Error::Shape(format!(
                "embedding length {} is not a perfect square",
                vector.len()
            ))
        })?;
        Ok(Self { dim, vector })
    }

    /// System dimension `N` (the vector has `N²` components).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self) -> &CVector<T> {
        &self.vector
    }

    pub fn into_vector(self) -> CVector<T> {
        self.vector
    }

    /// `⟨Ψ|Ψ⟩`, equal to `Tr ρ²` for the represented state.
    pub fn norm_squared(&self) -> T {
        self.vector.norm_squared()
    }
}

pub fn embed_density<T: Real>(rho: &DensityMatrix<T>) -> PureEmbedding<T> {
    embed_matrix(rho.matrix())
}

/// Embedding of an arbitrary square matrix (no state checks).
pub fn embed_matrix<T: Real>(m: &CMatrix<T>) -> PureEmbedding<T> {
    PureEmbedding {
        dim: m.nrows(),
        vector: matrix::vec_row_major(m),
    }
}

/// `ρ_mn` read back from component `(m, n)`; Hermiticity is not enforced.
pub fn extract_density<T: Real>(psi: &PureEmbedding<T>) -> CMatrix<T> {
    let n = psi.dim;
    CMatrix::from_fn(n, n, |i, j| psi.vector[i * n + j])
}

/// Ancilla lift `O^A_mn = conj(O_mn)`.
pub fn ancilla_lift<T: Real>(o: &CMatrix<T>) -> CMatrix<T> {
    matrix::conj(o)
}

/// `H_T(t)` together with the time and system dimension it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian<T: Real> {
    pub matrix: CMatrix<T>,
    pub time: T,
    pub system_dim: usize,
}

pub fn build_effective_hamiltonian<T: Real>(
    model: &LindbladModel<T>,
    t: T,
) -> Result<EffectiveHamiltonian<T>> {
    build_effective_hamiltonian_with_coupling(model, t, T::one())
}

/// [`build_effective_hamiltonian`] with the `i Σ L ⊗ L^A` term scaled by `sign`; used by the
/// self-test to check that a corrupted generator is caught.
#[doc(hidden)]
pub fn build_effective_hamiltonian_with_coupling<T: Real>(
    model: &LindbladModel<T>,
    t: T,
    sign: T,
) -> Result<EffectiveHamiltonian<T>> {
    let n = model.dim();
    let (calh, jumps) = model.effective_parts(t)?;
    let id = CMatrix::<T>::identity(n, n);
    let mut ht = matrix::kron(&calh, &id) - matrix::kron(&id, &ancilla_lift(&calh));
    let coupling = Cx::new(T::zero(), sign);
    for l in &jumps {
        ht += matrix::kron(l, &ancilla_lift(l)) * coupling;
    }
    Ok(EffectiveHamiltonian {
        matrix: ht,
        time: t,
        system_dim: n,
    })
}

/// Exact `∂H_T/∂t` by the product rule, or `None` when a schedule lacks an analytic derivative.
pub fn effective_hamiltonian_derivative<T: Real>(
    model: &LindbladModel<T>,
    t: T,
) -> Result<Option<CMatrix<T>>> {
    let Some((h_dot, l_dot)) = model.derivative_parts(t)? else {
        return Ok(None);
    };
    let n = model.dim();
    let jumps = model.jump_ops_at(t)?;
    let half_i = Cx::new(T::zero(), T::lit(0.5));
    let mut calh_dot = h_dot;
    for (l, d) in jumps.iter().zip(&l_dot) {
        calh_dot -= (d.adjoint() * l + l.adjoint() * d) * half_i;
    }
    let id = CMatrix::<T>::identity(n, n);
    let mut out = matrix::kron(&calh_dot, &id) - matrix::kron(&id, &ancilla_lift(&calh_dot));
    let i = Cx::new(T::zero(), T::one());
    for (l, d) in jumps.iter().zip(&l_dot) {
        out += (matrix::kron(d, &ancilla_lift(l)) + matrix::kron(l, &ancilla_lift(d))) * i;
    }
    Ok(Some(out))
}

/// `S` with `S·vec(ρ) = vec(𝓛ρ)`, assembled column by column from the matrix units.
pub fn build_liouvillian_superoperator<T: Real>(
    model: &LindbladModel<T>,
    t: T,
) -> Result<CMatrix<T>> {
    let n = model.dim();
    let mut s = CMatrix::zeros(n * n, n * n);
    let mut unit = CMatrix::<T>::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            unit[(a, b)] = cr(T::one());
            let col = matrix::vec_row_major(&liouvillian_apply(model, t, &unit)?);
            s.set_column(a * n + b, &col);
            unit[(a, b)] = cr(T::zero());
        }
    }
    Ok(s)
}

/// Eigenbasis of `H(t_start)` as columns, ascending in energy, each phased so its
/// largest component is real and positive.
pub fn fixed_basis<T: Real>(model: &LindbladModel<T>) -> Result<CMatrix<T>> {
    let h = model.hamiltonian_at(model.t_domain().0)?;
    Ok(hermitian_eigen(&h)?.1)
}

/// The model rewritten in [`fixed_basis`] coordinates.
pub fn to_fixed_basis<T: Real>(model: &LindbladModel<T>) -> Result<LindbladModel<T>> {
    model.in_basis(&fixed_basis(model)?)
}
