use crate::error::{Error, Result};
use crate::numerics::eigen::min_hermitian_eigenvalue;
use crate::numerics::matrix::{self, CMatrix, CVector};
use crate::scalar::{abs, cr, Real};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalue floor tolerated for positivity.
pub const POSITIVITY_FLOOR: f64 = -1e-8;

/// Hermitian, unit-trace, positive (up to [`POSITIVITY_FLOOR`]) matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        matrix::ensure_square(&matrix, "density matrix")?;
        matrix::ensure_finite(&matrix, "density matrix")?;
        let herm = matrix::hermiticity_violation(&matrix);
        if herm > T::lit(HERMITIAN_TOL) {
            return Err(Error::Invariant(format!(
                "density matrix not Hermitian (violation {herm:e})"
            )));
        }
        let tr = matrix.trace();
        if abs(tr - cr(T::one())) > T::lit(TRACE_TOL) {
            return Err(Error::Invariant(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let floor = min_hermitian_eigenvalue(&matrix)?;
        if floor < T::lit(POSITIVITY_FLOOR) {
            return Err(Error::Invariant(format!(
                "density matrix has negative eigenvalue {floor:e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// `|ψ⟩⟨ψ|` for `ψ` normalized on the fly.
    pub fn pure(psi: &CVector<T>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > T::zero()) {
            return Err(Error::InvalidArgument("pure state from zero vector".into()));
        }
        let v = psi / cr(norm);
        Self::new(&v * v.adjoint())
    }

    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {k} out of range for dim {dim}"
            )));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = cr(T::one());
        Ok(Self { matrix: m })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = T::one() / T::from_usize(dim).unwrap();
        Self {
            matrix: CMatrix::identity(dim, dim) * cr(w),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn purity(&self) -> T {
        matrix::purity(&self.matrix)
    }
}
