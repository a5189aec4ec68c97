//! Dense complex matrix helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{abs, Cx, Real};

pub type CMatrix<T> = DMatrix<Cx<T>>;
pub type CVector<T> = DVector<Cx<T>>;

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::identity(n, n)
}

pub fn zeros<T: Real>(rows: usize, cols: usize) -> CMatrix<T> {
    CMatrix::zeros(rows, cols)
}

/// Builds a matrix from row-major entries.
pub fn from_rows<T: Real>(rows: usize, cols: usize, entries: &[Cx<T>]) -> Result<CMatrix<T>> {
    if rows == 0 || cols == 0 || entries.len() != rows * cols {
        return Err(Error::dim("from_rows", rows * cols, entries.len()));
    }
    Ok(CMatrix::from_row_slice(rows, cols, entries))
}

pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

/// Elementwise complex conjugate (no transpose).
pub fn conj<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    a.map(|z| z.conj())
}

pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

pub fn anticommutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b + b * a
}

pub fn max_abs<T: Real>(a: &CMatrix<T>) -> T {
    a.iter().fold(T::zero(), |acc, z| acc.max(abs(*z)))
}

pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc.max(abs(x - y)))
}

/// max |A_ij − conj(A_ji)|.
pub fn hermiticity_violation<T: Real>(a: &CMatrix<T>) -> T {
    let (r, c) = a.shape();
    if r != c {
        return T::INFINITY;
    }
    let mut worst = T::zero();
    for i in 0..r {
        for j in i..c {
            worst = worst.max(abs(a[(i, j)] - a[(j, i)].conj()));
        }
    }
    worst
}

pub fn is_hermitian<T: Real>(a: &CMatrix<T>, tol: T) -> bool {
    hermiticity_violation(a) <= tol
}

pub fn is_finite<T: Real>(a: &CMatrix<T>) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite<T: Real>(a: &CMatrix<T>, context: &str) -> Result<()> {
    if is_finite(a) {
        Ok(())
    } else {
        Err(Error::NonFinite(context.to_string()))
    }
}

pub fn ensure_square<T: Real>(a: &CMatrix<T>, context: &str) -> Result<usize> {
    let (r, c) = a.shape();
    if r != c || r == 0 {
        return Err(Error::dim(context, "square matrix", format!("{r}x{c}")));
    }
    Ok(r)
}

/// Row-major flattening: entry (m, n) lands at index m·N + n.
pub fn vec_row_major<T: Real>(m: &CMatrix<T>) -> CVector<T> {
    let (r, c) = m.shape();
    CVector::from_iterator(r * c, (0..r).flat_map(|i| (0..c).map(move |j| m[(i, j)])))
}

/// Inverse of [`vec_row_major`] for square matrices.
pub fn unvec_row_major<T: Real>(v: &CVector<T>) -> Result<CMatrix<T>> {
    let n = perfect_square_root(v.len()).ok_or_else(|| {
        Error::Shape(format!("vector length {} is not a perfect square", v.len()))
    })?;
    Ok(CMatrix::from_fn(n, n, |i, j| v[i * n + j]))
}

pub fn perfect_square_root(len: usize) -> Option<usize> {
    if len == 0 {
        return None;
    }
    let r = (len as f64).sqrt().round() as usize;
    (r * r == len).then_some(r)
}

/// ⟨a|b⟩ with `a` a ket (conjugated).
pub fn inner<T: Real>(a: &CVector<T>, b: &CVector<T>) -> Cx<T> {
    a.dotc(b)
}

/// Bilinear pairing `row · col` without conjugation (left eigenvectors are stored as rows).
pub fn pair<T: Real>(row: &CVector<T>, col: &CVector<T>) -> Cx<T> {
    row.dot(col)
}

pub fn real_trace<T: Real>(a: &CMatrix<T>) -> T {
    a.trace().re
}

/// Tr(ρ²) as a real number.
pub fn purity<T: Real>(rho: &CMatrix<T>) -> T {
    (rho * rho).trace().re
}

pub fn pauli_x<T: Real>() -> CMatrix<T> {
    let (o, l) = (Cx::zero(), Cx::one());
    CMatrix::from_row_slice(2, 2, &[o, l, l, o])
}

/// σ_y in the ordered basis {|g⟩, |e⟩}: ⟨g|σ_y|e⟩ = i.
pub fn pauli_y_ge<T: Real>() -> CMatrix<T> {
    let o = Cx::zero();
    let i = Cx::i();
    CMatrix::from_row_slice(2, 2, &[o, i, -i, o])
}

/// σ_z = |e⟩⟨e| − |g⟩⟨g| in the ordered basis {|g⟩, |e⟩}.
pub fn pauli_z_ge<T: Real>() -> CMatrix<T> {
    let o = Cx::zero();
    let l = Cx::one();
    CMatrix::from_row_slice(2, 2, &[-l, o, o, l])
}

/// σ₋ = |g⟩⟨e| in the ordered basis {|g⟩, |e⟩}.
pub fn sigma_minus_ge<T: Real>() -> CMatrix<T> {
    let o = Cx::zero();
    let l = Cx::one();
    CMatrix::from_row_slice(2, 2, &[o, l, o, o])
}
