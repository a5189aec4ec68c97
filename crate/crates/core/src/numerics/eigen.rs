//! General complex eigensolver.
//!
//! The Schur factorization `A = Q T Q†` comes from `nalgebra`; eigenvectors are
//! recovered by back-substitution on the upper-triangular factor and mapped
//! back through `Q`.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use super::matrix::{ensure_finite, ensure_square, CMatrix, CVector};
use crate::error::{Error, Result};
use crate::scalar::{abs, Cx, Real};

const MAX_SCHUR_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct EigenPair<T: Real> {
    pub value: Cx<T>,
    /// Unit-norm right eigenvector.
    pub vector: CVector<T>,
}

/// Orders complex numbers by real part, then imaginary part.
pub fn cmp_complex<T: Real>(a: &Cx<T>, b: &Cx<T>) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

/// Complex Schur factors `(Q, T)` of `a`.
fn schur<T: Real>(a: &CMatrix<T>) -> Result<(CMatrix<T>, CMatrix<T>)> {
    let schur = a
        .clone()
        .try_schur(T::default_epsilon(), MAX_SCHUR_ITERATIONS)
        .ok_or(Error::NoConvergence)?;
    Ok(schur.unpack())
}

/// Solves `T x = λ_k x` for the k-th eigenvector of an upper-triangular `T`.
fn triangular_eigenvector<T: Real>(t: &CMatrix<T>, k: usize, small: T) -> CVector<T> {
    let n = t.nrows();
    let mut x = CVector::zeros(n);
    x[k] = Cx::one();
    let lambda = t[(k, k)];
    for i in (0..k).rev() {
        let mut acc: Cx<T> = Cx::zero();
        for j in (i + 1)..=k {
            acc += t[(i, j)] * x[j];
        }
        let mut denom: Cx<T> = t[(i, i)] - lambda;
        if abs(denom) < small {
            denom = Cx::new(small, T::zero());
        }
        x[i] = -acc / denom;
        // rescale to keep growth in check for clustered spectra
        let big = x.iter().fold(T::zero(), |m, z| m.max(abs(*z)));
        if big > T::lit(1e100) {
            x /= Cx::new(big, T::zero());
        }
    }
    x
}

/// All eigenpairs of a square complex matrix, sorted by (Re λ, Im λ).
pub fn eigensolve_general<T: Real>(a: &CMatrix<T>) -> Result<Vec<EigenPair<T>>> {
    let n = ensure_square(a, "eigensolve_general")?;
    ensure_finite(a, "eigensolve_general")?;

    let scale = a.norm();
    if scale == T::zero() {
        return Ok((0..n)
            .map(|k| EigenPair {
                value: Cx::zero(),
                vector: CVector::from_fn(n, |i, _| if i == k { Cx::one() } else { Cx::zero() }),
            })
            .collect());
    }

    let (q, t) = schur(a)?;
    let small = T::EPSILON * scale;

    let mut pairs: Vec<EigenPair<T>> = (0..n)
        .map(|k| {
            let y = triangular_eigenvector(&t, k, small);
            let mut v = &q * y;
            let norm = v.norm();
            v /= Cx::new(norm, T::zero());
            EigenPair {
                value: t[(k, k)],
                vector: v,
            }
        })
        .collect();
    pairs.sort_by(|p, q| cmp_complex(&p.value, &q.value));
    Ok(pairs)
}

/// Eigenvalues only, sorted by (Re λ, Im λ).
pub fn eigenvalues<T: Real>(a: &CMatrix<T>) -> Result<Vec<Cx<T>>> {
    ensure_square(a, "eigenvalues")?;
    ensure_finite(a, "eigenvalues")?;
    let (_, t) = schur(a)?;
    let mut vals: Vec<Cx<T>> = (0..t.nrows()).map(|k| t[(k, k)]).collect();
    vals.sort_by(cmp_complex);
    Ok(vals)
}

/// Trace norm ‖A‖₁ = Σ singular values.
pub fn trace_norm<T: Real>(a: &CMatrix<T>) -> Result<T> {
    ensure_square(a, "trace_norm")?;
    let svd = a.clone().svd(false, false);
    Ok(svd.singular_values.iter().fold(T::zero(), |s, &x| s + x))
}

/// ½‖ρ − σ‖₁.
pub fn trace_distance<T: Real>(rho: &CMatrix<T>, sigma: &CMatrix<T>) -> Result<T> {
    if rho.shape() != sigma.shape() {
        return Err(Error::dim(
            "trace_distance",
            format!("{:?}", rho.shape()),
            format!("{:?}", sigma.shape()),
        ));
    }
    Ok(trace_norm(&(rho - sigma))? * T::lit(0.5))
}

/// Smallest eigenvalue of the Hermitian part of `a`.
pub fn min_hermitian_eigenvalue<T: Real>(a: &CMatrix<T>) -> Result<T> {
    ensure_square(a, "min_hermitian_eigenvalue")?;
    let h = (a + a.adjoint()) * Cx::new(T::lit(0.5), T::zero());
    let eig = h.symmetric_eigen();
    Ok(eig.eigenvalues.iter().fold(T::INFINITY, |m, &x| m.min(x)))
}

/// Index of the first component whose modulus is within a relative `1e-10` of the largest.
pub fn dominant_index<T: Real>(v: &CVector<T>) -> usize {
    let big = v.iter().fold(T::zero(), |m, z| m.max(abs(*z)));
    let cut = big * (T::one() - T::lit(1e-10));
    v.iter().position(|z| abs(*z) >= cut).unwrap_or(0)
}

/// Multiplies `v` by a unit phase so its dominant component is real and positive.
pub fn fix_phase<T: Real>(v: &mut CVector<T>) {
    let k = dominant_index(v);
    let z = v[k];
    let m = abs(z);
    if m > T::zero() {
        *v *= z.conj() / Cx::new(m, T::zero());
    }
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the matching
/// orthonormal eigenvectors as columns, each phased by [`fix_phase`].
pub fn hermitian_eigen<T: Real>(h: &CMatrix<T>) -> Result<(Vec<T>, CMatrix<T>)> {
    let n = ensure_square(h, "hermitian_eigen")?;
    ensure_finite(h, "hermitian_eigen")?;
    let sym = (h + h.adjoint()) * Cx::new(T::lit(0.5), T::zero());
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(Ordering::Equal)
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut v: CVector<T> = eig.eigenvectors.column(k).into_owned();
        fix_phase(&mut v);
        vecs.set_column(col, &v);
    }
    Ok((values, vecs))
}
