//! Biorthogonal eigensystems of effective Hamiltonians and their continuation in time.
//!
//! Right vectors have unit norm; left vectors are stored as the row coefficients of
//! `⟨L_m|` (no conjugation on pairing) and are the rows of `R⁻¹`, so `⟨L_m|R_n⟩ = δ_mn`
//! holds even inside degenerate clusters.

mod path;

pub use path::{
    track_paths, EigenPath, GeneratorDerivative, LocalSpectrum, SpectrumSource, TrackingOptions,
    MIN_TRACKING_OVERLAP,
};

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::numerics::eigen::{cmp_complex, eigensolve_general, fix_phase, hermitian_eigen};
use crate::numerics::matrix::{self, CMatrix, CVector};
use crate::scalar::{abs, cr, Cx, Real};

/// Relative degeneracy threshold, scaled by the spectral diameter.
pub const DEFAULT_DEGENERACY_REL_TOL: f64 = 1e-8;
/// Largest eigenvector condition number `‖L_m‖‖R_m‖/|⟨L_m|R_m⟩|` accepted as diagonalizable.
pub const MAX_CONDITION: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition<T: Real> {
    pub values: Vec<Cx<T>>,
    pub right: Vec<CVector<T>>,
    pub left: Vec<CVector<T>>,
    /// Index has another eigenvalue closer than `degeneracy_threshold`.
    pub degenerate: Vec<bool>,
    pub degeneracy_threshold: T,
}

impl<T: Real> SpectralDecomposition<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `⟨L_m|v⟩`.
    pub fn overlap(&self, m: usize, v: &CVector<T>) -> Cx<T> {
        matrix::pair(&self.left[m], v)
    }

    pub fn is_degenerate_pair(&self, m: usize, n: usize) -> bool {
        is_close(self.values[m], self.values[n], self.degeneracy_threshold)
    }

    pub fn any_degenerate(&self) -> bool {
        self.degenerate.iter().any(|&d| d)
    }

    /// Right vectors as columns.
    pub fn right_matrix(&self) -> CMatrix<T> {
        CMatrix::from_columns(&self.right)
    }

    /// Left vectors as rows.
    pub fn left_matrix(&self) -> CMatrix<T> {
        let n = self.len();
        CMatrix::from_fn(n, n, |m, k| self.left[m][k])
    }

    /// `max_{m,n} |⟨L_m|R_n⟩ − δ_mn|`, skipping degenerate off-diagonal pairs when `skip_degenerate`.
    pub fn biorthogonality_error(&self, skip_degenerate: bool) -> T {
        let mut worst = T::zero();
        for m in 0..self.len() {
            for n in 0..self.len() {
                if m != n && skip_degenerate && self.is_degenerate_pair(m, n) {
                    continue;
                }
                let target = if m == n { T::one() } else { T::zero() };
                worst = worst.max(abs(self.overlap(m, &self.right[n]) - cr(target)));
            }
        }
        worst
    }

    /// `max |Σ_m |R_m⟩⟨L_m| − I|`.
    pub fn completeness_error(&self) -> T {
        let n = self.len();
        let sum = self.right_matrix() * self.left_matrix();
        matrix::max_abs_diff(&sum, &CMatrix::identity(n, n))
    }

    /// `Σ_m λ_m |R_m⟩⟨L_m|`.
    pub fn reconstruct(&self) -> CMatrix<T> {
        let n = self.len();
        let scaled = CMatrix::from_fn(n, n, |m, k| self.left[m][k] * self.values[m]);
        self.right_matrix() * scaled
    }

    /// Largest relative residuals `‖A R − λR‖/(‖A‖‖R‖)` and `‖L A − λL‖/(‖A‖‖L‖)`.
    pub fn residuals(&self, a: &CMatrix<T>) -> (T, T) {
        let scale = a.norm();
        if scale == T::zero() {
            return (T::zero(), T::zero());
        }
        let mut right = T::zero();
        let mut left = T::zero();
        for m in 0..self.len() {
            let r = &self.right[m];
            right = right.max((a * r - r * self.values[m]).norm() / (scale * r.norm()));
            let l = &self.left[m];
            let la = a.transpose() * l;
            left = left.max((la - l * self.values[m]).norm() / (scale * l.norm()));
        }
        (right, left)
    }

    /// `κ_m = ‖L_m‖‖R_m‖/|⟨L_m|R_m⟩|` per index.
    pub fn condition_numbers(&self) -> Vec<T> {
        (0..self.len())
            .map(|m| {
                self.left[m].norm() * self.right[m].norm() / abs(self.overlap(m, &self.right[m]))
            })
            .collect()
    }
}

fn is_close<T: Real>(a: Cx<T>, b: Cx<T>, threshold: T) -> bool {
    let d = abs(a - b);
    d < threshold || d == T::zero()
}

fn degeneracy<T: Real>(values: &[Cx<T>], rel_tol: T, scale: T) -> (Vec<bool>, T) {
    let mut diameter = T::zero();
    for a in values {
        for b in values {
            diameter = diameter.max(abs(*a - *b));
        }
    }
    let threshold = rel_tol
        * if diameter > T::zero() {
            diameter
        } else {
            scale
        };
    let flags = (0..values.len())
        .map(|m| (0..values.len()).any(|n| n != m && is_close(values[m], values[n], threshold)))
        .collect();
    (flags, threshold)
}

/// Biorthogonal eigensystem of a general square matrix, ordered by (Re λ, Im λ).
///
/// Each right vector is normalized and phased so its dominant component is real
/// positive. `degeneracy_rel_tol` is relative to the spectral diameter.
pub fn decompose<T: Real>(
    a: &CMatrix<T>,
    degeneracy_rel_tol: T,
) -> Result<SpectralDecomposition<T>> {
    let pairs = eigensolve_general(a)?;
    let n = pairs.len();
    let mut values = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for mut p in pairs {
        fix_phase(&mut p.vector);
        values.push(p.value);
        right.push(p.vector);
    }
    let r = CMatrix::from_columns(&right);
    let inv = r.try_inverse().ok_or(Error::NonDiagonalizable {
        condition: f64::INFINITY,
    })?;
    let left = (0..n).map(|m| inv.row(m).transpose()).collect();
    let (degenerate, degeneracy_threshold) =
        degeneracy(&values, degeneracy_rel_tol, matrix::max_abs(a));
    let sd = SpectralDecomposition {
        values,
        right,
        left,
        degenerate,
        degeneracy_threshold,
    };
    let worst = sd.condition_numbers().into_iter().fold(T::zero(), |m, k| {
        if k.is_finite() {
            m.max(k)
        } else {
            T::INFINITY
        }
    });
    if !(worst <= T::lit(MAX_CONDITION)) {
        return Err(Error::NonDiagonalizable {
            condition: worst.to_f64_lossy(),
        });
    }
    Ok(sd)
}

/// Eigensystem of a closed-system generator `H ⊗ I − I ⊗ H*` built from the eigenbasis of `H`:
/// `R_(a,b) = E_a ⊗ E_b*` with eigenvalue `E_a − E_b`, at index `a·N + b`.
///
/// Unlike [`decompose`], this gives well-defined vectors inside the degenerate
/// `E_a − E_a = 0` cluster. Returns the system energies and eigenvectors alongside.
pub fn decompose_closed<T: Real>(
    h: &CMatrix<T>,
    degeneracy_rel_tol: T,
) -> Result<(SpectralDecomposition<T>, Vec<T>, CMatrix<T>)> {
    let n = matrix::ensure_square(h, "decompose_closed")?;
    let (energies, vectors) = hermitian_eigen(h)?;
    let mut values = Vec::with_capacity(n * n);
    let mut right = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            values.push(cr(energies[a] - energies[b]));
            let ea = vectors.column(a);
            let eb = vectors.column(b);
            right.push(CVector::from_fn(n * n, |k, _| ea[k / n] * eb[k % n].conj()));
        }
    }
    let left = right.iter().map(|r| r.map(|z| z.conj())).collect();
    let (degenerate, degeneracy_threshold) =
        degeneracy(&values, degeneracy_rel_tol, matrix::max_abs(h));
    Ok((
        SpectralDecomposition {
            values,
            right,
            left,
            degenerate,
            degeneracy_threshold,
        },
        energies,
        vectors,
    ))
}

/// Reshapes a right eigenvector into its density-matrix form `[ρ_m]_{αβ} = R_m[α·N + β]`.
pub fn eigenstate_to_density<T: Real>(r: &CVector<T>) -> Result<CMatrix<T>> {
    matrix::unvec_row_major(r)
}

/// Matrix form `Λ` of a left eigenvector with `⟨L|v⟩ = Tr(Λ · unvec(v))`.
pub fn left_to_matrix<T: Real>(l: &CVector<T>) -> Result<CMatrix<T>> {
    Ok(matrix::unvec_row_major(l)?.transpose())
}

/// Greedy index matching of `raw` onto `reference` by `|⟨L_m^ref|R_k^raw⟩|`.
///
/// Returns `perm` with `perm[m]` the raw index assigned to reference index `m`, and the
/// smallest matched overlap.
pub fn match_indices<T: Real>(
    reference: &SpectralDecomposition<T>,
    raw: &SpectralDecomposition<T>,
) -> Result<(Vec<usize>, T)> {
    let n = reference.len();
    if raw.len() != n {
        return Err(Error::dim("eigenpair matching", n, raw.len()));
    }
    let mut scores: Vec<(T, usize, usize)> = Vec::with_capacity(n * n);
    for m in 0..n {
        for k in 0..n {
            scores.push((abs(reference.overlap(m, &raw.right[k])), m, k));
        }
    }
    scores.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut perm = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut worst = T::INFINITY;
    for (score, m, k) in scores {
        if perm[m] == usize::MAX && !taken[k] {
            perm[m] = k;
            taken[k] = true;
            worst = worst.min(score);
        }
    }
    Ok((perm, worst))
}

impl<T: Real> SpectralDecomposition<T> {
    /// Applies `perm` (`new[m] = old[perm[m]]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let values: Vec<Cx<T>> = perm.iter().map(|&k| self.values[k]).collect();
        Self {
            right: perm.iter().map(|&k| self.right[k].clone()).collect(),
            left: perm.iter().map(|&k| self.left[k].clone()).collect(),
            degenerate: perm.iter().map(|&k| self.degenerate[k]).collect(),
            degeneracy_threshold: self.degeneracy_threshold,
            values,
        }
    }

    /// Rephases each `R_m` so that `⟨L_m^gauge|R_m⟩` is real positive; returns the factors applied.
    pub fn fix_phases(&mut self, gauge: &SpectralDecomposition<T>) -> Vec<Cx<T>> {
        (0..self.len())
            .map(|m| {
                let z = gauge.overlap(m, &self.right[m]);
                let size = abs(z);
                if size == T::zero() {
                    return cr(T::one());
                }
                let phase = z.conj() / cr(size);
                self.right[m] *= phase;
                self.left[m] *= phase.conj();
                phase
            })
            .collect()
    }

    /// Sorted copy of the eigenvalues.
    pub fn sorted_values(&self) -> Vec<Cx<T>> {
        let mut v = self.values.clone();
        v.sort_by(cmp_complex);
        v
    }
}
