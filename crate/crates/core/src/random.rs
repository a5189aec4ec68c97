//! Seeded random operators and models for property tests and the self-test suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{DensityMatrix, HarmonicTerm, LindbladModel, OperatorSchedule};
use crate::numerics::matrix::{CMatrix, CVector};
use crate::scalar::{cr, Cx, Real};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with real and imaginary parts uniform in `[−scale, scale]`.
pub fn complex_matrix<T: Real, R: Rng>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    scale: f64,
) -> CMatrix<T> {
    CMatrix::from_fn(rows, cols, |_, _| {
        Cx::new(
            T::lit(rng.random_range(-scale..=scale)),
            T::lit(rng.random_range(-scale..=scale)),
        )
    })
}

pub fn complex_vector<T: Real, R: Rng>(rng: &mut R, n: usize, scale: f64) -> CVector<T> {
    CVector::from_fn(n, |_, _| {
        Cx::new(
            T::lit(rng.random_range(-scale..=scale)),
            T::lit(rng.random_range(-scale..=scale)),
        )
    })
}

pub fn hermitian<T: Real, R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMatrix<T> {
    let a = complex_matrix::<T, R>(rng, n, n, scale);
    (&a + a.adjoint()) * cr(T::lit(0.5))
}

/// Full-rank mixed state `G G† / Tr(G G†)`.
pub fn density<T: Real, R: Rng>(rng: &mut R, n: usize) -> DensityMatrix<T> {
    let g = complex_matrix::<T, R>(rng, n, n, 1.0);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m / cr(tr)).expect("G G† / Tr is a valid state")
}

/// Smooth driven model: Hermitian `H(t)` and jump operators each with one harmonic term.
pub fn model<T: Real, R: Rng>(
    rng: &mut R,
    n: usize,
    n_jumps: usize,
    t_domain: (T, T),
) -> Result<LindbladModel<T>> {
    let h_term = HarmonicTerm {
        frequency: T::lit(rng.random_range(0.2..1.5)),
        cos: hermitian(rng, n, 0.5),
        sin: hermitian(rng, n, 0.5),
    };
    let h = OperatorSchedule::harmonic(hermitian(rng, n, 1.0), vec![h_term])?;
    let jumps = (0..n_jumps)
        .map(|_| {
            let term = HarmonicTerm {
                frequency: T::lit(rng.random_range(0.2..1.5)),
                cos: complex_matrix(rng, n, n, 0.2),
                sin: complex_matrix(rng, n, n, 0.2),
            };
            OperatorSchedule::harmonic(complex_matrix(rng, n, n, 0.4), vec![term])
        })
        .collect::<Result<Vec<_>>>()?;
    LindbladModel::new(h, jumps, t_domain)
}

/// Time-independent model with `n_jumps` constant jump operators.
pub fn static_model<T: Real, R: Rng>(
    rng: &mut R,
    n: usize,
    n_jumps: usize,
    t_domain: (T, T),
) -> Result<LindbladModel<T>> {
    let h = OperatorSchedule::constant(hermitian(rng, n, 1.0))?;
    let jumps = (0..n_jumps)
        .map(|_| OperatorSchedule::constant(complex_matrix(rng, n, n, 0.4)))
        .collect::<Result<Vec<_>>>()?;
    LindbladModel::new(h, jumps, t_domain)
}
