//! Frame that follows the instantaneous eigenbasis of the system Hamiltonian.
//!
//! With `W(t)` holding the tracked eigenvectors `|E_n(t)⟩` as columns, the frame operator is
//! `U(t) = Σ_n |E_n(0)⟩⟨E_n(t)| = W(0)W(t)†` and `ρ̃ = UρU†` obeys a master equation with
//! Hamiltonian `UHU† + Z`, `Z = iU̇U†`, and jumps `ULU†`.
//!
//! The rotated model is written in the `{|E_n(0)⟩}` coordinates, where `UHU†` is
//! `diag(E_n(t))`, `Z` becomes `iẆ†W` and jumps become `W†LW`.

use crate::adiabatic::{gamma_mn, GammaForm};
use crate::embed::{build_effective_hamiltonian, EffectiveHamiltonian};
use crate::error::{Error, Result};
use crate::model::{LindbladModel, OperatorSchedule};
use crate::numerics::diff::grid_derivative;
use crate::numerics::eigen::hermitian_eigen;
use crate::numerics::matrix::{self, CMatrix};
use crate::scalar::{abs, cr, Cx, Real};

use crate::spectral::{EigenPath, TrackingOptions, MIN_TRACKING_OVERLAP};

/// Adjacent levels of `H(t)` closer than this (relative to the level spread) count as crossing.
pub const CROSSING_REL_TOL: f64 = 1e-8;

/// Tracked eigenbasis of `H(t)` on a time grid.
///
/// Columns are ordered by ascending energy at every node. The first node's columns have their
/// largest component real positive; later columns are phased so `⟨E_n(t_i)|E_n(t_{i+1})⟩ > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatingFrame<T: Real> {
    pub times: Vec<T>,
    pub energies: Vec<Vec<T>>,
    /// `W(t_k)`.
    pub vectors: Vec<CMatrix<T>>,
    /// `iẆ†W` at each node, in `E(0)` coordinates, from second-order grid differences.
    pub z: Vec<CMatrix<T>>,
}

impl<T: Real> RotatingFrame<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].nrows()
    }

    /// `U(t_k) = W(0)W(t_k)†` in computational coordinates.
    pub fn u(&self, k: usize) -> CMatrix<T> {
        &self.vectors[0] * self.vectors[k].adjoint()
    }

    /// `Z(t_k) = iU̇U†` in computational coordinates.
    pub fn z_computational(&self, k: usize) -> CMatrix<T> {
        &self.vectors[0] * &self.z[k] * self.vectors[0].adjoint()
    }

    /// `max_k max|U U† − I|`.
    pub fn unitarity_error(&self) -> T {
        let id = CMatrix::identity(self.dim(), self.dim());
        (0..self.len()).fold(T::zero(), |m, k| {
            let u = self.u(k);
            m.max(matrix::max_abs_diff(&(&u * u.adjoint()), &id))
        })
    }

    /// `max_k max|Z − Z†|/2`.
    pub fn z_hermiticity_error(&self) -> T {
        self.z
            .iter()
            .fold(T::zero(), |m, z| m.max(matrix::hermiticity_violation(z)))
    }

    /// `W(t_k)†ρW(t_k)`: a lab-frame state in rotated `E(0)` coordinates.
    pub fn rotate_state(&self, k: usize, rho: &CMatrix<T>) -> CMatrix<T> {
        self.vectors[k].adjoint() * rho * &self.vectors[k]
    }

    /// Inverse of [`RotatingFrame::rotate_state`].
    pub fn unrotate_state(&self, k: usize, rho: &CMatrix<T>) -> CMatrix<T> {
        &self.vectors[k] * rho * self.vectors[k].adjoint()
    }

    fn covers(&self, (start, end): (T, T)) -> bool {
        let slack = T::lit(64.0) * T::EPSILON * start.abs().max(end.abs()).max(T::one());
        self.times[0] <= start + slack && self.times[self.len() - 1] >= end - slack
    }
}

fn check_gaps<T: Real>(energies: &[T], t: T) -> Result<()> {
    let spread = energies[energies.len() - 1] - energies[0];
    let scale = spread
        .max(energies.iter().fold(T::zero(), |m, e| m.max(e.abs())))
        .max(T::one());
    for w in energies.windows(2) {
        if w[1] - w[0] <= T::lit(CROSSING_REL_TOL) * scale {
            return Err(Error::Degenerate(format!("levels of H meet at t = {t}")));
        }
    }
    Ok(())
}

/// Tracks the eigenbasis of `H(t)` across `grid` (at least three strictly increasing points).
pub fn build_frame<T: Real>(model: &LindbladModel<T>, grid: &[T]) -> Result<RotatingFrame<T>> {
    if grid.len() < 3 {
        return Err(Error::InvalidArgument(
            "frame grid needs at least three points".into(),
        ));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "frame grid must be strictly increasing".into(),
        ));
    }
    let n = model.dim();
    let mut energies = Vec::with_capacity(grid.len());
    let mut vectors: Vec<CMatrix<T>> = Vec::with_capacity(grid.len());
    for (i, &t) in grid.iter().enumerate() {
        let (e, mut w) = hermitian_eigen(&model.hamiltonian_at(t)?)?;
        check_gaps(&e, t)?;
        if let Some(prev) = vectors.last() {
            let overlaps = prev.adjoint() * &w;
            for c in 0..n {
                // ascending order is kept unless two levels swapped between nodes
                let best = (0..n)
                    .max_by(|&a, &b| {
                        abs(overlaps[(a, c)])
                            .partial_cmp(&abs(overlaps[(b, c)]))
                            .unwrap()
                    })
                    .unwrap();
                let size = abs(overlaps[(c, c)]);
                if best != c {
                    return Err(Error::Degenerate(format!(
                        "levels {best} and {c} of H cross between t = {} and t = {t}",
                        grid[i - 1]
                    )));
                }
                if !(size >= T::lit(MIN_TRACKING_OVERLAP)) {
                    return Err(Error::TrackingFailure {
                        t_from: grid[i - 1].to_f64_lossy(),
                        t_to: t.to_f64_lossy(),
                        overlap: size.to_f64_lossy(),
                    });
                }
                let phase = overlaps[(c, c)].conj() / cr(size);
                let col = w.column(c) * phase;
                w.set_column(c, &col);
            }
        }
        energies.push(e);
        vectors.push(w);
    }
    let adjoints: Vec<CMatrix<T>> = vectors.iter().map(|w| w.adjoint()).collect();
    let derivs = grid_derivative(grid, &adjoints)?;
    let i = Cx::new(T::zero(), T::one());
    let z = derivs
        .iter()
        .zip(&vectors)
        .map(|(d, w)| (d * w) * i)
        .collect();
    Ok(RotatingFrame {
        times: grid.to_vec(),
        energies,
        vectors,
        z,
    })
}

/// The model seen from the frame, in `E(0)` coordinates, with piecewise-linear schedules on
/// the frame grid. The Hamiltonian samples are `diag(E_n) + Z` with `Z` replaced by its
/// Hermitian part, so the rotated flow stays trace- and Hermiticity-preserving.
pub fn rotate_model<T: Real>(
    model: &LindbladModel<T>,
    frame: &RotatingFrame<T>,
) -> Result<LindbladModel<T>> {
    if frame.dim() != model.dim() {
        return Err(Error::dim("rotating frame", model.dim(), frame.dim()));
    }
    if !frame.covers(model.t_domain()) {
        let (s, e) = model.t_domain();
        return Err(Error::InvalidArgument(format!(
            "frame grid [{}, {}] does not cover the model domain [{s}, {e}]",
            frame.times[0],
            frame.times[frame.len() - 1]
        )));
    }
    let half = cr(T::lit(0.5));
    let h_samples = (0..frame.len())
        .map(|k| {
            let z = &frame.z[k];
            let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                frame.dim(),
                frame.energies[k].iter().map(|&e| cr(e)),
            ));
            diag + (z + z.adjoint()) * half
        })
        .collect();
    let h = OperatorSchedule::piecewise_linear(frame.times.clone(), h_samples)?;
    let jumps = (0..model.jump_ops().len())
        .map(|j| {
            let samples = (0..frame.len())
                .map(|k| {
                    let l = model.jump_ops()[j].eval(frame.times[k])?;
                    Ok(frame.vectors[k].adjoint() * l * &frame.vectors[k])
                })
                .collect::<Result<Vec<_>>>()?;
            OperatorSchedule::piecewise_linear(frame.times.clone(), samples)
        })
        .collect::<Result<Vec<_>>>()?;
    LindbladModel::new(h, jumps, model.t_domain())
}

/// Effective Hamiltonian of the rotated model at `t`.
pub fn build_rotated_effective<T: Real>(
    model: &LindbladModel<T>,
    frame: &RotatingFrame<T>,
    t: T,
) -> Result<EffectiveHamiltonian<T>> {
    build_effective_hamiltonian(&rotate_model(model, frame)?, t)
}

/// Γ_mn of the rotated effective Hamiltonian at `t`.
///
/// The rotated schedules are piecewise linear, so at frame nodes the derivative is the
/// central grid difference; between nodes it is the slope of the enclosing segment.
pub fn high_order_gamma<T: Real>(
    model: &LindbladModel<T>,
    frame: &RotatingFrame<T>,
    t: T,
    m: usize,
    n: usize,
    form: GammaForm,
) -> Result<T> {
    let rotated = rotate_model(model, frame)?;
    let path = EigenPath::single(&rotated, t, TrackingOptions::default())?;
    gamma_mn(&path, t, m, n, form)
}

/// Largest Γ_mn of the rotated effective Hamiltonian over non-degenerate pairs.
pub fn high_order_gamma_max<T: Real>(
    model: &LindbladModel<T>,
    frame: &RotatingFrame<T>,
    t: T,
    form: GammaForm,
) -> Result<(T, (usize, usize))> {
    let rotated = rotate_model(model, frame)?;
    let path = EigenPath::single(&rotated, t, TrackingOptions::default())?;
    crate::adiabatic::gamma_max(&path, t, form)
}
