use std::fmt;
use std::sync::Arc;

use super::{
    decompose, decompose_closed, match_indices, SpectralDecomposition, DEFAULT_DEGENERACY_REL_TOL,
};
use crate::embed::{build_effective_hamiltonian, effective_hamiltonian_derivative};
use crate::error::{Error, Result};
use crate::model::LindbladModel;
use crate::numerics::diff::{bounded_difference, bounded_stencil, DEFAULT_FD_STEP};
use crate::numerics::matrix::{CMatrix, CVector};
use crate::scalar::{cr, Cx, Real};

/// Smallest adjacent-time overlap `|⟨L_m(t_i)|R_m(t_{i+1})⟩|` accepted by tracking.
pub const MIN_TRACKING_OVERLAP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    /// Numerical eigensystem of `H_T(t)`.
    Generic,
    /// Products of system eigenvectors; only valid for models without jump operators.
    ClosedProduct,
}

/// Analytic `∂H_T/∂t`, used instead of finite differences when supplied.
pub type GeneratorDerivative<T> = Arc<dyn Fn(T) -> Result<CMatrix<T>> + Send + Sync>;

#[derive(Clone)]
pub struct TrackingOptions<T: Real> {
    pub degeneracy_rel_tol: T,
    pub fd_step: T,
    /// `None` selects [`SpectrumSource::ClosedProduct`] for closed models and
    /// [`SpectrumSource::Generic`] otherwise.
    pub source: Option<SpectrumSource>,
    pub generator_derivative: Option<GeneratorDerivative<T>>,
}

impl<T: Real> Default for TrackingOptions<T> {
    fn default() -> Self {
        Self {
            degeneracy_rel_tol: T::lit(DEFAULT_DEGENERACY_REL_TOL),
            fd_step: T::lit(DEFAULT_FD_STEP),
            source: None,
            generator_derivative: None,
        }
    }
}

impl<T: Real> fmt::Debug for TrackingOptions<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TrackingOptions")
            .field("degeneracy_rel_tol", &self.degeneracy_rel_tol)
            .field("fd_step", &self.fd_step)
            .field("source", &self.source)
            .field("generator_derivative", &self.generator_derivative.is_some())
            .finish()
    }
}

/// Eigensystem at one time together with the derivatives Γ needs.
#[derive(Debug, Clone)]
pub struct LocalSpectrum<T: Real> {
    pub time: T,
    pub spectrum: SpectralDecomposition<T>,
    /// `d|R_m⟩/dt` in the gauge the spectrum was evaluated in.
    pub r_dot: Vec<CVector<T>>,
    pub generator: CMatrix<T>,
    pub generator_dot: CMatrix<T>,
}

/// Eigenpairs of `H_T(t)` followed continuously across a time grid.
///
/// Index `m` refers to the same branch at every grid time. Right vectors at `t_{i+1}` are
/// phased so `⟨L_m(t_i)|R_m(t_{i+1})⟩` is real positive.
#[derive(Debug, Clone)]
pub struct EigenPath<T: Real> {
    model: LindbladModel<T>,
    source: SpectrumSource,
    options: TrackingOptions<T>,
    times: Vec<T>,
    spectra: Vec<SpectralDecomposition<T>>,
    permutations: Vec<Vec<usize>>,
    phases: Vec<Vec<Cx<T>>>,
    min_overlaps: Vec<T>,
}

/// [`EigenPath::track`] with default options apart from the degeneracy tolerance.
pub fn track_paths<T: Real>(
    model: &LindbladModel<T>,
    grid: &[T],
    degeneracy_rel_tol: T,
) -> Result<EigenPath<T>> {
    EigenPath::track(
        model,
        grid,
        TrackingOptions {
            degeneracy_rel_tol,
            ..TrackingOptions::default()
        },
    )
}

impl<T: Real> EigenPath<T> {
    pub fn track(
        model: &LindbladModel<T>,
        grid: &[T],
        options: TrackingOptions<T>,
    ) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidArgument(
                "eigenpath grid needs at least two points".into(),
            ));
        }
        Self::build(model, grid, options)
    }

    /// Path consisting of a single time, for local evaluations.
    pub fn single(model: &LindbladModel<T>, t: T, options: TrackingOptions<T>) -> Result<Self> {
        Self::build(model, &[t], options)
    }

    fn build(model: &LindbladModel<T>, grid: &[T], options: TrackingOptions<T>) -> Result<Self> {
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "eigenpath grid must be strictly increasing".into(),
            ));
        }
        if !(options.fd_step > T::zero()) {
            return Err(Error::InvalidArgument(
                "finite-difference step must be positive".into(),
            ));
        }
        for &t in grid {
            model.check_time(t)?;
        }
        let source = match options.source {
            Some(SpectrumSource::ClosedProduct) if !model.is_closed() => {
                return Err(Error::InvalidArgument(
                    "closed-product spectra need a model without jump operators".into(),
                ))
            }
            Some(s) => s,
            None if model.is_closed() => SpectrumSource::ClosedProduct,
            None => SpectrumSource::Generic,
        };
        let mut path = Self {
            model: model.clone(),
            source,
            options,
            times: grid.to_vec(),
            spectra: Vec::with_capacity(grid.len()),
            permutations: Vec::with_capacity(grid.len()),
            phases: Vec::with_capacity(grid.len()),
            min_overlaps: Vec::with_capacity(grid.len().saturating_sub(1)),
        };
        let first = path.raw_spectrum(grid[0])?;
        let n = first.len();
        path.permutations.push((0..n).collect());
        path.phases.push(vec![cr(T::one()); n]);
        path.spectra.push(first);
        for i in 1..grid.len() {
            let raw = path.raw_spectrum(grid[i])?;
            let prev = &path.spectra[i - 1];
            let (perm, overlap) = match_indices(prev, &raw)?;
            if !(overlap >= T::lit(MIN_TRACKING_OVERLAP)) {
                return Err(Error::TrackingFailure {
                    t_from: grid[i - 1].to_f64_lossy(),
                    t_to: grid[i].to_f64_lossy(),
                    overlap: overlap.to_f64_lossy(),
                });
            }
            let mut aligned = raw.permuted(&perm);
            let phases = aligned.fix_phases(prev);
            path.min_overlaps.push(overlap);
            path.permutations.push(perm);
            path.phases.push(phases);
            path.spectra.push(aligned);
        }
        Ok(path)
    }

    pub fn model(&self) -> &LindbladModel<T> {
        &self.model
    }

    pub fn source(&self) -> SpectrumSource {
        self.source
    }

    pub fn options(&self) -> &TrackingOptions<T> {
        &self.options
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn spectra(&self) -> &[SpectralDecomposition<T>] {
        &self.spectra
    }

    /// `permutations()[i][m]`: raw eigensolver index that became path index `m` at `times()[i]`.
    pub fn permutations(&self) -> &[Vec<usize>] {
        &self.permutations
    }

    /// Phase factors applied to the right vectors at each grid time.
    pub fn phases(&self) -> &[Vec<Cx<T>>] {
        &self.phases
    }

    /// Smallest matched overlap on each grid interval.
    pub fn min_overlaps(&self) -> &[T] {
        &self.min_overlaps
    }

    pub fn len(&self) -> usize {
        self.spectra[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Eigenvalue of branch `m` at every grid time.
    pub fn eigenvalue_history(&self, m: usize) -> Vec<Cx<T>> {
        self.spectra.iter().map(|s| s.values[m]).collect()
    }

    /// Eigensystem at `t` straight from the eigensolver, in eigensolver order.
    pub fn raw_spectrum(&self, t: T) -> Result<SpectralDecomposition<T>> {
        match self.source {
            SpectrumSource::Generic => {
                let ht = build_effective_hamiltonian(&self.model, t)?;
                decompose(&ht.matrix, self.options.degeneracy_rel_tol)
            }
            SpectrumSource::ClosedProduct => {
                let h = self.model.hamiltonian_at(t)?;
                Ok(decompose_closed(&h, self.options.degeneracy_rel_tol)?.0)
            }
        }
    }

    pub fn generator(&self, t: T) -> Result<CMatrix<T>> {
        Ok(build_effective_hamiltonian(&self.model, t)?.matrix)
    }

    /// `∂H_T/∂t` from the supplied hook or the exact product rule; `None` if neither applies.
    pub fn analytic_generator_dot(&self, t: T) -> Result<Option<CMatrix<T>>> {
        if let Some(d) = &self.options.generator_derivative {
            return d(t).map(Some);
        }
        effective_hamiltonian_derivative(&self.model, t)
    }

    /// `∂H_T/∂t`: the supplied hook, else the exact product rule, else finite differences.
    pub fn generator_dot(&self, t: T) -> Result<CMatrix<T>> {
        if let Some(d) = self.analytic_generator_dot(t)? {
            return Ok(d);
        }
        let (lo, hi) = self.model.t_domain();
        bounded_difference(|s| self.generator(s), t, self.options.fd_step, lo, hi)
    }

    pub fn nearest_index(&self, t: T) -> usize {
        let k = self.times.partition_point(|&s| s < t);
        if k == 0 {
            0
        } else if k == self.times.len() {
            k - 1
        } else if (self.times[k] - t) < (t - self.times[k - 1]) {
            k
        } else {
            k - 1
        }
    }

    /// Raw spectrum at `t` matched onto `reference` and rephased against `gauge`.
    pub fn aligned_spectrum(
        &self,
        t: T,
        reference: &SpectralDecomposition<T>,
        gauge: &SpectralDecomposition<T>,
    ) -> Result<SpectralDecomposition<T>> {
        let raw = self.raw_spectrum(t)?;
        let (perm, overlap) = match_indices(reference, &raw)?;
        if !(overlap >= T::lit(MIN_TRACKING_OVERLAP)) {
            return Err(Error::TrackingFailure {
                t_from: t.to_f64_lossy(),
                t_to: t.to_f64_lossy(),
                overlap: overlap.to_f64_lossy(),
            });
        }
        let mut aligned = raw.permuted(&perm);
        aligned.fix_phases(gauge);
        Ok(aligned)
    }

    /// Spectrum at an arbitrary `t`, indexed like the path and phased against the nearest grid time.
    pub fn spectrum_at(&self, t: T) -> Result<SpectralDecomposition<T>> {
        let k = self.nearest_index(t);
        if self.times[k] == t {
            return Ok(self.spectra[k].clone());
        }
        let reference = &self.spectra[k];
        self.aligned_spectrum(t, reference, reference)
            .map_err(|e| match e {
                Error::TrackingFailure { overlap, .. } => Error::TrackingFailure {
                    t_from: self.times[k].to_f64_lossy(),
                    t_to: t.to_f64_lossy(),
                    overlap,
                },
                other => other,
            })
    }

    /// Spectrum and derivatives at `t` in the locally fixed gauge.
    pub fn local(&self, t: T) -> Result<LocalSpectrum<T>> {
        let center = self.spectrum_at(t)?;
        let gauge = center.clone();
        self.local_in_gauge(t, center, &gauge)
    }

    /// Derivatives at `t` around `center`, with every stencil point phased against `gauge`.
    /// `center` must already satisfy the gauge condition.
    pub fn local_in_gauge(
        &self,
        t: T,
        center: SpectralDecomposition<T>,
        gauge: &SpectralDecomposition<T>,
    ) -> Result<LocalSpectrum<T>> {
        let (lo, hi) = self.model.t_domain();
        let n = center.len();
        let mut r_dot = vec![CVector::zeros(n); n];
        for (s, w) in bounded_stencil(t, self.options.fd_step, lo, hi) {
            let weight = cr(w);
            if s == t {
                for m in 0..n {
                    r_dot[m] += &center.right[m] * weight;
                }
            } else {
                let sd = self.aligned_spectrum(s, &center, gauge)?;
                for m in 0..n {
                    r_dot[m] += &sd.right[m] * weight;
                }
            }
        }
        Ok(LocalSpectrum {
            time: t,
            generator: self.generator(t)?,
            generator_dot: self.generator_dot(t)?,
            spectrum: center,
            r_dot,
        })
    }
}
