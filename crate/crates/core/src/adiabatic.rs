//! Adiabaticity-violation metrics and the adiabatic propagator of the embedded dynamics.
//!
//! With `|Ψ⟩ = Σ_m c_m e^{−i∫λ_m}|R_m⟩`, the coefficients obey
//! `ċ_m = −⟨L_m|Ṙ_m⟩c_m + c_off,m` where `c_off` collects the couplings to other branches.
//! The adiabatic propagator drops `c_off`; [`exact_frame_propagate`] keeps it.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::PureEmbedding;
use crate::error::{Error, Result};
use crate::model::{DensityMatrix, LindbladModel};
use crate::numerics::eigen::trace_distance;
use crate::numerics::matrix::{self, CMatrix, CVector};
use crate::numerics::ode::{integrate_to_times, IntegratorConfig};
use crate::parallel;
use crate::propagation::{embedded_states, model_hash, Representation, Trajectory, TrajectoryMeta};
use crate::scalar::{abs, cexp, cr, Cx, Real};
use crate::spectral::{
    left_to_matrix, EigenPath, LocalSpectrum, SpectralDecomposition, TrackingOptions,
};
use crate::spin::{spin_model_on, SpinParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaForm {
    /// `|⟨L_n|∂H_T/∂t|R_m⟩| / |λ_m − λ_n|²`.
    GeneratorDerivative,
    /// `|⟨L_n|Ṙ_m⟩| / |λ_m − λ_n|`.
    EigenvectorDerivative,
}

fn check_pair<T: Real>(sd: &SpectralDecomposition<T>, m: usize, n: usize) -> Result<()> {
    let len = sd.len();
    if m >= len || n >= len {
        return Err(Error::InvalidArgument(format!(
            "pair ({m}, {n}) out of range for {len} branches"
        )));
    }
    if m == n {
        return Err(Error::InvalidArgument("Γ_mm is not defined".into()));
    }
    if sd.is_degenerate_pair(m, n) {
        return Err(Error::ExcludedPair { m, n });
    }
    Ok(())
}

/// `⟨L_n|Ṙ_m⟩` at a local spectrum.
pub fn transition_amplitude<T: Real>(local: &LocalSpectrum<T>, m: usize, n: usize) -> Cx<T> {
    local.spectrum.overlap(n, &local.r_dot[m])
}

/// `⟨L_n|∂H_T/∂t|R_m⟩`.
pub fn generator_element<T: Real>(
    spectrum: &SpectralDecomposition<T>,
    generator_dot: &CMatrix<T>,
    m: usize,
    n: usize,
) -> Cx<T> {
    spectrum.overlap(n, &(generator_dot * &spectrum.right[m]))
}

fn gamma_value<T: Real>(
    spectrum: &SpectralDecomposition<T>,
    numerator: Cx<T>,
    m: usize,
    n: usize,
    form: GammaForm,
) -> T {
    let gap = abs(spectrum.values[m] - spectrum.values[n]);
    match form {
        GammaForm::GeneratorDerivative => abs(numerator) / (gap * gap),
        GammaForm::EigenvectorDerivative => abs(numerator) / gap,
    }
}

/// Γ_mn from an already evaluated local spectrum.
pub fn gamma_local<T: Real>(
    local: &LocalSpectrum<T>,
    m: usize,
    n: usize,
    form: GammaForm,
) -> Result<T> {
    check_pair(&local.spectrum, m, n)?;
    let numerator = match form {
        GammaForm::GeneratorDerivative => {
            generator_element(&local.spectrum, &local.generator_dot, m, n)
        }
        GammaForm::EigenvectorDerivative => transition_amplitude(local, m, n),
    };
    Ok(gamma_value(&local.spectrum, numerator, m, n, form))
}

/// Γ_mn at `t`.
pub fn gamma_mn<T: Real>(
    path: &EigenPath<T>,
    t: T,
    m: usize,
    n: usize,
    form: GammaForm,
) -> Result<T> {
    match form {
        GammaForm::GeneratorDerivative => {
            let sd = path.spectrum_at(t)?;
            check_pair(&sd, m, n)?;
            let numerator = generator_element(&sd, &path.generator_dot(t)?, m, n);
            Ok(gamma_value(&sd, numerator, m, n, form))
        }
        GammaForm::EigenvectorDerivative => gamma_local(&path.local(t)?, m, n, form),
    }
}

/// `Tr(Λ_n · ρ̇_m)` with `ρ̇_m` the reshaped `Ṙ_m` and `Λ_n` the matrix form of `⟨L_n|`;
/// equals `⟨L_n|Ṙ_m⟩`. The diagonal `m = n` is allowed.
pub fn gamma_trace_form<T: Real>(path: &EigenPath<T>, t: T, m: usize, n: usize) -> Result<Cx<T>> {
    let local = path.local(t)?;
    trace_form_local(&local, m, n)
}

pub fn trace_form_local<T: Real>(local: &LocalSpectrum<T>, m: usize, n: usize) -> Result<Cx<T>> {
    let sd = &local.spectrum;
    if m >= sd.len() || n >= sd.len() {
        return Err(Error::InvalidArgument(format!(
            "pair ({m}, {n}) out of range"
        )));
    }
    if m != n && sd.is_degenerate_pair(m, n) {
        return Err(Error::ExcludedPair { m, n });
    }
    let lambda = left_to_matrix(&sd.left[n])?;
    let rho_dot = matrix::unvec_row_major(&local.r_dot[m])?;
    Ok((lambda * rho_dot).trace())
}

/// Γ_mn for all ordered pairs at one time; diagonal and degenerate pairs carry no value.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMatrix<T: Real> {
    pub time: T,
    pub dim: usize,
    entries: Vec<Option<T>>,
    pub excluded_pairs: Vec<(usize, usize)>,
}

impl<T: Real> GammaMatrix<T> {
    pub fn get(&self, m: usize, n: usize) -> Option<T> {
        self.entries[m * self.dim + n]
    }

    /// Largest Γ_mn over non-excluded pairs, first in row-major order on ties.
    pub fn max(&self) -> Result<(T, (usize, usize))> {
        let mut best: Option<(T, (usize, usize))> = None;
        for m in 0..self.dim {
            for n in 0..self.dim {
                if let Some(v) = self.get(m, n) {
                    if best.is_none_or(|(b, _)| v > b) {
                        best = Some((v, (m, n)));
                    }
                }
            }
        }
        best.ok_or_else(|| Error::Degenerate("every pair is excluded".into()))
    }
}

fn gamma_matrix_from<T: Real>(
    time: T,
    sd: &SpectralDecomposition<T>,
    numerator: impl Fn(usize, usize) -> Cx<T>,
    form: GammaForm,
) -> Result<GammaMatrix<T>> {
    let dim = sd.len();
    let mut entries = vec![None; dim * dim];
    let mut excluded_pairs = Vec::new();
    for m in 0..dim {
        for n in 0..dim {
            if m == n {
                continue;
            }
            if sd.is_degenerate_pair(m, n) {
                excluded_pairs.push((m, n));
                continue;
            }
            let v = gamma_value(sd, numerator(m, n), m, n, form);
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("Γ_{m}{n} at t = {time}")));
            }
            entries[m * dim + n] = Some(v);
        }
    }
    Ok(GammaMatrix {
        time,
        dim,
        entries,
        excluded_pairs,
    })
}

pub fn gamma_matrix<T: Real>(path: &EigenPath<T>, t: T, form: GammaForm) -> Result<GammaMatrix<T>> {
    match form {
        GammaForm::GeneratorDerivative => {
            let sd = path.spectrum_at(t)?;
            let hd = path.generator_dot(t)?;
            gamma_matrix_from(t, &sd, |m, n| generator_element(&sd, &hd, m, n), form)
        }
        GammaForm::EigenvectorDerivative => {
            let local = path.local(t)?;
            gamma_matrix_from(
                t,
                &local.spectrum,
                |m, n| transition_amplitude(&local, m, n),
                form,
            )
        }
    }
}

/// `max_{m≠n} Γ_mn` with the achieving `(m, n)`.
pub fn gamma_max<T: Real>(
    path: &EigenPath<T>,
    t: T,
    form: GammaForm,
) -> Result<(T, (usize, usize))> {
    gamma_matrix(path, t, form)?.max()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions<T> {
    /// Evaluation time; Γ of the spin model does not depend on it.
    pub t_eval: T,
    pub form: GammaForm,
    pub degeneracy_rel_tol: T,
    pub fd_step: T,
}

impl<T: Real> Default for SweepOptions<T> {
    fn default() -> Self {
        let tracking = TrackingOptions::<T>::default();
        Self {
            t_eval: T::zero(),
            form: GammaForm::GeneratorDerivative,
            degeneracy_rel_tol: tracking.degeneracy_rel_tol,
            fd_step: tracking.fd_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint<T> {
    pub gamma: T,
    pub omega: T,
    /// `None` exactly when `exclusion` is set.
    pub value: Option<T>,
    pub pair: Option<(usize, usize)>,
    pub exclusion: Option<String>,
}

/// Γ(γ, ω) on a grid, stored γ-major: point `(i, j)` sits at `i·len(ω) + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub theta: T,
    pub gammas: Vec<T>,
    pub omegas: Vec<T>,
    pub options: SweepOptions<T>,
    pub points: Vec<SweepPoint<T>>,
}

#[derive(Serialize, Deserialize)]
struct SweepSidecar {
    theta: f64,
    t_eval: f64,
    form: GammaForm,
    gammas: Vec<f64>,
    omegas: Vec<f64>,
    degeneracy_rel_tol: f64,
    fd_step: f64,
    exclusions: Vec<SweepExclusion>,
    version: String,
}

#[derive(Serialize, Deserialize)]
struct SweepExclusion {
    gamma: f64,
    omega: f64,
    reason: String,
}

impl<T: Real> SweepResult<T> {
    pub fn point(&self, i: usize, j: usize) -> &SweepPoint<T> {
        &self.points[i * self.omegas.len() + j]
    }

    /// Γ values of row `i` (fixed γ), `None` for excluded points.
    pub fn row(&self, i: usize) -> Vec<Option<T>> {
        (0..self.omegas.len())
            .map(|j| self.point(i, j).value)
            .collect()
    }

    /// Γ values of column `j` (fixed ω).
    pub fn column(&self, j: usize) -> Vec<Option<T>> {
        (0..self.gammas.len())
            .map(|i| self.point(i, j).value)
            .collect()
    }

    pub fn excluded_count(&self) -> usize {
        self.points.iter().filter(|p| p.exclusion.is_some()).count()
    }

    /// Header `gamma,omega,Gamma,arg_m,arg_n,excluded`; excluded rows have `Gamma = NaN`
    /// and empty pair columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gamma,omega,Gamma,arg_m,arg_n,excluded\n");
        for p in &self.points {
            let _ = write!(
                out,
                "{:.16e},{:.16e},",
                p.gamma.to_f64_lossy(),
                p.omega.to_f64_lossy()
            );
            match (p.value, p.pair) {
                (Some(v), Some((m, n))) => {
                    let _ = writeln!(out, "{:.16e},{m},{n},0", v.to_f64_lossy());
                }
                _ => out.push_str("NaN,,,1\n"),
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let f = |x: &T| x.to_f64_lossy();
        let sidecar = SweepSidecar {
            theta: self.theta.to_f64_lossy(),
            t_eval: self.options.t_eval.to_f64_lossy(),
            form: self.options.form,
            gammas: self.gammas.iter().map(f).collect(),
            omegas: self.omegas.iter().map(f).collect(),
            degeneracy_rel_tol: self.options.degeneracy_rel_tol.to_f64_lossy(),
            fd_step: self.options.fd_step.to_f64_lossy(),
            exclusions: self
                .points
                .iter()
                .filter_map(|p| {
                    p.exclusion.as_ref().map(|r| SweepExclusion {
                        gamma: p.gamma.to_f64_lossy(),
                        omega: p.omega.to_f64_lossy(),
                        reason: r.clone(),
                    })
                })
                .collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        Ok(serde_json::to_string_pretty(&sidecar)?)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_csv())?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json()?)?)
    }
}

fn sweep_point<T: Real>(
    theta: T,
    gamma: T,
    omega: T,
    options: &SweepOptions<T>,
) -> Result<SweepPoint<T>> {
    let excluded = |reason: String| SweepPoint {
        gamma,
        omega,
        value: None,
        pair: None,
        exclusion: Some(reason),
    };
    let params = SpinParams::new(gamma, omega, theta)?;
    let horizon = params
        .default_horizon()
        .max(options.t_eval + options.fd_step * T::lit(4.0));
    let model = spin_model_on(&params, (T::zero(), horizon))?;
    let tracking = TrackingOptions {
        degeneracy_rel_tol: options.degeneracy_rel_tol,
        fd_step: options.fd_step,
        source: None,
        generator_derivative: None,
    };
    let path = match EigenPath::single(&model, options.t_eval, tracking) {
        Ok(p) => p,
        Err(e) if e.is_degeneracy() => return Ok(excluded(e.to_string())),
        Err(e) => return Err(e),
    };
    if path.spectra()[0].any_degenerate() {
        return Ok(excluded("degenerate spectrum".into()));
    }
    match gamma_max(&path, options.t_eval, options.form) {
        Ok((v, pair)) => Ok(SweepPoint {
            gamma,
            omega,
            value: Some(v),
            pair: Some(pair),
            exclusion: None,
        }),
        Err(e) if e.is_degeneracy() => Ok(excluded(e.to_string())),
        Err(e) => Err(e),
    }
}

/// Γ(γ, ω) of the spin model at polar angle `theta`.
///
/// Points whose spectrum has any degenerate pair (for instance `γ = 0`) are recorded as
/// exclusions. Points run on the shared pool; the result order is the grid order.
pub fn gamma_sweep<T: Real>(
    theta: T,
    gammas: &[T],
    omegas: &[T],
    options: &SweepOptions<T>,
) -> Result<SweepResult<T>> {
    if gammas.is_empty() || omegas.is_empty() {
        return Err(Error::InvalidArgument(
            "sweep grids must be non-empty".into(),
        ));
    }
    if gammas.iter().any(|g| !(*g >= T::zero() && g.is_finite())) {
        return Err(Error::InvalidArgument(
            "sweep γ values must be finite and >= 0".into(),
        ));
    }
    if omegas.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidArgument(
            "sweep ω values must be finite".into(),
        ));
    }
    if !(options.t_eval >= T::zero()) {
        return Err(Error::InvalidArgument(
            "sweep evaluation time must be >= 0".into(),
        ));
    }
    let nw = omegas.len();
    let points = parallel::pool()?.install(|| {
        (0..gammas.len() * nw)
            .into_par_iter()
            .map(|k| sweep_point(theta, gammas[k / nw], omegas[k % nw], options))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepResult {
        theta,
        gammas: gammas.to_vec(),
        omegas: omegas.to_vec(),
        options: *options,
        points,
    })
}

/// Grid indices of `t0` and `t1`, which must be nodes of the path grid.
fn node_range<T: Real>(path: &EigenPath<T>, t0: T, t1: T) -> Result<(usize, usize)> {
    let times = path.times();
    let find = |t: T| {
        let k = path.nearest_index(t);
        let tol = T::lit(1e-12) * T::one().max(t.abs());
        if (times[k] - t).abs() <= tol {
            Ok(k)
        } else {
            Err(Error::InvalidArgument(format!(
                "time {t} is not a node of the eigenpath grid"
            )))
        }
    };
    let (i0, i1) = (find(t0)?, find(t1)?);
    if i1 <= i0 {
        return Err(Error::InvalidArgument(
            "adiabatic propagation needs t1 > t0".into(),
        ));
    }
    Ok((i0, i1))
}

/// Coefficients of the adiabatic expansion at the path nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticCoefficients<T> {
    pub times: Vec<T>,
    /// `c_m(t) = c_m(t0)·exp(−∫⟨L_m|Ṙ_m⟩)` per node and branch.
    pub c: Vec<Vec<Cx<T>>>,
    /// `∫_{t0}^{t} λ_m dτ` per node and branch.
    pub dynamical_phases: Vec<Vec<Cx<T>>>,
}

#[derive(Debug, Clone)]
pub struct AdiabaticTrajectory<T: Real> {
    pub coefficients: AdiabaticCoefficients<T>,
    pub states: Vec<PureEmbedding<T>>,
}

impl<T: Real> AdiabaticTrajectory<T> {
    pub fn times(&self) -> &[T] {
        &self.coefficients.times
    }

    /// Extracted (not necessarily physical) density matrices.
    pub fn to_trajectory(&self, model: &LindbladModel<T>) -> Result<Trajectory<T>> {
        Ok(Trajectory {
            times: self.times().to_vec(),
            states: self
                .states
                .iter()
                .map(|s| matrix::unvec_row_major(s.vector()))
                .collect::<Result<_>>()?,
            meta: TrajectoryMeta {
                representation: Representation::Adiabatic,
                rel_tol: f64::NAN,
                abs_tol: f64::NAN,
                max_step: f64::NAN,
                model_hash: model_hash(model)?,
            },
        })
    }
}

/// Local spectra at both ends of segment `i`, in the gauge of `spectra[i]`.
///
/// Tracked vectors at `t_{i+1}` already satisfy that gauge, so values at nodes are
/// continuous across segments.
fn segment_ends<T: Real>(
    path: &EigenPath<T>,
    i: usize,
) -> Result<(LocalSpectrum<T>, LocalSpectrum<T>)> {
    let spectra = path.spectra();
    let times = path.times();
    let gauge = &spectra[i];
    let a = path.local_in_gauge(times[i], spectra[i].clone(), gauge)?;
    let b = path.local_in_gauge(times[i + 1], spectra[i + 1].clone(), gauge)?;
    Ok((a, b))
}

/// `Σ_m c_m(t0)·exp(−∫⟨L_m|Ṙ_m⟩)·e^{−i∫λ_m}·R_m(t)` at each path node in `[t0, t1]`,
/// integrals by the trapezoid rule on the path grid.
///
/// `t0` and `t1` must be nodes of the path grid.
pub fn adiabatic_propagate<T: Real>(
    path: &EigenPath<T>,
    psi0: &PureEmbedding<T>,
    t0: T,
    t1: T,
) -> Result<AdiabaticTrajectory<T>> {
    let (i0, i1) = node_range(path, t0, t1)?;
    let n = path.len();
    if psi0.vector().len() != n {
        return Err(Error::dim(
            "adiabatic initial state",
            n,
            psi0.vector().len(),
        ));
    }
    let spectra = path.spectra();
    let times = path.times();
    let c0: Vec<Cx<T>> = (0..n)
        .map(|m| spectra[i0].overlap(m, psi0.vector()))
        .collect();
    let mut geometric = vec![cr(T::zero()); n];
    let mut dynamical = vec![cr(T::zero()); n];
    let mut out = AdiabaticCoefficients {
        times: vec![times[i0]],
        c: vec![c0.clone()],
        dynamical_phases: vec![dynamical.clone()],
    };
    let minus_i = Cx::new(T::zero(), -T::one());
    let state = |k: usize, c: &[Cx<T>], d: &[Cx<T>]| -> Result<PureEmbedding<T>> {
        let mut v = CVector::zeros(n);
        for m in 0..n {
            v += &spectra[k].right[m] * (c[m] * cexp(minus_i * d[m]));
        }
        PureEmbedding::from_vector(v)
    };
    let mut states = vec![state(i0, &c0, &dynamical)?];
    let half = cr(T::lit(0.5));
    for i in i0..i1 {
        let (a, b) = segment_ends(path, i)?;
        let h = cr(times[i + 1] - times[i]);
        for m in 0..n {
            let ga = a.spectrum.overlap(m, &a.r_dot[m]);
            let gb = b.spectrum.overlap(m, &b.r_dot[m]);
            geometric[m] += (ga + gb) * h * half;
            dynamical[m] += (spectra[i].values[m] + spectra[i + 1].values[m]) * h * half;
        }
        let c: Vec<Cx<T>> = (0..n).map(|m| c0[m] * cexp(-geometric[m])).collect();
        states.push(state(i + 1, &c, &dynamical)?);
        out.times.push(times[i + 1]);
        out.c.push(c);
        out.dynamical_phases.push(dynamical.clone());
    }
    Ok(AdiabaticTrajectory {
        coefficients: out,
        states,
    })
}

/// Exact dynamics in the moving biorthogonal frame.
#[derive(Debug, Clone)]
pub struct FrameTrajectory<T: Real> {
    pub times: Vec<T>,
    /// `a_m = ⟨L_m|Ψ⟩` at each node.
    pub amplitudes: Vec<Vec<Cx<T>>>,
    pub states: Vec<PureEmbedding<T>>,
}

/// Eigenvalues and `K_km = ⟨L_k|Ṙ_m⟩` at `s`, with `R_m` unit-normed and `⟨L_m^gauge|R_m⟩ > 0`.
///
/// With an analytic `Ḣ_T` and no degenerate pair, `K` is exact: off-diagonal entries are
/// `⟨L_k|Ḣ_T|R_m⟩/(λ_m − λ_k)` and the diagonal follows from differentiating the two gauge
/// conditions. Otherwise eigenvectors are differenced, which leaves roundoff/h noise.
fn frame_coupling<T: Real>(
    path: &EigenPath<T>,
    s: T,
    center: SpectralDecomposition<T>,
    gauge: &SpectralDecomposition<T>,
) -> Result<(Vec<Cx<T>>, CMatrix<T>)> {
    let n = center.len();
    let h_dot = match path.analytic_generator_dot(s)? {
        Some(d) if !center.any_degenerate() => d,
        _ => {
            let local = path.local_in_gauge(s, center, gauge)?;
            let sd = &local.spectrum;
            let k = CMatrix::from_fn(n, n, |k, m| sd.overlap(k, &local.r_dot[m]));
            return Ok((local.spectrum.values, k));
        }
    };
    let sd = &center;
    let mut k = CMatrix::from_fn(n, n, |a, m| {
        if a == m {
            cr(T::zero())
        } else {
            sd.overlap(a, &(&h_dot * &sd.right[m])) / (sd.values[m] - sd.values[a])
        }
    });
    for m in 0..n {
        let (mut s1, mut s2) = (cr(T::zero()), cr(T::zero()));
        for a in (0..n).filter(|&a| a != m) {
            s1 += k[(a, m)] * sd.right[m].dotc(&sd.right[a]);
            s2 += k[(a, m)] * gauge.overlap(m, &sd.right[a]);
        }
        let p = gauge.overlap(m, &sd.right[m]).re;
        k[(m, m)] = Cx::new(-s1.re / sd.right[m].norm_squared(), -s2.im / p);
    }
    Ok((sd.values.clone(), k))
}

/// Integrates `ȧ_k = −iλ_k a_k − Σ_m ⟨L_k|Ṙ_m⟩ a_m` for `a_k = ⟨L_k|Ψ⟩`, which is the
/// coefficient equation with the off-diagonal coupling `c_off` retained.
///
/// Each path segment is integrated in its own gauge; `t0` and `t1` must be path nodes.
pub fn exact_frame_propagate<T: Real>(
    path: &EigenPath<T>,
    psi0: &PureEmbedding<T>,
    t0: T,
    t1: T,
    cfg: &IntegratorConfig<T>,
) -> Result<FrameTrajectory<T>> {
    let (i0, i1) = node_range(path, t0, t1)?;
    let n = path.len();
    if psi0.vector().len() != n {
        return Err(Error::dim("frame initial state", n, psi0.vector().len()));
    }
    let spectra = path.spectra();
    let times = path.times();
    let mut a = CVector::from_iterator(n, (0..n).map(|m| spectra[i0].overlap(m, psi0.vector())));
    let frame_state = |k: usize, a: &CVector<T>| -> Result<PureEmbedding<T>> {
        PureEmbedding::from_vector(spectra[k].right_matrix() * a)
    };
    let mut out = FrameTrajectory {
        times: vec![times[i0]],
        amplitudes: vec![a.iter().copied().collect()],
        states: vec![frame_state(i0, &a)?],
    };
    let minus_i = Cx::new(T::zero(), -T::one());
    for i in i0..i1 {
        let gauge = &spectra[i];
        let rhs = |s: T, y: &CVector<T>| -> Result<CVector<T>> {
            let center = if s == times[i] {
                spectra[i].clone()
            } else if s == times[i + 1] {
                spectra[i + 1].clone()
            } else {
                path.aligned_spectrum(s, gauge, gauge)?
            };
            let (values, coupling) = frame_coupling(path, s, center, gauge)?;
            Ok(CVector::from_fn(n, |k, _| {
                let mut v = minus_i * values[k] * y[k];
                for m in 0..n {
                    v -= coupling[(k, m)] * y[m];
                }
                v
            }))
        };
        let seg = integrate_to_times(rhs, &a, &[times[i], times[i + 1]], cfg)?;
        a = seg[1].clone();
        out.times.push(times[i + 1]);
        out.amplitudes.push(a.iter().copied().collect());
        out.states.push(frame_state(i + 1, &a)?);
    }
    Ok(out)
}

/// Exact and adiabatic runs from the same start, compared at the final node.
#[derive(Debug, Clone)]
pub struct AdiabaticErrorReport<T: Real> {
    pub times: Vec<T>,
    /// `½‖ρ_exact − ρ_adiabatic‖₁` at the last time.
    pub trace_distance: T,
    /// Same distance at every node.
    pub distance_history: Vec<T>,
    /// `|⟨L_m|Ψ_exact⟩|` per node and branch.
    pub exact_amplitudes: Vec<Vec<T>>,
    /// `|⟨L_m|Ψ_adiabatic⟩|` per node and branch.
    pub adiabatic_amplitudes: Vec<Vec<T>>,
}

/// Runs the exact embedded integration and [`adiabatic_propagate`] from `rho0` at the model's
/// start time to `t1` on `nodes` uniform path nodes.
pub fn adiabatic_error<T: Real>(
    model: &LindbladModel<T>,
    rho0: &DensityMatrix<T>,
    t1: T,
    nodes: usize,
    tracking: TrackingOptions<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<AdiabaticErrorReport<T>> {
    let t0 = model.t_domain().0;
    let grid = crate::propagation::uniform_times(t0, t1, nodes)?;
    let path = EigenPath::track(model, &grid, tracking)?;
    let psi0 = crate::embed::embed_density(rho0);
    let adiabatic = adiabatic_propagate(&path, &psi0, t0, t1)?;
    let exact = embedded_states(model, psi0.vector(), &grid, cfg)?;
    let mut distance_history = Vec::with_capacity(grid.len());
    let mut exact_amplitudes = Vec::with_capacity(grid.len());
    let mut adiabatic_amplitudes = Vec::with_capacity(grid.len());
    for (k, (ex, ad)) in exact.iter().zip(&adiabatic.states).enumerate() {
        let rho_ex = matrix::unvec_row_major(ex)?;
        let rho_ad = matrix::unvec_row_major(ad.vector())?;
        distance_history.push(trace_distance(&rho_ex, &rho_ad)?);
        let sd = &path.spectra()[k];
        exact_amplitudes.push((0..sd.len()).map(|m| abs(sd.overlap(m, ex))).collect());
        adiabatic_amplitudes.push(
            (0..sd.len())
                .map(|m| abs(sd.overlap(m, ad.vector())))
                .collect(),
        );
    }
    Ok(AdiabaticErrorReport {
        times: grid,
        trace_distance: *distance_history.last().unwrap(),
        distance_history,
        exact_amplitudes,
        adiabatic_amplitudes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::embed_density;
    use crate::model::{Builtin, OperatorSchedule};
    use crate::random;
    use crate::spin::spin_model;
    use std::f64::consts::{FRAC_PI_4, PI};

    const FD_NOISE_FLOOR: f64 = 1e-8;

    fn grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
        crate::propagation::uniform_times(t0, t1, n + 1).unwrap()
    }

    fn spin_path(gamma: f64, omega: f64, theta: f64, t: f64) -> EigenPath<f64> {
        let p = SpinParams::new(gamma, omega, theta).unwrap();
        EigenPath::single(&spin_model(&p).unwrap(), t, TrackingOptions::default()).unwrap()
    }

    #[test]
    fn static_model_has_zero_gamma() {
        let m = random::static_model::<f64, _>(&mut random::rng(1), 2, 1, (0.0, 1.0)).unwrap();
        let path = EigenPath::single(&m, 0.5, TrackingOptions::default()).unwrap();
        for form in [
            GammaForm::GeneratorDerivative,
            GammaForm::EigenvectorDerivative,
        ] {
            let (v, _) = gamma_max(&path, 0.5, form).unwrap();
            assert!(v < 1e-9, "{v}");
        }
        assert!(gamma_trace_form(&path, 0.5, 0, 1).unwrap().norm() < 1e-9);
    }

    #[test]
    fn forms_agree_on_spin_model() {
        let path = spin_path(0.6, 0.3, 1.0, 2.0);
        for m in 0..4 {
            for n in 0..4 {
                if m == n {
                    continue;
                }
                let g1 = gamma_mn(&path, 2.0, m, n, GammaForm::GeneratorDerivative).unwrap();
                let g2 = gamma_mn(&path, 2.0, m, n, GammaForm::EigenvectorDerivative).unwrap();
                // structurally zero pairs sit at the difference-quotient noise floor
                assert!(
                    (g1 - g2).abs() <= 1e-4 * g1 + FD_NOISE_FLOOR,
                    "{m}{n}: {g1} {g2}"
                );
                let local = path.local(2.0).unwrap();
                let tr = trace_form_local(&local, m, n).unwrap();
                assert!((tr - transition_amplitude(&local, m, n)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gamma_is_linear_in_omega_and_time_independent() {
        let (g, th) = (1.0, FRAC_PI_4);
        let base = gamma_max(
            &spin_path(g, 0.1, th, 0.0),
            0.0,
            GammaForm::GeneratorDerivative,
        )
        .unwrap()
        .0;
        let double = gamma_max(
            &spin_path(g, 0.2, th, 0.0),
            0.0,
            GammaForm::GeneratorDerivative,
        )
        .unwrap()
        .0;
        assert!((double / base - 2.0).abs() < 1e-6);
        for t in [1.0, 7.5, 30.0] {
            let v = gamma_max(&spin_path(g, 0.1, th, t), t, GammaForm::GeneratorDerivative)
                .unwrap()
                .0;
            assert!((v - base).abs() < 1e-10 * base);
        }
    }

    #[test]
    fn invalid_and_degenerate_pairs_are_reported() {
        let path = spin_path(0.6, 0.3, 1.0, 0.0);
        assert!(matches!(
            gamma_mn(&path, 0.0, 1, 1, GammaForm::GeneratorDerivative),
            Err(Error::InvalidArgument(_))
        ));
        let closed = spin_path(0.0, 0.3, 1.0, 0.0);
        let gm = gamma_matrix(&closed, 0.0, GammaForm::GeneratorDerivative).unwrap();
        assert!(!gm.excluded_pairs.is_empty());
        for &(m, n) in &gm.excluded_pairs {
            assert!(gm.get(m, n).is_none());
            assert!(matches!(
                gamma_mn(&closed, 0.0, m, n, GammaForm::GeneratorDerivative),
                Err(Error::ExcludedPair { .. })
            ));
        }
    }

    #[test]
    fn rephasing_leaves_gamma_unchanged_but_rescaling_does_not() {
        let path = spin_path(0.7, 0.25, 0.8, 0.0);
        let mut local = path.local(0.0).unwrap();
        let before = gamma_local(&local, 1, 2, GammaForm::EigenvectorDerivative).unwrap();
        let alpha = Cx::from_polar(1.0, 0.9);
        local.spectrum.right[1] *= alpha;
        local.r_dot[1] *= alpha;
        local.spectrum.left[1] /= alpha;
        let rephased = gamma_local(&local, 1, 2, GammaForm::EigenvectorDerivative).unwrap();
        assert!((rephased - before).abs() < 1e-12 * before);
        // a modulus change of R_m scales Γ_mn by that modulus
        let scale = 3.0;
        local.spectrum.right[1] *= cr(scale);
        local.r_dot[1] *= cr(scale);
        local.spectrum.left[1] /= cr(scale);
        let rescaled = gamma_local(&local, 1, 2, GammaForm::EigenvectorDerivative).unwrap();
        assert!((rescaled / before - scale).abs() < 1e-10);
    }

    #[test]
    fn sweep_records_exclusions_and_zero_column() {
        let gammas = [0.0, 0.5, 2.0];
        let omegas = [0.0, 0.1, 0.2];
        let r = gamma_sweep(FRAC_PI_4, &gammas, &omegas, &SweepOptions::default()).unwrap();
        assert_eq!(r.points.len(), 9);
        for j in 0..3 {
            assert!(r.point(0, j).exclusion.is_some());
        }
        for i in 1..3 {
            assert_eq!(r.point(i, 0).value, Some(0.0));
            let row = r.row(i);
            assert!((row[2].unwrap() / row[1].unwrap() - 2.0).abs() < 1e-9);
        }
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "gamma,omega,Gamma,arg_m,arg_n,excluded");
        assert!(lines[1].ends_with("NaN,,,1"));
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["exclusions"].as_array().unwrap().len(), 3);
        assert!(gamma_sweep(FRAC_PI_4, &[], &omegas, &SweepOptions::default()).is_err());
    }

    #[test]
    fn stationary_eigenvector_of_static_model_only_picks_up_its_phase() {
        let m = random::static_model::<f64, _>(&mut random::rng(9), 2, 1, (0.0, 3.0)).unwrap();
        let path = EigenPath::track(&m, &grid(0.0, 3.0, 30), TrackingOptions::default()).unwrap();
        let k = 2;
        let r = path.spectra()[0].right[k].clone();
        let lam = path.spectra()[0].values[k];
        let psi0 = PureEmbedding::from_vector(r.clone()).unwrap();
        let traj = adiabatic_propagate(&path, &psi0, 0.0, 3.0).unwrap();
        for (t, s) in traj.times().iter().zip(&traj.states) {
            let expect = &r * (Cx::new(0.0, -t) * lam).exp();
            // Ṙ is a difference of rephased copies, so it vanishes only to roundoff/h
            assert!((s.vector() - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn frame_propagation_with_coupling_reproduces_exact_dynamics() {
        let mut rng = random::rng(4);
        let m = random::model::<f64, _>(&mut rng, 2, 1, (0.0, 3.0)).unwrap();
        let rho0 = random::density(&mut rng, 2);
        let g = grid(0.0, 3.0, 60);
        let path = EigenPath::track(&m, &g, TrackingOptions::default()).unwrap();
        let psi0 = embed_density(&rho0);
        let cfg = IntegratorConfig::with_tolerances(1e-10, 1e-12);
        let frame = exact_frame_propagate(&path, &psi0, 0.0, 3.0, &cfg).unwrap();
        let exact = embedded_states(&m, psi0.vector(), &g, &cfg).unwrap();
        for (a, b) in frame.states.iter().zip(&exact) {
            assert!((a.vector() - b).norm() < 1e-6);
        }
    }

    #[test]
    fn exact_coupling_matches_differenced_eigenvectors() {
        let m = random::model::<f64, _>(&mut random::rng(12), 3, 2, (0.0, 3.0)).unwrap();
        let path = EigenPath::track(&m, &grid(0.0, 3.0, 30), TrackingOptions::default()).unwrap();
        let gauge = &path.spectra()[7];
        let s = 0.5 * (path.times()[7] + path.times()[8]);
        let center = path.aligned_spectrum(s, gauge, gauge).unwrap();
        let (_, exact) = frame_coupling(&path, s, center.clone(), gauge).unwrap();
        let local = path.local_in_gauge(s, center, gauge).unwrap();
        let sd = &local.spectrum;
        for k in 0..9 {
            for j in 0..9 {
                assert!(
                    (exact[(k, j)] - sd.overlap(k, &local.r_dot[j])).norm() < 1e-6,
                    "{k}{j}"
                );
            }
        }
    }

    #[test]
    fn closed_two_level_adiabatic_error_matches_state_vector_picture() {
        // parallel-transported eigenvector of the rotating field, compared with the exact state
        let omega = 0.05;
        let t1 = 20.0;
        let theta = 1.0;
        let h = OperatorSchedule::builtin(Builtin::RotatingFieldSpin {
            theta,
            omega,
            phi0: 0.0,
            b0: 1.0,
        });
        let m = LindbladModel::new(h, vec![], (0.0, t1)).unwrap();
        let (_, v) = crate::numerics::hermitian_eigen(&m.hamiltonian_at(0.0).unwrap()).unwrap();
        let ground = v.column(0).into_owned();
        let rho0 = DensityMatrix::pure(&ground).unwrap();
        let cfg = IntegratorConfig::with_tolerances(1e-11, 1e-13);
        let report = adiabatic_error(&m, &rho0, t1, 801, TrackingOptions::default(), &cfg).unwrap();

        let times = report.times.clone();
        let exact = crate::numerics::integrate_to_times(
            |t, y: &CVector<f64>| Ok(m.hamiltonian_at(t)? * y * Cx::new(0.0, -1.0)),
            &ground,
            &times,
            &cfg,
        )
        .unwrap();
        // ground state at t: (−sin(θ/2) e^{iφ}, cos(θ/2))·… up to phase; adiabatic ρ is its projector
        let phi = omega * t1;
        let g_t = CVector::from_vec(vec![
            Cx::new((theta / 2.0).cos(), 0.0),
            Cx::from_polar(-(theta / 2.0).sin(), -phi),
        ]);
        let proj = |v: &CVector<f64>| v * v.adjoint();
        let want = trace_distance(&proj(&exact[exact.len() - 1]), &proj(&g_t)).unwrap();
        assert!(
            (report.trace_distance - want).abs() < 1e-6,
            "{} {}",
            report.trace_distance,
            want
        );
    }

    #[test]
    fn adiabatic_error_shrinks_with_slower_driving() {
        let errs: Vec<f64> = [0.2, 0.02]
            .iter()
            .map(|&w| {
                let p = SpinParams::new(0.5, w, FRAC_PI_4).unwrap();
                let m = spin_model_on(&p, (0.0, 2.0 * PI / 0.2)).unwrap();
                let path = EigenPath::single(&m, 0.0, TrackingOptions::default()).unwrap();
                let stationary = crate::spectral::eigenstate_to_density(
                    &path.spectra()[0].right[stationary_index(&path)],
                )
                .unwrap();
                let rho0 = DensityMatrix::new(&stationary / stationary.trace()).unwrap();
                let cfg = IntegratorConfig::with_tolerances(1e-10, 1e-12);
                adiabatic_error(
                    &m,
                    &rho0,
                    2.0 * PI / 0.2,
                    201,
                    TrackingOptions::default(),
                    &cfg,
                )
                .unwrap()
                .trace_distance
            })
            .collect();
        assert!(errs[1] < errs[0], "{errs:?}");
    }

    fn stationary_index(path: &EigenPath<f64>) -> usize {
        let v = &path.spectra()[0].values;
        (0..v.len())
            .min_by(|&a, &b| v[a].norm().partial_cmp(&v[b].norm()).unwrap())
            .unwrap()
    }
}
