//! Exact propagators in both representations: the master equation on `ρ` and the
//! Schrödinger-like equation `i ∂Ψ/∂t = H_T Ψ` on the embedded vector.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::embed::build_effective_hamiltonian;
use crate::error::{Error, Result};
use crate::model::io::{matrix_to_literal, model_to_json, MatrixLiteral};
use crate::model::{master_rhs, DensityMatrix, LindbladModel};
use crate::numerics::eigen::{min_hermitian_eigenvalue, trace_distance};
use crate::numerics::matrix::{self, CMatrix, CVector};
use crate::numerics::ode::{integrate_to_times, IntegratorConfig};
use crate::parallel;
use crate::scalar::{abs, cr, Cx, Real};

pub const DEFAULT_SAMPLES: usize = 200;
/// Largest `|Tr ρ − 1|` accepted on an exact trajectory.
pub const TRACE_DRIFT_TOL: f64 = 1e-8;
/// Most negative eigenvalue accepted on an exact trajectory.
pub const POSITIVITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Master,
    Embedded,
    Adiabatic,
    Rotated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig<T> {
    pub integrator: IntegratorConfig<T>,
    /// Number of uniformly spaced stored states, endpoints included.
    pub samples: usize,
}

impl<T: Real> Default for PropagationConfig<T> {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            samples: DEFAULT_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub representation: Representation,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// SHA-256 of the model's JSON description.
    pub model_hash: String,
}

/// Stored states of one propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<CMatrix<T>>,
    pub meta: TrajectoryMeta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport<T> {
    pub max_trace_drift: T,
    pub min_eigenvalue: T,
}

#[derive(Serialize, Deserialize)]
struct TrajectoryFile {
    meta: TrajectoryMeta,
    times: Vec<f64>,
    states: Vec<MatrixLiteral>,
}

pub fn model_hash<T: Real>(model: &LindbladModel<T>) -> Result<String> {
    let json = model_to_json(model)?;
    let digest = Sha256::digest(json.as_bytes());
    Ok(digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    }))
}

/// `n` evenly spaced times on `[t0, t1]`.
pub fn uniform_times<T: Real>(t0: T, t1: T, n: usize) -> Result<Vec<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "need at least two sample times".into(),
        ));
    }
    if !(t1 > t0) {
        return Err(Error::InvalidArgument(
            "sample interval must satisfy t1 > t0".into(),
        ));
    }
    let last = T::from_usize(n - 1).unwrap();
    Ok((0..n)
        .map(|k| {
            if k == n - 1 {
                t1
            } else {
                t0 + (t1 - t0) * T::from_usize(k).unwrap() / last
            }
        })
        .collect())
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &CMatrix<T> {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn purities(&self) -> Vec<T> {
        self.states.iter().map(matrix::purity).collect()
    }

    pub fn invariants(&self) -> Result<InvariantReport<T>> {
        let mut drift = T::zero();
        let mut floor = T::INFINITY;
        for s in &self.states {
            drift = drift.max(abs(s.trace() - cr(T::one())));
            floor = floor.min(min_hermitian_eigenvalue(s)?);
        }
        Ok(InvariantReport {
            max_trace_drift: drift,
            min_eigenvalue: floor,
        })
    }

    /// Fails when trace drift or negativity exceed [`TRACE_DRIFT_TOL`] / [`POSITIVITY_TOL`].
    pub fn check_invariants(&self) -> Result<InvariantReport<T>> {
        let r = self.invariants()?;
        if !(r.max_trace_drift <= T::lit(TRACE_DRIFT_TOL)) {
            return Err(Error::Invariant(format!(
                "trace drift {:e} along trajectory",
                r.max_trace_drift
            )));
        }
        if !(r.min_eigenvalue >= -T::lit(POSITIVITY_TOL)) {
            return Err(Error::Invariant(format!(
                "negative eigenvalue {:e} along trajectory",
                r.min_eigenvalue
            )));
        }
        Ok(r)
    }

    /// State at `t` by linear interpolation between stored states.
    pub fn state_at(&self, t: T) -> Result<CMatrix<T>> {
        let (lo, hi) = (self.times[0], self.times[self.len() - 1]);
        if t < lo || t > hi {
            return Err(Error::OutOfDomain {
                t: t.to_f64_lossy(),
                start: lo.to_f64_lossy(),
                end: hi.to_f64_lossy(),
            });
        }
        let k = self.times.partition_point(|&s| s < t);
        if self.times[k] == t {
            return Ok(self.states[k].clone());
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = cr((t - t0) / (t1 - t0));
        Ok(&self.states[k - 1] * (cr(T::one()) - w) + &self.states[k] * w)
    }

    /// Header `time` followed by `rho_ij_re,rho_ij_im` in row-major order.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |s| s.nrows());
        let mut out = String::from("time");
        for i in 0..n {
            for j in 0..n {
                let _ = write!(out, ",rho_{i}{j}_re,rho_{i}{j}_im");
            }
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            let _ = write!(out, "{:.16e}", t.to_f64_lossy());
            for i in 0..n {
                for j in 0..n {
                    let z = s[(i, j)];
                    let _ = write!(
                        out,
                        ",{:.16e},{:.16e}",
                        z.re.to_f64_lossy(),
                        z.im.to_f64_lossy()
                    );
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let file = TrajectoryFile {
            meta: self.meta.clone(),
            times: self.times.iter().map(|t| t.to_f64_lossy()).collect(),
            states: self.states.iter().map(matrix_to_literal).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_csv())?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json()?)?)
    }
}

fn meta<T: Real>(
    model: &LindbladModel<T>,
    r: Representation,
    cfg: &IntegratorConfig<T>,
) -> Result<TrajectoryMeta> {
    Ok(TrajectoryMeta {
        representation: r,
        rel_tol: cfg.rel_tol.to_f64_lossy(),
        abs_tol: cfg.abs_tol.to_f64_lossy(),
        max_step: cfg.max_step.to_f64_lossy(),
        model_hash: model_hash(model)?,
    })
}

fn check_start<T: Real>(
    model: &LindbladModel<T>,
    rho0: &DensityMatrix<T>,
    times: &[T],
) -> Result<()> {
    if rho0.dim() != model.dim() {
        return Err(Error::dim("initial state", model.dim(), rho0.dim()));
    }
    let (Some(&first), Some(&last)) = (times.first(), times.last()) else {
        return Err(Error::InvalidArgument("no output times".into()));
    };
    model.check_time(first)?;
    model.check_time(last)
}

/// Integrates `dρ/dt = −i𝓛(t)ρ`, storing `ρ` at each of `times`.
pub fn propagate_master_at<T: Real>(
    model: &LindbladModel<T>,
    rho0: &DensityMatrix<T>,
    times: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    check_start(model, rho0, times)?;
    let y0 = matrix::vec_row_major(rho0.matrix());
    let rhs = |t: T, y: &CVector<T>| -> Result<CVector<T>> {
        let rho = matrix::unvec_row_major(y)?;
        Ok(matrix::vec_row_major(&master_rhs(model, t, &rho)?))
    };
    let states = integrate_to_times(rhs, &y0, times, cfg)?
        .iter()
        .map(matrix::unvec_row_major)
        .collect::<Result<Vec<_>>>()?;
    let traj = Trajectory {
        times: times.to_vec(),
        states,
        meta: meta(model, Representation::Master, cfg)?,
    };
    traj.check_invariants()?;
    Ok(traj)
}

/// Integrates `i ∂Ψ/∂t = H_T(t)Ψ` with `H_T` rebuilt at every evaluation, storing extracted `ρ`.
pub fn propagate_embedded_at<T: Real>(
    model: &LindbladModel<T>,
    rho0: &DensityMatrix<T>,
    times: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    check_start(model, rho0, times)?;
    let psi = embedded_states(model, &matrix::vec_row_major(rho0.matrix()), times, cfg)?;
    let states = psi
        .iter()
        .map(matrix::unvec_row_major)
        .collect::<Result<Vec<_>>>()?;
    let traj = Trajectory {
        times: times.to_vec(),
        states,
        meta: meta(model, Representation::Embedded, cfg)?,
    };
    traj.check_invariants()?;
    Ok(traj)
}

/// Raw embedded vectors at `times` from an arbitrary (not necessarily physical) start.
pub fn embedded_states<T: Real>(
    model: &LindbladModel<T>,
    psi0: &CVector<T>,
    times: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Vec<CVector<T>>> {
    let n = model.dim();
    if psi0.len() != n * n {
        return Err(Error::dim("embedded state", n * n, psi0.len()));
    }
    let minus_i = Cx::new(T::zero(), -T::one());
    let rhs = |t: T, y: &CVector<T>| -> Result<CVector<T>> {
        let ht = build_effective_hamiltonian(model, t)?;
        Ok(ht.matrix * y * minus_i)
    };
    integrate_to_times(rhs, psi0, times, cfg)
}

pub fn propagate_master<T: Real>(
    model: &LindbladModel<T>,
    rho0: &DensityMatrix<T>,
    t0: T,
    t1: T,
    cfg: &PropagationConfig<T>,
) -> Result<Trajectory<T>> {
    propagate_master_at(
        model,
        rho0,
        &uniform_times(t0, t1, cfg.samples)?,
        &cfg.integrator,
    )
}

pub fn propagate_embedded<T: Real>(
    model: &LindbladModel<T>,
    rho0: &DensityMatrix<T>,
    t0: T,
    t1: T,
    cfg: &PropagationConfig<T>,
) -> Result<Trajectory<T>> {
    propagate_embedded_at(
        model,
        rho0,
        &uniform_times(t0, t1, cfg.samples)?,
        &cfg.integrator,
    )
}

#[derive(Debug, Clone)]
pub struct BatchJob<T: Real> {
    pub model: LindbladModel<T>,
    pub rho0: DensityMatrix<T>,
    pub t0: T,
    pub t1: T,
}

/// Runs independent jobs on the shared pool; results keep the job order.
pub fn propagate_batch<T: Real>(
    jobs: &[BatchJob<T>],
    representation: Representation,
    cfg: &PropagationConfig<T>,
) -> Result<Vec<Result<Trajectory<T>>>> {
    let run = |job: &BatchJob<T>| match representation {
        Representation::Master => propagate_master(&job.model, &job.rho0, job.t0, job.t1, cfg),
        Representation::Embedded => propagate_embedded(&job.model, &job.rho0, job.t0, job.t1, cfg),
        other => Err(Error::InvalidArgument(format!(
            "batch propagation does not support {other:?}"
        ))),
    };
    Ok(parallel::pool()?.install(|| jobs.par_iter().map(run).collect()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport<T> {
    pub times: Vec<T>,
    pub distances: Vec<T>,
    pub max_distance: T,
    /// Grids differed and states were linearly interpolated onto their merged times.
    pub interpolated: bool,
}

fn same_grid<T: Real>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(&x, &y)| (x - y).abs() <= T::lit(1e-12) * T::one().max(x.abs()))
}

/// Per-time trace distances; symmetric in its arguments.
pub fn compare_trajectories<T: Real>(
    a: &Trajectory<T>,
    b: &Trajectory<T>,
) -> Result<ComparisonReport<T>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot compare empty trajectories".into(),
        ));
    }
    let (times, pairs, interpolated): (Vec<T>, Vec<(CMatrix<T>, CMatrix<T>)>, bool) =
        if same_grid(&a.times, &b.times) {
            let pairs = a
                .states
                .iter()
                .cloned()
                .zip(b.states.iter().cloned())
                .collect();
            (a.times.clone(), pairs, false)
        } else {
            let lo = a.times[0].max(b.times[0]);
            let hi = a.times[a.len() - 1].min(b.times[b.len() - 1]);
            if lo > hi {
                return Err(Error::InvalidArgument(
                    "trajectories cover disjoint time domains".into(),
                ));
            }
            let mut merged: Vec<T> = a
                .times
                .iter()
                .chain(&b.times)
                .copied()
                .filter(|&t| t >= lo && t <= hi)
                .collect();
            merged.sort_by(|x, y| x.partial_cmp(y).unwrap());
            merged.dedup();
            let pairs = merged
                .iter()
                .map(|&t| Ok((a.state_at(t)?, b.state_at(t)?)))
                .collect::<Result<Vec<_>>>()?;
            (merged, pairs, true)
        };
    let distances = pairs
        .iter()
        .map(|(x, y)| trace_distance(x, y))
        .collect::<Result<Vec<_>>>()?;
    let max_distance = distances.iter().fold(T::zero(), |m, &d| m.max(d));
    Ok(ComparisonReport {
        times,
        distances,
        max_distance,
        interpolated,
    })
}
