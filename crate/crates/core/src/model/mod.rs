//! Time-dependent Lindblad models and the master-equation right-hand side.
//!
//! The generator is written as `i dρ/dt = 𝓛ρ = [H, ρ] + Dρ` with
//! `Dρ = −(i/2) Σ_k {L_k†L_k ρ + ρ L_k†L_k − 2 L_k ρ L_k†}`, so the physical
//! flow is `dρ/dt = −i 𝓛ρ`. Jump operators carry their rates (`L = √κ σ₋`).

mod density;
pub mod io;
pub mod schedule;

pub use density::DensityMatrix;
pub use schedule::{rotating_field, Builtin, HarmonicTerm, OperatorSchedule, ScheduleKind};

use crate::error::{Error, Result};
use crate::numerics::matrix::{self, CMatrix};
use crate::scalar::{cr, Cx, Real};

/// Hermiticity tolerance applied to `H(t)` at validation samples.
pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel<T: Real> {
    dim: usize,
    hamiltonian: OperatorSchedule<T>,
    jump_ops: Vec<OperatorSchedule<T>>,
    t_domain: (T, T),
}

impl<T: Real> LindbladModel<T> {
    /// Builds a model, checking shapes and the time domain. Hermiticity is left to [`validate_model`].
    pub fn new(
        hamiltonian: OperatorSchedule<T>,
        jump_ops: Vec<OperatorSchedule<T>>,
        t_domain: (T, T),
    ) -> Result<Self> {
        let model = Self::new_unchecked(hamiltonian, jump_ops, t_domain)?;
        if let Some(bad) = model.jump_ops.iter().position(|l| l.dim() != model.dim) {
            return Err(Error::dim(
                &format!("jump operator {bad}"),
                model.dim,
                model.jump_ops[bad].dim(),
            ));
        }
        Ok(model)
    }

    /// Like [`LindbladModel::new`] but tolerates mismatched jump dimensions, so that
    /// [`validate_model`] can report them.
    pub fn new_unchecked(
        hamiltonian: OperatorSchedule<T>,
        jump_ops: Vec<OperatorSchedule<T>>,
        t_domain: (T, T),
    ) -> Result<Self> {
        let (start, end) = t_domain;
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::InvalidArgument(format!(
                "time domain [{start}, {end}] must be finite and non-empty"
            )));
        }
        Ok(Self {
            dim: hamiltonian.dim(),
            hamiltonian,
            jump_ops,
            t_domain,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_domain(&self) -> (T, T) {
        self.t_domain
    }

    pub fn hamiltonian(&self) -> &OperatorSchedule<T> {
        &self.hamiltonian
    }

    pub fn jump_ops(&self) -> &[OperatorSchedule<T>] {
        &self.jump_ops
    }

    pub fn is_closed(&self) -> bool {
        self.jump_ops.is_empty()
    }

    /// True when neither `H` nor any `L_k` depends on time.
    pub fn is_static(&self) -> bool {
        self.hamiltonian.is_constant() && self.jump_ops.iter().all(|l| l.is_constant())
    }

    pub fn without_jumps(&self) -> Self {
        Self {
            jump_ops: Vec::new(),
            ..self.clone()
        }
    }

    pub fn with_domain(&self, t_domain: (T, T)) -> Result<Self> {
        Self::new_unchecked(self.hamiltonian.clone(), self.jump_ops.clone(), t_domain)
    }

    /// Same dynamics written in the orthonormal basis given by the columns of `basis`.
    pub fn in_basis(&self, basis: &CMatrix<T>) -> Result<Self> {
        let h = self.hamiltonian.clone().in_basis(basis.clone())?;
        let jumps = self
            .jump_ops
            .iter()
            .map(|l| l.clone().in_basis(basis.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(h, jumps, self.t_domain)
    }

    pub fn check_time(&self, t: T) -> Result<()> {
        let (start, end) = self.t_domain;
        let slack = T::lit(64.0) * T::EPSILON * start.abs().max(end.abs()).max(T::one());
        if t >= start - slack && t <= end + slack {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                t: t.to_f64_lossy(),
                start: start.to_f64_lossy(),
                end: end.to_f64_lossy(),
            })
        }
    }

    pub fn hamiltonian_at(&self, t: T) -> Result<CMatrix<T>> {
        self.check_time(t)?;
        self.hamiltonian.eval(t)
    }

    pub fn jump_ops_at(&self, t: T) -> Result<Vec<CMatrix<T>>> {
        self.check_time(t)?;
        self.jump_ops.iter().map(|l| l.eval(t)).collect()
    }

    /// Exact `(dH/dt, dL_k/dt)` when every schedule has an analytic derivative.
    pub fn derivative_parts(&self, t: T) -> Result<Option<(CMatrix<T>, Vec<CMatrix<T>>)>> {
        self.check_time(t)?;
        let Some(h) = self.hamiltonian.derivative(t)? else {
            return Ok(None);
        };
        let mut jumps = Vec::with_capacity(self.jump_ops.len());
        for l in &self.jump_ops {
            match l.derivative(t)? {
                Some(d) => jumps.push(d),
                None => return Ok(None),
            }
        }
        Ok(Some((h, jumps)))
    }

    /// Non-Hermitian system part `𝓗 = H − (i/2) Σ L_k†L_k` together with the jump operators.
    pub fn effective_parts(&self, t: T) -> Result<(CMatrix<T>, Vec<CMatrix<T>>)> {
        let mut calh = self.hamiltonian_at(t)?;
        let jumps = self.jump_ops_at(t)?;
        let half_i = Cx::new(T::zero(), T::lit(0.5));
        for l in &jumps {
            calh -= (l.adjoint() * l) * half_i;
        }
        Ok((calh, jumps))
    }
}

/// Outcome of [`validate_model`]; failures are collected, not raised.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub samples: usize,
    pub max_hermiticity_violation: f64,
    pub dimension_mismatches: Vec<String>,
    pub non_finite: Vec<String>,
    pub evaluation_errors: Vec<String>,
    pub passed: bool,
}

/// Samples the domain uniformly at `n_samples` points and checks shapes, finiteness and
/// Hermiticity of `H(t)`.
pub fn validate_model<T: Real>(model: &LindbladModel<T>, n_samples: usize) -> ValidationReport {
    let n_samples = n_samples.max(2);
    let mut report = ValidationReport {
        samples: n_samples,
        max_hermiticity_violation: 0.0,
        dimension_mismatches: Vec::new(),
        non_finite: Vec::new(),
        evaluation_errors: Vec::new(),
        passed: false,
    };
    let n = model.dim;
    for (k, l) in model.jump_ops.iter().enumerate() {
        if l.dim() != n {
            report.dimension_mismatches.push(format!(
                "jump operator {k} is {0}x{0}, model dim is {n}",
                l.dim()
            ));
        }
    }

    let (start, end) = model.t_domain;
    let step = (end - start) / T::from_usize(n_samples - 1).unwrap();
    for i in 0..n_samples {
        let t = if i + 1 == n_samples {
            end
        } else {
            start + step * T::from_usize(i).unwrap()
        };
        let tf = t.to_f64_lossy();
        match model.hamiltonian.eval(t) {
            Ok(h) => {
                report.max_hermiticity_violation = report
                    .max_hermiticity_violation
                    .max(matrix::hermiticity_violation(&h).to_f64_lossy());
            }
            Err(Error::NonFinite(_)) => report.non_finite.push(format!("H(t = {tf})")),
            Err(e) => report.evaluation_errors.push(format!("H(t = {tf}): {e}")),
        }
        for (k, l) in model.jump_ops.iter().enumerate() {
            match l.eval(t) {
                Ok(_) => {}
                Err(Error::NonFinite(_)) => report.non_finite.push(format!("L_{k}(t = {tf})")),
                Err(e) => report
                    .evaluation_errors
                    .push(format!("L_{k}(t = {tf}): {e}")),
            }
        }
    }
    report.passed = report.max_hermiticity_violation <= HERMITICITY_TOL
        && report.dimension_mismatches.is_empty()
        && report.non_finite.is_empty()
        && report.evaluation_errors.is_empty();
    report
}

fn dissipator<T: Real>(jumps: &[CMatrix<T>], rho: &CMatrix<T>) -> CMatrix<T> {
    let n = rho.nrows();
    let mut acc = CMatrix::zeros(n, n);
    for l in jumps {
        let ldl = l.adjoint() * l;
        acc += &ldl * rho + rho * &ldl - (l * rho * l.adjoint()) * cr(T::lit(2.0));
    }
    acc * Cx::new(T::zero(), T::lit(-0.5))
}

fn check_operand<T: Real>(model: &LindbladModel<T>, rho: &CMatrix<T>) -> Result<()> {
    let n = model.dim;
    if rho.shape() != (n, n) {
        return Err(Error::dim(
            "density operand",
            format!("{n}x{n}"),
            format!("{}x{}", rho.nrows(), rho.ncols()),
        ));
    }
    Ok(())
}

/// The dissipative part `Dρ` of `i dρ/dt`; `i·Dρ` is Hermitian and traceless for Hermitian `ρ`.
pub fn dissipator_apply<T: Real>(
    model: &LindbladModel<T>,
    t: T,
    rho: &DensityMatrix<T>,
) -> Result<CMatrix<T>> {
    check_operand(model, rho.matrix())?;
    let jumps = model.jump_ops_at(t)?;
    Ok(dissipator(&jumps, rho.matrix()))
}

/// `𝓛(t)ρ = [H, ρ] + Dρ` for an arbitrary (not necessarily physical) `ρ`.
pub fn liouvillian_apply<T: Real>(
    model: &LindbladModel<T>,
    t: T,
    rho: &CMatrix<T>,
) -> Result<CMatrix<T>> {
    check_operand(model, rho)?;
    let h = model.hamiltonian_at(t)?;
    let jumps = model.jump_ops_at(t)?;
    Ok(matrix::commutator(&h, rho) + dissipator(&jumps, rho))
}

/// Physical time derivative `dρ/dt = −i 𝓛(t)ρ`.
pub fn master_rhs<T: Real>(model: &LindbladModel<T>, t: T, rho: &CMatrix<T>) -> Result<CMatrix<T>> {
    Ok(liouvillian_apply(model, t, rho)? * Cx::new(T::zero(), -T::one()))
}
