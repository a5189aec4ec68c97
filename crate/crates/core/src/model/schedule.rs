//! Time-dependent operator schedules `t ↦ O(t)`.

use crate::error::{Error, Result};
use crate::numerics::matrix::{self, ensure_finite, CMatrix};
use crate::scalar::{cr, Cx, Real};

/// Closed-form schedules that need no sample data.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin<T> {
    /// `b0 · B̂(t)·σ` with `B̂ = (sinθ cosφ, sinθ sinφ, cosθ)` and `φ = ωt + φ0`, basis {g, e}.
    RotatingFieldSpin { theta: T, omega: T, phi0: T, b0: T },
    /// `√rate · |g⟩⟨e|`.
    SigmaMinus { rate: T },
}

impl<T: Real> Builtin<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::RotatingFieldSpin { .. } => "rotating_field_spin",
            Builtin::SigmaMinus { .. } => "sigma_minus",
        }
    }

    pub fn dim(&self) -> usize {
        2
    }

    fn eval(&self, t: T) -> CMatrix<T> {
        match *self {
            Builtin::RotatingFieldSpin {
                theta,
                omega,
                phi0,
                b0,
            } => rotating_field(theta, omega * t + phi0) * cr(b0),
            Builtin::SigmaMinus { rate } => matrix::sigma_minus_ge() * cr(rate.sqrt()),
        }
    }

    fn derivative(&self, t: T) -> CMatrix<T> {
        match *self {
            Builtin::RotatingFieldSpin {
                theta,
                omega,
                phi0,
                b0,
            } => {
                // only the off-diagonal phase e^{iφ} moves
                let off = Cx::new(T::zero(), omega)
                    * crate::scalar::cis(omega * t + phi0)
                    * cr(theta.sin() * b0);
                CMatrix::from_row_slice(2, 2, &[cr(T::zero()), off, off.conj(), cr(T::zero())])
            }
            Builtin::SigmaMinus { .. } => CMatrix::zeros(2, 2),
        }
    }
}

/// `sinθ cosφ σx + sinθ sinφ σy + cosθ σz` in the basis {g, e}.
pub fn rotating_field<T: Real>(theta: T, phi: T) -> CMatrix<T> {
    let (s, c) = (theta.sin(), theta.cos());
    let off = Cx::new(s * phi.cos(), s * phi.sin());
    CMatrix::from_row_slice(2, 2, &[cr(-c), off, off.conj(), cr(c)])
}

/// One Fourier component `cos(ωt)·C + sin(ωt)·S`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicTerm<T: Real> {
    pub frequency: T,
    pub cos: CMatrix<T>,
    pub sin: CMatrix<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind<T: Real> {
    Constant(CMatrix<T>),
    /// Linear interpolation between samples; defined on `[times[0], times[last]]`.
    PiecewiseLinear {
        times: Vec<T>,
        samples: Vec<CMatrix<T>>,
    },
    Builtin(Builtin<T>),
    /// `base + Σ_k cos(ω_k t) C_k + sin(ω_k t) S_k`.
    Harmonic {
        base: CMatrix<T>,
        terms: Vec<HarmonicTerm<T>>,
    },
    /// `V† O(t) V` for a fixed unitary `V`.
    BasisChange {
        basis: CMatrix<T>,
        inner: Box<OperatorSchedule<T>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSchedule<T: Real> {
    dim: usize,
    kind: ScheduleKind<T>,
}

fn check_shape<T: Real>(m: &CMatrix<T>, dim: usize, what: &str) -> Result<()> {
    if m.shape() != (dim, dim) {
        return Err(Error::dim(
            what,
            format!("{dim}x{dim}"),
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    ensure_finite(m, what)
}

impl<T: Real> OperatorSchedule<T> {
    pub fn constant(m: CMatrix<T>) -> Result<Self> {
        let dim = matrix::ensure_square(&m, "constant schedule")?;
        ensure_finite(&m, "constant schedule")?;
        Ok(Self {
            dim,
            kind: ScheduleKind::Constant(m),
        })
    }

    pub fn piecewise_linear(times: Vec<T>, samples: Vec<CMatrix<T>>) -> Result<Self> {
        if times.len() < 2 || times.len() != samples.len() {
            return Err(Error::InvalidArgument(format!(
                "piecewise-linear schedule needs >= 2 matching samples, got {} times and {} matrices",
                times.len(),
                samples.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "piecewise-linear sample times must be strictly increasing".into(),
            ));
        }
        let dim = matrix::ensure_square(&samples[0], "piecewise-linear schedule")?;
        for s in &samples {
            check_shape(s, dim, "piecewise-linear schedule")?;
        }
        Ok(Self {
            dim,
            kind: ScheduleKind::PiecewiseLinear { times, samples },
        })
    }

    pub fn builtin(b: Builtin<T>) -> Self {
        Self {
            dim: b.dim(),
            kind: ScheduleKind::Builtin(b),
        }
    }

    pub fn harmonic(base: CMatrix<T>, terms: Vec<HarmonicTerm<T>>) -> Result<Self> {
        let dim = matrix::ensure_square(&base, "harmonic schedule")?;
        ensure_finite(&base, "harmonic schedule")?;
        for term in &terms {
            check_shape(&term.cos, dim, "harmonic schedule")?;
            check_shape(&term.sin, dim, "harmonic schedule")?;
        }
        Ok(Self {
            dim,
            kind: ScheduleKind::Harmonic { base, terms },
        })
    }

    /// Expresses this schedule in the basis given by the columns of `basis`.
    pub fn in_basis(self, basis: CMatrix<T>) -> Result<Self> {
        check_shape(&basis, self.dim, "basis change")?;
        Ok(Self {
            dim: self.dim,
            kind: ScheduleKind::BasisChange {
                basis,
                inner: Box::new(self),
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ScheduleKind<T> {
        &self.kind
    }

    pub fn is_constant(&self) -> bool {
        match &self.kind {
            ScheduleKind::Constant(_) => true,
            ScheduleKind::BasisChange { inner, .. } => inner.is_constant(),
            _ => false,
        }
    }

    /// Interval outside of which evaluation fails, if any.
    pub fn support(&self) -> Option<(T, T)> {
        match &self.kind {
            ScheduleKind::PiecewiseLinear { times, .. } => Some((times[0], times[times.len() - 1])),
            ScheduleKind::BasisChange { inner, .. } => inner.support(),
            _ => None,
        }
    }

    /// Exact `dO/dt`, or `None` where the schedule has kinks (piecewise-linear).
    pub fn derivative(&self, t: T) -> Result<Option<CMatrix<T>>> {
        let n = self.dim();
        let out = match &self.kind {
            ScheduleKind::Constant(_) => CMatrix::zeros(n, n),
            ScheduleKind::Builtin(b) => b.derivative(t),
            ScheduleKind::Harmonic { terms, .. } => {
                let mut out = CMatrix::zeros(n, n);
                for term in terms {
                    let arg = term.frequency * t;
                    out += &term.cos * cr(-term.frequency * arg.sin());
                    out += &term.sin * cr(term.frequency * arg.cos());
                }
                out
            }
            ScheduleKind::PiecewiseLinear { .. } => return Ok(None),
            ScheduleKind::BasisChange { basis, inner } => match inner.derivative(t)? {
                Some(d) => basis.adjoint() * d * basis,
                None => return Ok(None),
            },
        };
        ensure_finite(&out, "schedule derivative")?;
        Ok(Some(out))
    }

    pub fn eval(&self, t: T) -> Result<CMatrix<T>> {
        let out = match &self.kind {
            ScheduleKind::Constant(m) => m.clone(),
            ScheduleKind::Builtin(b) => b.eval(t),
            ScheduleKind::Harmonic { base, terms } => {
                let mut out = base.clone();
                for term in terms {
                    let arg = term.frequency * t;
                    out += &term.cos * cr(arg.cos());
                    out += &term.sin * cr(arg.sin());
                }
                out
            }
            ScheduleKind::PiecewiseLinear { times, samples } => interpolate(times, samples, t)?,
            ScheduleKind::BasisChange { basis, inner } => basis.adjoint() * inner.eval(t)? * basis,
        };
        ensure_finite(&out, "schedule evaluation")?;
        Ok(out)
    }
}

fn interpolate<T: Real>(times: &[T], samples: &[CMatrix<T>], t: T) -> Result<CMatrix<T>> {
    let (lo, hi) = (times[0], times[times.len() - 1]);
    let slack = T::lit(64.0) * T::EPSILON * lo.abs().max(hi.abs()).max(T::one());
    if !(t >= lo - slack && t <= hi + slack) {
        return Err(Error::OutOfDomain {
            t: t.to_f64_lossy(),
            start: lo.to_f64_lossy(),
            end: hi.to_f64_lossy(),
        });
    }
    // index of the segment [times[k], times[k+1]] containing t
    let k = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1) - 1;
    let (t0, t1) = (times[k], times[k + 1]);
    let w = ((t - t0) / (t1 - t0)).max(T::zero()).min(T::one());
    if w.is_zero() {
        return Ok(samples[k].clone());
    }
    Ok(&samples[k] * cr(T::one() - w) + &samples[k + 1] * cr(w))
}
