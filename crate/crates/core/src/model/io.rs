//! JSON model description files.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "t_domain": [0.0, 62.83185307179586],
//!   "hamiltonian": {"kind": "builtin", "name": "rotating_field_spin",
//!                   "params": {"theta": 0.7853981633974483, "omega": 0.1}},
//!   "jump_ops": [{"kind": "builtin", "name": "sigma_minus", "params": {"rate": 0.5}}]
//! }
//! ```
//!
//! Schedule kinds:
//! - `constant`: `{"matrix": M}`
//! - `piecewise_linear`: `{"times": [t0, t1, ...], "samples": [M0, M1, ...]}`
//! - `builtin`: `{"name": ..., "params": {...}}`; `rotating_field_spin` takes `theta`, `omega`,
//!   `phi0` (default 0) and `b0` (default 1); `sigma_minus` takes `rate`
//! - `harmonic`: `{"base": M, "terms": [{"frequency": w, "cos": C, "sin": S}, ...]}`
//! - `basis_change`: `{"basis": V, "inner": schedule}`, evaluating `V† O(t) V`
//!
//! A matrix literal `M` is a list of rows, each a list of `[re, im]` pairs.
//! Numbers are written in shortest round-trip form, so save/load is lossless for `f64`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::schedule::{Builtin, HarmonicTerm, OperatorSchedule, ScheduleKind};
use super::LindbladModel;
use crate::error::{Error, Result};
use crate::numerics::matrix::CMatrix;
use crate::scalar::{Cx, Real};

pub type MatrixLiteral = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    pub t_domain: [f64; 2],
    pub hamiltonian: ScheduleSpec,
    #[serde(default)]
    pub jump_ops: Vec<ScheduleSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Constant {
        matrix: MatrixLiteral,
    },
    PiecewiseLinear {
        times: Vec<f64>,
        samples: Vec<MatrixLiteral>,
    },
    Builtin {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    Harmonic {
        base: MatrixLiteral,
        #[serde(default)]
        terms: Vec<HarmonicSpec>,
    },
    BasisChange {
        basis: MatrixLiteral,
        inner: Box<ScheduleSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicSpec {
    pub frequency: f64,
    pub cos: MatrixLiteral,
    pub sin: MatrixLiteral,
}

pub fn matrix_to_literal<T: Real>(m: &CMatrix<T>) -> MatrixLiteral {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re.to_f64_lossy(), m[(i, j)].im.to_f64_lossy()])
                .collect()
        })
        .collect()
}

pub fn literal_to_matrix<T: Real>(lit: &MatrixLiteral) -> Result<CMatrix<T>> {
    let rows = lit.len();
    let cols = lit.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::Shape("empty matrix literal".into()));
    }
    if let Some(bad) = lit.iter().position(|r| r.len() != cols) {
        return Err(Error::Shape(format!(
            "matrix literal row {bad} has {} entries, expected {cols}",
            lit[bad].len()
        )));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        Cx::new(T::lit(lit[i][j][0]), T::lit(lit[i][j][1]))
    }))
}

fn builtin_to_spec<T: Real>(b: &Builtin<T>) -> ScheduleSpec {
    let mut params = BTreeMap::new();
    match *b {
        Builtin::RotatingFieldSpin {
            theta,
            omega,
            phi0,
            b0,
        } => {
            params.insert("theta".to_string(), theta.to_f64_lossy());
            params.insert("omega".to_string(), omega.to_f64_lossy());
            params.insert("phi0".to_string(), phi0.to_f64_lossy());
            params.insert("b0".to_string(), b0.to_f64_lossy());
        }
        Builtin::SigmaMinus { rate } => {
            params.insert("rate".to_string(), rate.to_f64_lossy());
        }
    }
    ScheduleSpec::Builtin {
        name: b.name().to_string(),
        params,
    }
}

fn builtin_from_spec<T: Real>(name: &str, params: &BTreeMap<String, f64>) -> Result<Builtin<T>> {
    let allowed: &[&str] = match name {
        "rotating_field_spin" => &["theta", "omega", "phi0", "b0"],
        "sigma_minus" => &["rate"],
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown builtin schedule '{other}'"
            )))
        }
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::InvalidArgument(format!(
            "builtin '{name}' has no parameter '{k}'"
        )));
    }
    let get = |key: &str, default: Option<f64>| -> Result<T> {
        params
            .get(key)
            .copied()
            .or(default)
            .map(T::lit)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("builtin '{name}' needs parameter '{key}'"))
            })
    };
    Ok(match name {
        "rotating_field_spin" => Builtin::RotatingFieldSpin {
            theta: get("theta", None)?,
            omega: get("omega", None)?,
            phi0: get("phi0", Some(0.0))?,
            b0: get("b0", Some(1.0))?,
        },
        _ => {
            let rate = get("rate", None)?;
            if rate < T::zero() {
                return Err(Error::InvalidArgument(
                    "sigma_minus rate must be non-negative".into(),
                ));
            }
            Builtin::SigmaMinus { rate }
        }
    })
}

impl ScheduleSpec {
    pub fn from_schedule<T: Real>(s: &OperatorSchedule<T>) -> Self {
        match s.kind() {
            ScheduleKind::Constant(m) => ScheduleSpec::Constant {
                matrix: matrix_to_literal(m),
            },
            ScheduleKind::PiecewiseLinear { times, samples } => ScheduleSpec::PiecewiseLinear {
                times: times.iter().map(|t| t.to_f64_lossy()).collect(),
                samples: samples.iter().map(matrix_to_literal).collect(),
            },
            ScheduleKind::Builtin(b) => builtin_to_spec(b),
            ScheduleKind::Harmonic { base, terms } => ScheduleSpec::Harmonic {
                base: matrix_to_literal(base),
                terms: terms
                    .iter()
                    .map(|term| HarmonicSpec {
                        frequency: term.frequency.to_f64_lossy(),
                        cos: matrix_to_literal(&term.cos),
                        sin: matrix_to_literal(&term.sin),
                    })
                    .collect(),
            },
            ScheduleKind::BasisChange { basis, inner } => ScheduleSpec::BasisChange {
                basis: matrix_to_literal(basis),
                inner: Box::new(Self::from_schedule(inner)),
            },
        }
    }

    pub fn to_schedule<T: Real>(&self) -> Result<OperatorSchedule<T>> {
        match self {
            ScheduleSpec::Constant { matrix } => {
                OperatorSchedule::constant(literal_to_matrix(matrix)?)
            }
            ScheduleSpec::PiecewiseLinear { times, samples } => OperatorSchedule::piecewise_linear(
                times.iter().map(|&t| T::lit(t)).collect(),
                samples
                    .iter()
                    .map(literal_to_matrix)
                    .collect::<Result<_>>()?,
            ),
            ScheduleSpec::Builtin { name, params } => {
                Ok(OperatorSchedule::builtin(builtin_from_spec(name, params)?))
            }
            ScheduleSpec::Harmonic { base, terms } => OperatorSchedule::harmonic(
                literal_to_matrix(base)?,
                terms
                    .iter()
                    .map(|term| {
                        Ok(HarmonicTerm {
                            frequency: T::lit(term.frequency),
                            cos: literal_to_matrix(&term.cos)?,
                            sin: literal_to_matrix(&term.sin)?,
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
            ScheduleSpec::BasisChange { basis, inner } => {
                inner.to_schedule()?.in_basis(literal_to_matrix(basis)?)
            }
        }
    }
}

impl ModelFile {
    pub fn from_model<T: Real>(model: &LindbladModel<T>) -> Self {
        let (start, end) = model.t_domain();
        Self {
            dim: model.dim(),
            t_domain: [start.to_f64_lossy(), end.to_f64_lossy()],
            hamiltonian: ScheduleSpec::from_schedule(model.hamiltonian()),
            jump_ops: model
                .jump_ops()
                .iter()
                .map(ScheduleSpec::from_schedule)
                .collect(),
        }
    }

    pub fn to_model<T: Real>(&self) -> Result<LindbladModel<T>> {
        let h = self.hamiltonian.to_schedule()?;
        if h.dim() != self.dim {
            return Err(Error::dim("model file hamiltonian", self.dim, h.dim()));
        }
        let jumps = self
            .jump_ops
            .iter()
            .map(ScheduleSpec::to_schedule)
            .collect::<Result<Vec<_>>>()?;
        LindbladModel::new(
            h,
            jumps,
            (T::lit(self.t_domain[0]), T::lit(self.t_domain[1])),
        )
    }
}

pub fn model_to_json<T: Real>(model: &LindbladModel<T>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ModelFile::from_model(model))?)
}

pub fn model_from_json<T: Real>(text: &str) -> Result<LindbladModel<T>> {
    serde_json::from_str::<ModelFile>(text)?.to_model()
}

pub fn load_model<T: Real>(path: &Path) -> Result<LindbladModel<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    model_from_json(&text)
}

pub fn save_model<T: Real>(model: &LindbladModel<T>, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(model)?)?;
    Ok(())
}
