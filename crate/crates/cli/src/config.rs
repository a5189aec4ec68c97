//! Resolved run configuration shared by every subcommand.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use adiabat_core::model::io::load_model;
use adiabat_core::model::LindbladModel;
use adiabat_core::numerics::ode::IntegratorConfig;
use adiabat_core::spin::{spin_model_on, SpinParams, SURFACE_THETA};
use serde::Serialize;

use crate::CliError;

/// `a:b:n`: `n` evenly spaced points from `a` to `b` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.end
                } else {
                    self.start + step * k as f64
                }
            })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("expected a:b:n, got {s:?}"));
        };
        let start: f64 = a
            .trim()
            .parse()
            .map_err(|e| format!("grid start {a:?}: {e}"))?;
        let end: f64 = b
            .trim()
            .parse()
            .map_err(|e| format!("grid end {b:?}: {e}"))?;
        let count: usize = n
            .trim()
            .parse()
            .map_err(|e| format!("grid count {n:?}: {e}"))?;
        if count == 0 {
            return Err("grid count must be positive".into());
        }
        if !(start.is_finite() && end.is_finite()) {
            return Err("grid bounds must be finite".into());
        }
        Ok(Self { start, end, count })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSource {
    File { path: PathBuf },
    Spin { gamma: f64, omega: f64, theta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub model: ModelSource,
    pub out: PathBuf,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub grid_gamma: GridSpec,
    pub grid_omega: GridSpec,
    pub seed: u64,
    pub quick: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(CliError::Usage("tolerances must be positive".into()));
        }
        if let (Some(a), Some(b)) = (self.t0, self.t1) {
            if !(b > a) {
                return Err(CliError::Usage(format!(
                    "--t1 ({b}) must exceed --t0 ({a})"
                )));
            }
        }
        Ok(())
    }

    pub fn integrator(&self) -> IntegratorConfig<f64> {
        IntegratorConfig::with_tolerances(self.rel_tol, self.abs_tol)
    }

    pub fn spin_params(&self) -> Result<SpinParams<f64>, CliError> {
        match self.model {
            ModelSource::Spin {
                gamma,
                omega,
                theta,
            } => Ok(SpinParams::new(gamma, omega, theta)?),
            ModelSource::File { .. } => Err(CliError::Usage(format!(
                "{} needs --builtin spin",
                self.subcommand
            ))),
        }
    }

    /// The model on `[t0, t1]`, defaulting to its own domain.
    pub fn load(&self) -> Result<LindbladModel<f64>, CliError> {
        let model = match &self.model {
            ModelSource::File { path } => load_model(path).map_err(|e| CliError::Stage {
                stage: format!("loading model {}", path.display()),
                source: e,
            })?,
            ModelSource::Spin { .. } => {
                let p = self.spin_params()?;
                spin_model_on(&p, (0.0, p.default_horizon()))?
            }
        };
        let (s, e) = model.t_domain();
        let domain = (self.t0.unwrap_or(s), self.t1.unwrap_or(e));
        if domain == (s, e) {
            return Ok(model);
        }
        if let ModelSource::Spin { .. } = self.model {
            return Ok(spin_model_on(&self.spin_params()?, domain)?);
        }
        Ok(model.with_domain(domain)?)
    }

    /// Creates the output directory and checks it accepts files before any computation.
    pub fn prepare_out(&self) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Stage {
            stage: format!("preparing output directory {}", self.out.display()),
            source: e.into(),
        };
        std::fs::create_dir_all(&self.out).map_err(io)?;
        let probe = self.out.join(".adiabat-write-probe");
        std::fs::write(&probe, b"").map_err(io)?;
        std::fs::remove_file(&probe).map_err(io)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

pub const DEFAULT_GAMMA: f64 = 0.5;
pub const DEFAULT_OMEGA: f64 = 0.1;
pub const DEFAULT_THETA: f64 = SURFACE_THETA;
pub const DEFAULT_GRID_GAMMA: GridSpec = GridSpec {
    start: 0.1,
    end: 3.0,
    count: 30,
};
pub const DEFAULT_GRID_OMEGA: GridSpec = GridSpec {
    start: 0.0,
    end: 1.0,
    count: 30,
};

pub fn default_out() -> &'static Path {
    Path::new("out")
}
