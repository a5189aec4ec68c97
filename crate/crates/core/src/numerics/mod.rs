//! Shared numerical kernels: dense complex matrices, the general eigensolver,
//! cubic roots, adaptive ODE stepping and finite differences.

pub mod cubic;
pub mod diff;
pub mod eigen;
pub mod matrix;
pub mod ode;

pub use cubic::{cubic_residual, solve_cubic};
pub use diff::{finite_difference, FdValue, DEFAULT_FD_STEP};
pub use eigen::{
    eigensolve_general, eigenvalues, hermitian_eigen, trace_distance, trace_norm, EigenPair,
};
pub use matrix::{CMatrix, CVector};
pub use ode::{integrate_ode, integrate_to_times, IntegratorConfig, OdeTrajectory};
