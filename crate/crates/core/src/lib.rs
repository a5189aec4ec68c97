//! Open-system adiabaticity through the effective-Hamiltonian embedding.
//!
//! A Lindblad model on an `N`-level system is mapped to a linear,
//! generally non-Hermitian Schrödinger-like problem on `N²` components.
//! The biorthogonal eigensystem of that generator defines open-system
//! adiabatic paths and the violation metric Γ.
//!
//! All numerical code is generic over [`Real`]; the aliases below fix it to `f64`.

// `!(a > b)` is the NaN-rejecting form; index loops mirror the matrix formulas.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::type_complexity
)]

pub mod adiabatic;
pub mod embed;
pub mod error;
pub mod model;
pub mod numerics;
pub mod parallel;
pub mod propagation;
pub mod random;
pub mod rotated;
pub mod scalar;
pub mod spectral;
pub mod spin;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

pub type C64 = Cx<f64>;
pub type ComplexMatrix = numerics::CMatrix<f64>;
pub type ComplexVector = numerics::CVector<f64>;
