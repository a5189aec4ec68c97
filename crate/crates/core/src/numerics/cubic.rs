//! Cubic roots via the companion-matrix eigenproblem.

use num_traits::Zero;

use super::eigen::{cmp_complex, eigenvalues};
use super::matrix::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{abs, Cx, Real};

fn horner<T: Real>(coeffs: &[Cx<T>; 4], x: Cx<T>) -> (Cx<T>, Cx<T>) {
    let [c3, c2, c1, c0] = *coeffs;
    let p = ((c3 * x + c2) * x + c1) * x + c0;
    let dp = (c3 * x * T::lit(3.0) + c2 * T::lit(2.0)) * x + c1;
    (p, dp)
}

/// Roots of `c3 x³ + c2 x² + c1 x + c0`, sorted by (Re, Im).
pub fn solve_cubic<T: Real>(c3: Cx<T>, c2: Cx<T>, c1: Cx<T>, c0: Cx<T>) -> Result<[Cx<T>; 3]> {
    if c3.is_zero() {
        return Err(Error::DegenerateDegree);
    }
    for c in [c3, c2, c1, c0] {
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite("solve_cubic".into()));
        }
    }
    let (a2, a1, a0) = (c2 / c3, c1 / c3, c0 / c3);
    let z = Cx::zero();
    let one = Cx::new(T::one(), T::zero());
    let companion = CMatrix::from_row_slice(3, 3, &[-a2, -a1, -a0, one, z, z, z, one, z]);
    let mut roots = eigenvalues(&companion)?;

    // Guarded Newton polish on the original polynomial.
    let coeffs = [c3, c2, c1, c0];
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(&coeffs, *r);
            if dp.is_zero() {
                break;
            }
            let candidate = *r - p / dp;
            if abs(horner(&coeffs, candidate).0) < abs(p) {
                *r = candidate;
            } else {
                break;
            }
        }
    }
    roots.sort_by(cmp_complex);
    Ok([roots[0], roots[1], roots[2]])
}

/// |p(x)| for the cubic with the given coefficients.
pub fn cubic_residual<T: Real>(c3: Cx<T>, c2: Cx<T>, c1: Cx<T>, c0: Cx<T>, x: Cx<T>) -> T {
    abs(horner(&[c3, c2, c1, c0], x).0)
}
