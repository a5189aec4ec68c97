//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra as na;
use num_traits as nt;

pub use na::{ComplexField, RealField};

/// Real floating-point type the library is generic over (`f32` or `f64`).
pub trait Real:
    Copy
    + Send
    + Sync
    + 'static
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + nt::FloatConst
    + nt::FromPrimitive
    + nt::ToPrimitive
    + na::RealField
{
    const EPSILON: Self;
    const INFINITY: Self;

    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;
}

macro_rules! impl_real {
    ($f:ident) => {
        impl Real for $f {
            const EPSILON: Self = $f::EPSILON;
            const INFINITY: Self = $f::INFINITY;

            #[inline]
            fn lit(x: f64) -> Self {
                x as $f
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Complex scalar over `T`.
pub type Cx<T> = num_complex::Complex<T>;

#[inline]
pub fn cx<T: Real>(re: f64, im: f64) -> Cx<T> {
    Cx::new(T::lit(re), T::lit(im))
}

#[inline]
pub fn cr<T: Real>(re: T) -> Cx<T> {
    Cx::new(re, T::zero())
}

/// e^{iθ}.
#[inline]
pub fn cis<T: Real>(theta: T) -> Cx<T> {
    Cx::new(theta.cos(), theta.sin())
}

/// |z| for generic complex scalars.
#[inline]
pub fn abs<T: Real>(z: Cx<T>) -> T {
    z.re.hypot(z.im)
}

/// Principal square root, branch cut on the negative real axis.
pub fn csqrt<T: Real>(z: Cx<T>) -> Cx<T> {
    let r = abs(z);
    let half = T::lit(0.5);
    let re = ((r + z.re) * half).sqrt();
    let im = ((r - z.re) * half).sqrt();
    Cx::new(re, if z.im < T::zero() { -im } else { im })
}

/// e^z.
#[inline]
pub fn cexp<T: Real>(z: Cx<T>) -> Cx<T> {
    cis(z.im) * z.re.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn principal_square_root() {
        for z in [Cx::new(-4.0, 0.0), Cx::new(3.0, -4.0), Cx::new(0.0, 2.0)] {
            let r = csqrt(z);
            assert!((r * r - z).norm() < 1e-14);
            assert!(r.re >= 0.0);
        }
    }

    #[test]
    fn exponential_matches_num_complex() {
        let z = Cx::new(-0.3, 2.1);
        assert!((cexp(z) - z.exp()).norm() < 1e-15);
    }
}
