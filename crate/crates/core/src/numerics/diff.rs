//! Finite-difference derivative helpers.

use crate::error::{Error, Result};
use crate::numerics::matrix::{CMatrix, CVector};
use crate::scalar::{Cx, Real};

/// Default step in the problem's time units.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Values that finite differences can be taken of.
pub trait FdValue<T: Real>: Sized {
    fn lincomb(terms: &[(T, &Self)]) -> Self;
}

macro_rules! impl_fd_scalar {
    ($f:ty) => {
        impl FdValue<$f> for $f {
            fn lincomb(terms: &[(Self, &Self)]) -> Self {
                terms.iter().map(|(c, v)| *c * **v).sum()
            }
        }
    };
}
impl_fd_scalar!(f32);
impl_fd_scalar!(f64);

impl<T: Real> FdValue<T> for Cx<T> {
    fn lincomb(terms: &[(T, &Self)]) -> Self {
        terms
            .iter()
            .fold(Cx::new(T::zero(), T::zero()), |acc, (c, v)| acc + **v * *c)
    }
}

impl<T: Real> FdValue<T> for CMatrix<T> {
    fn lincomb(terms: &[(T, &Self)]) -> Self {
        let (first_c, first) = terms[0];
        let mut out = first * Cx::new(first_c, T::zero());
        for (c, v) in &terms[1..] {
            out += *v * Cx::new(*c, T::zero());
        }
        out
    }
}

impl<T: Real> FdValue<T> for CVector<T> {
    fn lincomb(terms: &[(T, &Self)]) -> Self {
        let (first_c, first) = terms[0];
        let mut out = first * Cx::new(first_c, T::zero());
        for (c, v) in &terms[1..] {
            out += *v * Cx::new(*c, T::zero());
        }
        out
    }
}

/// Central difference `(g(t+h) − g(t−h)) / 2h`.
pub fn finite_difference<T, V, G>(g: G, t: T, h: T) -> Result<V>
where
    T: Real,
    V: FdValue<T>,
    G: Fn(T) -> Result<V>,
{
    let forward = g(t + h)?;
    let backward = g(t - h)?;
    let w = T::one() / (h + h);
    Ok(V::lincomb(&[(w, &forward), (-w, &backward)]))
}

/// Second-order one-sided difference looking forward: `(−3g(t) + 4g(t+h) − g(t+2h)) / 2h`.
pub fn forward_difference<T, V, G>(g: G, t: T, h: T) -> Result<V>
where
    T: Real,
    V: FdValue<T>,
    G: Fn(T) -> Result<V>,
{
    let g0 = g(t)?;
    let g1 = g(t + h)?;
    let g2 = g(t + h + h)?;
    let w = T::one() / (h + h);
    Ok(V::lincomb(&[
        (-T::lit(3.0) * w, &g0),
        (T::lit(4.0) * w, &g1),
        (-w, &g2),
    ]))
}

/// Mirror image of [`forward_difference`].
pub fn backward_difference<T, V, G>(g: G, t: T, h: T) -> Result<V>
where
    T: Real,
    V: FdValue<T>,
    G: Fn(T) -> Result<V>,
{
    let g0 = g(t)?;
    let g1 = g(t - h)?;
    let g2 = g(t - h - h)?;
    let w = T::one() / (h + h);
    Ok(V::lincomb(&[
        (T::lit(3.0) * w, &g0),
        (-T::lit(4.0) * w, &g1),
        (w, &g2),
    ]))
}

/// Sample offsets and weights of the stencil [`bounded_difference`] uses at `t`.
pub fn bounded_stencil<T: Real>(t: T, h: T, lo: T, hi: T) -> Vec<(T, T)> {
    let w = T::one() / (h + h);
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    if t - h < lo {
        vec![(t, -three * w), (t + h, four * w), (t + h + h, -w)]
    } else if t + h > hi {
        vec![(t, three * w), (t - h, -four * w), (t - h - h, w)]
    } else {
        vec![(t + h, w), (t - h, -w)]
    }
}

/// Derivative on `[lo, hi]`: central where `t ± h` stays inside, one-sided otherwise.
pub fn bounded_difference<T, V, G>(g: G, t: T, h: T, lo: T, hi: T) -> Result<V>
where
    T: Real,
    V: FdValue<T>,
    G: Fn(T) -> Result<V>,
{
    let stencil = bounded_stencil(t, h, lo, hi);
    let values = stencil
        .iter()
        .map(|&(s, _)| g(s))
        .collect::<Result<Vec<V>>>()?;
    let terms: Vec<(T, &V)> = stencil.iter().map(|&(_, w)| w).zip(values.iter()).collect();
    Ok(V::lincomb(&terms))
}

/// Second-order derivative of samples on a (possibly nonuniform) grid of at least three points.
pub fn grid_derivative<T, V>(times: &[T], values: &[V]) -> Result<Vec<V>>
where
    T: Real,
    V: FdValue<T>,
{
    let n = times.len();
    if n < 3 || values.len() != n {
        return Err(Error::InvalidArgument(format!(
            "grid derivative needs >= 3 matching samples, got {n} times and {} values",
            values.len()
        )));
    }
    let weights = |i: usize| -> [(usize, T); 3] {
        if i == 0 {
            let (h1, h2) = (times[1] - times[0], times[2] - times[1]);
            [
                (0, -(h1 + h1 + h2) / (h1 * (h1 + h2))),
                (1, (h1 + h2) / (h1 * h2)),
                (2, -h1 / (h2 * (h1 + h2))),
            ]
        } else if i == n - 1 {
            let (h1, h2) = (times[n - 2] - times[n - 3], times[n - 1] - times[n - 2]);
            [
                (n - 3, h2 / (h1 * (h1 + h2))),
                (n - 2, -(h1 + h2) / (h1 * h2)),
                (n - 1, (h2 + h2 + h1) / (h2 * (h1 + h2))),
            ]
        } else {
            let (h1, h2) = (times[i] - times[i - 1], times[i + 1] - times[i]);
            [
                (i - 1, -h2 / (h1 * (h1 + h2))),
                (i, (h2 - h1) / (h1 * h2)),
                (i + 1, h1 / (h2 * (h1 + h2))),
            ]
        }
    };
    Ok((0..n)
        .map(|i| {
            let w = weights(i);
            V::lincomb(&[
                (w[0].1, &values[w[0].0]),
                (w[1].1, &values[w[1].0]),
                (w[2].1, &values[w[2].0]),
            ])
        })
        .collect())
}
