//! Adaptive Dormand–Prince 5(4) integrator for complex vector fields.
//!
//! Steps are controlled on the embedded error estimate per unit step, which
//! makes the global error shrink faster than linearly with the tolerances.

use serde::{Deserialize, Serialize};

use super::matrix::CVector;
use crate::error::{Error, Result};
use crate::scalar::{abs, Cx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_step: T,
    pub min_step: T,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-9),
            abs_tol: T::lit(1e-11),
            max_step: T::lit(1.0),
            min_step: T::lit(1e-12),
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn with_tolerances(rel_tol: T, abs_tol: T) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: T| x > T::zero() && x.is_finite();
        if !(positive(self.rel_tol) && positive(self.abs_tol)) {
            return Err(Error::InvalidArgument(
                "integrator tolerances must be positive".into(),
            ));
        }
        if !(positive(self.min_step) && self.min_step <= self.max_step) {
            return Err(Error::InvalidArgument(
                "integrator steps must satisfy 0 < min_step <= max_step".into(),
            ));
        }
        Ok(())
    }
}

/// Accepted steps of an integration, endpoints included.
#[derive(Debug, Clone)]
pub struct OdeTrajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<CVector<T>>,
}

impl<T: Real> OdeTrajectory<T> {
    pub fn last(&self) -> (T, &CVector<T>) {
        let k = self.times.len() - 1;
        (self.times[k], &self.states[k])
    }
}

// Dormand–Prince tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// b5 − b4
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Stepper<T: Real> {
    cfg: IntegratorConfig<T>,
    h: Option<T>,
    // FSAL derivative at the current point.
    k_first: Option<CVector<T>>,
}

fn axpy_into<T: Real>(out: &mut CVector<T>, a: T, x: &CVector<T>) {
    if a != T::zero() {
        out.axpy(Cx::new(a, T::zero()), x, Cx::new(T::one(), T::zero()));
    }
}

impl<T: Real> Stepper<T> {
    fn new(cfg: IntegratorConfig<T>) -> Self {
        Self {
            cfg,
            h: None,
            k_first: None,
        }
    }

    fn scaled_norm(&self, v: &CVector<T>, y0: &CVector<T>, y1: &CVector<T>) -> T {
        let n = v.len().max(1);
        let mut acc = T::zero();
        for i in 0..v.len() {
            let sc = self.cfg.abs_tol + self.cfg.rel_tol * abs(y0[i]).max(abs(y1[i]));
            let r = abs(v[i]) / sc;
            acc += r * r;
        }
        (acc / T::from_usize(n).unwrap()).sqrt()
    }

    fn initial_step(&self, f0: &CVector<T>, y0: &CVector<T>, span: T) -> T {
        let d0 = self.scaled_norm(y0, y0, y0);
        let d1 = self.scaled_norm(f0, y0, y0);
        let h = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
            T::lit(1e-6)
        } else {
            T::lit(0.01) * d0 / d1
        };
        h.min(self.cfg.max_step).min(span).max(self.cfg.min_step)
    }

    /// Advances `(t, y)` to exactly `target`, calling `on_accept` after every accepted step.
    fn advance<F, A>(
        &mut self,
        f: &mut F,
        t: &mut T,
        y: &mut CVector<T>,
        target: T,
        mut on_accept: A,
    ) -> Result<()>
    where
        F: FnMut(T, &CVector<T>) -> Result<CVector<T>>,
        A: FnMut(T, &CVector<T>),
    {
        if !(*t < target) {
            return Ok(());
        }
        let mut k1 = match self.k_first.take() {
            Some(k) => k,
            None => f(*t, y)?,
        };
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(&k1, y, target - *t),
        };

        loop {
            let remaining = target - *t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };

            let mut ks: Vec<CVector<T>> = Vec::with_capacity(7);
            ks.push(k1.clone());
            for s in 1..7 {
                let mut ys = y.clone();
                for (j, k) in ks.iter().enumerate() {
                    axpy_into(&mut ys, step * T::lit(A[s][j]), k);
                }
                ks.push(f(*t + step * T::lit(C[s]), &ys)?);
            }
            // 5th-order solution equals the last stage argument (FSAL).
            let mut y_new = y.clone();
            for (j, k) in ks.iter().take(6).enumerate() {
                axpy_into(&mut y_new, step * T::lit(A[6][j]), k);
            }
            let mut err = CVector::zeros(y.len());
            for (j, k) in ks.iter().enumerate() {
                axpy_into(&mut err, step * T::lit(E[j]), k);
            }
            // error per unit step, with max_step as the time unit
            let err_norm = self.scaled_norm(&err, y, &y_new) * (self.cfg.max_step / step);
            if !err_norm.is_finite() {
                return Err(Error::NonFinite(format!(
                    "ode step at t = {}",
                    t.to_f64_lossy()
                )));
            }

            let factor = if err_norm == T::zero() {
                T::lit(5.0)
            } else {
                (T::lit(0.9) * err_norm.powf(T::lit(-0.25)))
                    .min(T::lit(5.0))
                    .max(T::lit(0.2))
            };

            if err_norm <= T::one() {
                *t = if last { target } else { *t + step };
                *y = y_new;
                k1 = ks.pop().unwrap();
                on_accept(*t, y);
                // keep the pre-truncation step for the next call
                let grown = if last && step < h { h } else { step * factor };
                h = grown.min(self.cfg.max_step).max(self.cfg.min_step);
                if last {
                    self.h = Some(h);
                    self.k_first = Some(k1);
                    return Ok(());
                }
            } else {
                let shrunk = step * factor;
                if shrunk < self.cfg.min_step {
                    return Err(Error::Stiffness {
                        t: t.to_f64_lossy(),
                    });
                }
                h = shrunk.min(self.cfg.max_step);
            }
        }
    }
}

/// Integrates `dy/dt = f(t, y)` on `[t0, t1]`, returning every accepted step.
pub fn integrate_ode<T, F>(
    mut f: F,
    y0: &CVector<T>,
    t0: T,
    t1: T,
    cfg: &IntegratorConfig<T>,
) -> Result<OdeTrajectory<T>>
where
    T: Real,
    F: FnMut(T, &CVector<T>) -> Result<CVector<T>>,
{
    cfg.validate()?;
    if !(t1 > t0) {
        return Err(Error::InvalidArgument(
            "integrate_ode requires t1 > t0".into(),
        ));
    }
    let mut stepper = Stepper::new(*cfg);
    let mut traj = OdeTrajectory {
        times: vec![t0],
        states: vec![y0.clone()],
    };
    let (mut t, mut y) = (t0, y0.clone());
    stepper.advance(&mut f, &mut t, &mut y, t1, |tt, yy| {
        traj.times.push(tt);
        traj.states.push(yy.clone());
    })?;
    Ok(traj)
}

/// Integrates through increasing `times`, returning the state at each one (`times[0]` maps to `y0`).
pub fn integrate_to_times<T, F>(
    mut f: F,
    y0: &CVector<T>,
    times: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Vec<CVector<T>>>
where
    T: Real,
    F: FnMut(T, &CVector<T>) -> Result<CVector<T>>,
{
    cfg.validate()?;
    if times.is_empty() {
        return Err(Error::InvalidArgument("no output times".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "output times must be strictly increasing".into(),
        ));
    }
    let mut stepper = Stepper::new(*cfg);
    let mut out = Vec::with_capacity(times.len());
    out.push(y0.clone());
    let (mut t, mut y) = (times[0], y0.clone());
    for &target in &times[1..] {
        stepper.advance(&mut f, &mut t, &mut y, target, |_, _| {})?;
        out.push(y.clone());
    }
    Ok(out)
}
