//! Dissipative spin-1/2 in a rotating field: `H = B̂(t)·σ` with `φ = ωt`, one jump
//! operator `√γ σ₋`, energies in units of the field strength.
//!
//! Closed forms live in the embedded basis `{gg, ge, eg, ee}` (system letter first).

use std::path::Path;

use crate::adiabatic::{gamma_sweep, SweepOptions, SweepResult};
use crate::error::{Error, Result};
use crate::model::{Builtin, LindbladModel, OperatorSchedule};
use crate::numerics::cubic::solve_cubic;
use crate::numerics::matrix::{CMatrix, CVector};
use crate::scalar::{abs, cis, cr, csqrt, Cx, Real};

/// Field polar angle used for the Γ(γ, ω) surface.
pub const SURFACE_THETA: f64 = std::f64::consts::FRAC_PI_4;
/// Denominators below this magnitude make the closed-form vectors unusable.
pub const MIN_DENOMINATOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinParams<T> {
    /// Decay rate over field strength.
    pub gamma: T,
    /// Rotation frequency of the field azimuth.
    pub omega: T,
    /// Field polar angle.
    pub theta: T,
}

impl<T: Real> SpinParams<T> {
    pub fn new(gamma: T, omega: T, theta: T) -> Result<Self> {
        let p = Self {
            gamma,
            omega,
            theta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= T::zero() && self.gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be finite and >= 0, got {}",
                self.gamma
            )));
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidArgument("omega must be finite".into()));
        }
        if !(self.theta >= T::zero() && self.theta <= T::pi()) {
            return Err(Error::InvalidArgument(format!(
                "theta must lie in [0, π], got {}",
                self.theta
            )));
        }
        Ok(())
    }

    /// One driving period `2π/|ω|`, or `2π` for a static field.
    pub fn default_horizon(&self) -> T {
        let two_pi = T::two_pi();
        if self.omega == T::zero() {
            two_pi
        } else {
            (two_pi / self.omega.abs()).max(two_pi)
        }
    }

    fn check_closed_form(&self) -> Result<()> {
        self.validate()?;
        if self.gamma == T::zero() {
            return Err(Error::Degenerate(
                "closed forms need gamma > 0 (λ = 0 is doubly degenerate)".into(),
            ));
        }
        if self.theta.sin().abs() < T::lit(MIN_DENOMINATOR) {
            return Err(Error::Degenerate("closed forms need sinθ ≠ 0".into()));
        }
        Ok(())
    }
}

/// Spin model on `[0, default_horizon]`.
pub fn spin_model<T: Real>(p: &SpinParams<T>) -> Result<LindbladModel<T>> {
    spin_model_on(p, (T::zero(), p.default_horizon()))
}

pub fn spin_model_on<T: Real>(p: &SpinParams<T>, t_domain: (T, T)) -> Result<LindbladModel<T>> {
    p.validate()?;
    let h = OperatorSchedule::builtin(Builtin::RotatingFieldSpin {
        theta: p.theta,
        omega: p.omega,
        phi0: T::zero(),
        b0: T::one(),
    });
    let l = OperatorSchedule::builtin(Builtin::SigmaMinus { rate: p.gamma });
    LindbladModel::new(h, vec![l], t_domain)
}

/// Effective Hamiltonian at field azimuth `phi`, written out entry by entry.
pub fn spin_effective_closed_form<T: Real>(p: &SpinParams<T>, phi: T) -> Result<CMatrix<T>> {
    p.validate()?;
    let (s, c, g) = (p.theta.sin(), p.theta.cos(), p.gamma);
    let ep = cis(phi) * s;
    let em = cis(-phi) * s;
    let z = cr(T::zero());
    let ig = Cx::new(T::zero(), g);
    let half_ig = Cx::new(T::zero(), g * T::lit(0.5));
    let two_c = cr(c * T::lit(2.0));
    #[rustfmt::skip]
    let entries = [
        z,   -em,           ep,            ig,
        -ep, -two_c - half_ig, z,          ep,
        em,  z,             two_c - half_ig, -em,
        z,   em,            -ep,           -ig,
    ];
    Ok(CMatrix::from_row_slice(4, 4, &entries))
}

/// Coefficients `[1, iγ/2, −4, −2iγcos²θ]` of the cubic in `μ = λ + iγ/2` whose roots are the
/// nonzero eigenvalues.
pub fn shifted_cubic<T: Real>(p: &SpinParams<T>) -> [Cx<T>; 4] {
    let g = p.gamma;
    let c2 = p.theta.cos().powi(2);
    [
        cr(T::one()),
        Cx::new(T::zero(), g * T::lit(0.5)),
        cr(T::lit(-4.0)),
        Cx::new(T::zero(), -T::lit(2.0) * g * c2),
    ]
}

/// Closed-form biorthogonal eigensystem; index 0 is the stationary branch `λ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinEigensystem<T: Real> {
    pub values: Vec<Cx<T>>,
    /// `R_j = (a, b, c, d)/√M_j`.
    pub right: Vec<CVector<T>>,
    /// Row coefficients `(A, B, C, D)/√M_j`.
    pub left: Vec<CVector<T>>,
    /// `M_j = Aa + Bb + Cc + Dd` before normalization.
    pub norms: Vec<Cx<T>>,
}

fn guard<T: Real>(z: Cx<T>, what: &str) -> Result<Cx<T>> {
    if abs(z) < T::lit(MIN_DENOMINATOR) {
        return Err(Error::Degenerate(format!(
            "closed-form denominator {what} vanishes"
        )));
    }
    Ok(z)
}

/// Eigenvalues and eigenvectors at azimuth `phi`; rejects `γ = 0` and `sinθ = 0`.
pub fn spin_eigen_closed_form<T: Real>(p: &SpinParams<T>, phi: T) -> Result<SpinEigensystem<T>> {
    p.check_closed_form()?;
    let (s, c, g) = (p.theta.sin(), p.theta.cos(), p.gamma);
    let half_ig = Cx::new(T::zero(), g * T::lit(0.5));
    let ig = Cx::new(T::zero(), g);
    let two_c = cr(c * T::lit(2.0));
    let two = cr(T::lit(2.0));
    let (ep, em) = (cis(phi), cis(-phi));

    let mut values = vec![cr(T::zero())];
    let mut raw: Vec<([Cx<T>; 4], [Cx<T>; 4])> = Vec::with_capacity(4);

    // stationary branch; the numerator of b, c is (2cosθ ∓ iγ/2), the phase multiplies all of it
    let a1 = cr(T::one() + (c * c * T::lit(4.0) + g * g * T::lit(0.25)) / (s * s));
    let b1 = -(two_c - half_ig) * ep / cr(s);
    let c1 = -(two_c + half_ig) * em / cr(s);
    let one = cr(T::one());
    let zero = cr(T::zero());
    raw.push(([a1, b1, c1, one], [one, zero, zero, one]));

    let [k3, k2, k1, k0] = shifted_cubic(p);
    for mu in solve_cubic(k3, k2, k1, k0)? {
        let lam = mu - half_ig;
        values.push(lam);
        let plus = two_c + half_ig + lam;
        let minus = guard(two_c - half_ig - lam, "2cosθ − iγ/2 − λ")?;
        let a = -plus;
        let b = two * ep * s;
        let cc = two * plus * em * s / minus;
        let d = -a;
        let big_a = -(two_c - half_ig + lam);
        let big_d = (ig - lam) / guard(ig + lam, "iγ + λ")? * big_a;
        let big_b = em * s * (big_d - big_a) / guard(plus, "2cosθ + iγ/2 + λ")?;
        let big_c = ep * s * (big_d - big_a) / minus;
        raw.push(([a, b, cc, d], [big_a, big_b, big_c, big_d]));
    }

    let mut right = Vec::with_capacity(4);
    let mut left = Vec::with_capacity(4);
    let mut norms = Vec::with_capacity(4);
    for (r, l) in raw {
        let m = r
            .iter()
            .zip(&l)
            .fold(cr(T::zero()), |acc, (x, y)| acc + *x * *y);
        if abs(m) < T::lit(MIN_DENOMINATOR) {
            return Err(Error::NonDiagonalizable {
                condition: f64::INFINITY,
            });
        }
        let root = csqrt(m);
        right.push(CVector::from_iterator(4, r.iter().map(|&x| x / root)));
        left.push(CVector::from_iterator(4, l.iter().map(|&x| x / root)));
        norms.push(m);
    }
    Ok(SpinEigensystem {
        values,
        right,
        left,
        norms,
    })
}

/// Γ(γ, ω) surface of the spin model at polar angle `theta`.
pub fn gamma_surface<T: Real>(
    theta: T,
    gammas: &[T],
    omegas: &[T],
    options: &SweepOptions<T>,
) -> Result<SweepResult<T>> {
    gamma_sweep(theta, gammas, omegas, options)
}

/// Writes `gamma_surface.csv` and `meta.json` into `dir`.
pub fn write_gamma_surface<T: Real>(result: &SweepResult<T>, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    result.write_csv(&dir.join("gamma_surface.csv"))?;
    result.write_json(&dir.join("meta.json"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::build_effective_hamiltonian;
    use crate::model::validate_model;
    use crate::numerics::matrix::max_abs_diff;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn static_field_along_z_is_diagonal() {
        let p = SpinParams::new(0.3, 0.0, 0.0).unwrap();
        let h = spin_model(&p).unwrap().hamiltonian_at(1.0).unwrap();
        assert_eq!(h[(0, 0)], cr(-1.0));
        assert_eq!(h[(1, 1)], cr(1.0));
        assert_eq!(h[(0, 1)].norm(), 0.0);
    }

    #[test]
    fn models_validate_and_domain_covers_a_period() {
        for (g, w) in [(0.0, 0.1), (1.0, 2.0), (0.5, 0.0)] {
            let p = SpinParams::new(g, w, 1.0).unwrap();
            let m = spin_model(&p).unwrap();
            assert!(validate_model(&m, 9).passed);
            assert!(m.t_domain().1 >= 2.0 * PI - 1e-12);
        }
        assert!(SpinParams::new(-0.1, 0.1, 1.0).is_err());
        assert!(SpinParams::new(0.1, 0.1, 4.0).is_err());
    }

    #[test]
    fn closed_form_generator_matches_generic_construction() {
        let p = SpinParams::new(0.7, 0.4, 1.1).unwrap();
        let m = spin_model(&p).unwrap();
        for &t in &[0.0, 1.3, 7.9] {
            let generic = build_effective_hamiltonian(&m, t).unwrap().matrix;
            let closed = spin_effective_closed_form(&p, p.omega * t).unwrap();
            assert!(max_abs_diff(&generic, &closed) < 1e-14);
        }
    }

    #[test]
    fn closed_static_transverse_field_has_bohr_spectrum() {
        let p = SpinParams::new(0.0, 0.0, FRAC_PI_2).unwrap();
        let h = spin_effective_closed_form(&p, 0.0).unwrap();
        assert!(h.iter().all(|z| z.im.abs() < 1e-15));
        let ev = crate::numerics::eigenvalues(&h).unwrap();
        let expect = [-2.0, 0.0, 0.0, 2.0];
        for (v, e) in ev.iter().zip(expect) {
            assert!((v - cr(e)).norm() < 1e-12);
        }
    }

    #[test]
    fn closed_form_pairs_are_eigenvectors_and_biorthonormal() {
        let p = SpinParams::new(0.8, 0.2, 0.9).unwrap();
        let phi = 0.6;
        let h = spin_effective_closed_form(&p, phi).unwrap();
        let es = spin_eigen_closed_form(&p, phi).unwrap();
        for j in 0..4 {
            let r = &es.right[j];
            let l = &es.left[j];
            assert!((&h * r - r * es.values[j]).norm() < 1e-12);
            assert!((h.transpose() * l - l * es.values[j]).norm() < 1e-12);
            for k in 0..4 {
                let target = if j == k { 1.0 } else { 0.0 };
                assert!((l.dot(&es.right[k]) - cr(target)).norm() < 1e-12);
            }
        }
        let sum: Cx<f64> = es.values.iter().sum();
        assert!((sum - Cx::new(0.0, -2.0 * p.gamma)).norm() < 1e-12);
    }

    #[test]
    fn degenerate_parameters_are_rejected() {
        let closed = SpinParams::new(0.0, 0.1, FRAC_PI_4).unwrap();
        assert!(spin_eigen_closed_form(&closed, 0.0)
            .unwrap_err()
            .is_degeneracy());
        let polar = SpinParams::new(0.5, 0.1, 0.0).unwrap();
        assert!(spin_eigen_closed_form(&polar, 0.0)
            .unwrap_err()
            .is_degeneracy());
    }
}
