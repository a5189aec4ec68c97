use adiabat_core::embed::build_effective_hamiltonian;
use adiabat_core::model::liouvillian_apply;
use adiabat_core::numerics::{CMatrix, CVector};
use adiabat_core::propagation::uniform_times;
use adiabat_core::spectral::{decompose, eigenstate_to_density, track_paths};
use adiabat_core::spin::{spin_eigen_closed_form, spin_model_on, SpinParams};
use proptest::prelude::*;
use std::f64::consts::PI;

fn projector(r: &CVector<f64>, l: &CVector<f64>) -> CMatrix<f64> {
    r * l.transpose()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn closed_forms_match_generic_pipeline(gamma in 0.01f64..3.0, theta in 0.1f64..PI - 0.1, phi in 0.0f64..2.0 * PI) {
        let p = SpinParams::new(gamma, 1.0, theta).unwrap();
        let cf = spin_eigen_closed_form(&p, phi).unwrap();
        let m = spin_model_on(&p, (0.0, 2.0 * PI)).unwrap();
        let ht = build_effective_hamiltonian(&m, phi).unwrap().matrix;
        let sd = decompose(&ht, 1e-8).unwrap();
        for (j, lam) in cf.values.iter().enumerate() {
            let k = (0..4).min_by(|&a, &b| (sd.values[a] - lam).norm().partial_cmp(&(sd.values[b] - lam).norm()).unwrap()).unwrap();
            prop_assert!((sd.values[k] - lam).norm() <= 1e-10);
            // projectors are independent of how the normalization is split
            let d = projector(&cf.right[j], &cf.left[j]) - projector(&sd.right[k], &sd.left[k]);
            prop_assert!(d.norm() <= 1e-8, "{j}: {}", d.norm());
        }
    }

    #[test]
    fn zero_mode_is_the_stationary_state(gamma in 0.01f64..3.0, theta in 0.1f64..PI - 0.1, phi in 0.0f64..2.0 * PI) {
        let p = SpinParams::new(gamma, 1.0, theta).unwrap();
        let cf = spin_eigen_closed_form(&p, phi).unwrap();
        let rho = eigenstate_to_density(&cf.right[0]).unwrap();
        let m = spin_model_on(&p, (0.0, 2.0 * PI)).unwrap();
        prop_assert!(liouvillian_apply(&m, phi, &rho).unwrap().norm() <= 1e-10 * rho.norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn eigenvalues_are_constant_along_a_period(gamma in 0.1f64..3.0, omega in 0.05f64..1.0, theta in 0.2f64..2.9) {
        let period = 2.0 * PI / omega;
        let m = spin_model_on(&SpinParams::new(gamma, omega, theta).unwrap(), (0.0, period)).unwrap();
        let path = track_paths(&m, &uniform_times(0.0, period, 200).unwrap(), 1e-8).unwrap();
        for k in 0..4 {
            let h = path.eigenvalue_history(k);
            prop_assert!(h.iter().all(|v| (v - h[0]).norm() <= 1e-10));
        }
    }
}
