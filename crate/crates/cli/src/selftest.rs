//! Seeded internal consistency checks, one line per suite.

use adiabat_core::adiabatic::{gamma_mn, GammaForm};
use adiabat_core::embed::{build_effective_hamiltonian_with_coupling, embed_matrix};
use adiabat_core::model::master_rhs;
use adiabat_core::spectral::{decompose, EigenPath, TrackingOptions, DEFAULT_DEGENERACY_REL_TOL};
use adiabat_core::spin::{spin_model, SpinParams};
use adiabat_core::{random, Cx, Result};
use rand::Rng;

use crate::config::RunConfig;
use crate::CliError;

const FULL_CASES: usize = 48;
const QUICK_CASES: usize = 6;
const ORACLE_TOL: f64 = 1e-12;
const BIORTH_TOL: f64 = 1e-8;
const FORM_REL_TOL: f64 = 1e-4;
/// Structurally zero pairs carry differencing noise in the eigenvector form.
const FD_NOISE_FLOOR: f64 = 1e-8;
/// Differencing roundoff grows as the inverse squared gap.
const FD_GAP_NOISE: f64 = 1e-9;
const CLOSED_TOL: f64 = 1e-6;

struct Outcome {
    worst: f64,
    tol: f64,
    /// Seed of the worst case, enough to reproduce it.
    seed: u64,
}

type Suite = fn(u64, bool) -> Result<f64>;

/// `H_T vec(X)` against `i vec(L[X])` applied directly for a random `X`.
fn oracle_case(seed: u64, fault: bool) -> Result<f64> {
    let mut rng = random::rng(seed);
    let n = rng.random_range(2..=5);
    let jumps = rng.random_range(1..=3);
    let model = random::model::<f64, _>(&mut rng, n, jumps, (0.0, 4.0))?;
    let t = rng.random_range(0.0..4.0);
    let sign = if fault { -1.0 } else { 1.0 };
    let ht = build_effective_hamiltonian_with_coupling(&model, t, sign)?.matrix;
    let x = random::complex_matrix::<f64, _>(&mut rng, n, n, 1.0);
    let lhs = &ht * embed_matrix(&x).into_vector();
    let rhs = embed_matrix(&master_rhs(&model, t, &x)?).into_vector() * Cx::new(0.0, 1.0);
    Ok((lhs - &rhs).norm() / rhs.norm().max(1.0))
}

fn biorth_case(seed: u64, _: bool) -> Result<f64> {
    let mut rng = random::rng(seed);
    let n = rng.random_range(2..=16);
    let a = random::complex_matrix::<f64, _>(&mut rng, n, n, 1.0);
    let sd = decompose(&a, DEFAULT_DEGENERACY_REL_TOL)?;
    Ok(sd.biorthogonality_error(true).max(sd.completeness_error()))
}

fn spin_params(rng: &mut impl Rng, gamma: Option<f64>) -> Result<SpinParams<f64>> {
    SpinParams::new(
        gamma.unwrap_or_else(|| rng.random_range(0.1..3.0)),
        rng.random_range(0.01..1.0),
        rng.random_range(0.2..2.9),
    )
}

/// Relative disagreement of the two Γ forms beyond the noise floor.
fn forms_case(seed: u64, _: bool) -> Result<f64> {
    let mut rng = random::rng(seed);
    let model = spin_model(&spin_params(&mut rng, None)?)?;
    let t = rng.random_range(0.0..model.t_domain().1);
    let path = EigenPath::single(&model, t, TrackingOptions::default())?;
    let mut worst = 0.0f64;
    for m in 0..4 {
        for n in (0..4).filter(|&n| n != m) {
            let Ok(g1) = gamma_mn(&path, t, m, n, GammaForm::GeneratorDerivative) else {
                continue;
            };
            let g2 = gamma_mn(&path, t, m, n, GammaForm::EigenvectorDerivative)?;
            let gap = (path.spectra()[0].values[m] - path.spectra()[0].values[n]).norm_sqr();
            let floor = FD_NOISE_FLOOR.max(FD_GAP_NOISE / gap);
            worst = worst.max((g1 - g2).abs() / (g1 + floor / FORM_REL_TOL));
        }
    }
    Ok(worst)
}

/// Without dissipation the largest Γ is the two-level value `ω sinθ / 4`.
fn closed_case(seed: u64, _: bool) -> Result<f64> {
    let mut rng = random::rng(seed);
    let p = spin_params(&mut rng, Some(0.0))?;
    let model = spin_model(&p)?.without_jumps();
    let t = rng.random_range(0.0..model.t_domain().1);
    let path = EigenPath::single(&model, t, TrackingOptions::default())?;
    let mut largest = 0.0f64;
    for m in 0..4 {
        for n in (0..4).filter(|&n| n != m) {
            if let Ok(g) = gamma_mn(&path, t, m, n, GammaForm::GeneratorDerivative) {
                largest = largest.max(g);
            }
        }
    }
    let expect = p.omega * p.theta.sin() / 4.0;
    Ok((largest - expect).abs() / expect)
}

fn run_suite(run: Suite, tol: f64, base: u64, cases: usize, fault: bool) -> Result<Outcome> {
    let mut out = Outcome {
        worst: 0.0,
        tol,
        seed: base,
    };
    for k in 0..cases as u64 {
        let seed = base.wrapping_add(k);
        let e = run(seed, fault)?;
        if !(e <= out.worst) {
            out.worst = e;
            out.seed = seed;
        }
    }
    Ok(out)
}

pub fn run(cfg: &RunConfig, inject_fault: bool) -> Result<(), CliError> {
    let cases = if cfg.quick { QUICK_CASES } else { FULL_CASES };
    let suites: [(&str, Suite, f64); 4] = [
        ("embedding oracle", oracle_case, ORACLE_TOL),
        ("biorthonormality", biorth_case, BIORTH_TOL),
        ("Γ form agreement", forms_case, FORM_REL_TOL),
        ("closed-system reduction", closed_case, CLOSED_TOL),
    ];
    let mut failed = 0;
    for (k, (name, suite, tol)) in suites.into_iter().enumerate() {
        let base = cfg.seed.wrapping_add(1_000_003 * k as u64);
        match run_suite(suite, tol, base, cases, inject_fault) {
            Ok(o) if o.worst <= o.tol => {
                println!(
                    "PASS {name}: {cases} cases, worst {:.2e} (tol {:.0e})",
                    o.worst, o.tol
                );
            }
            Ok(o) => {
                failed += 1;
                println!(
                    "FAIL {name}: worst {:.2e} > {:.0e}, case seed {}",
                    o.worst, o.tol, o.seed
                );
            }
            Err(e) => {
                failed += 1;
                println!("FAIL {name}: {e} (seeds from {base})");
            }
        }
    }
    if failed > 0 {
        return Err(CliError::Failed(format!(
            "{failed} self-test suite(s) failed"
        )));
    }
    Ok(())
}
