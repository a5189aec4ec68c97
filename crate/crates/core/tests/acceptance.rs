//! Acceptance suite: one line per criterion, tolerances and time budgets pinned below.
//!
//! Runs as a plain binary (`harness = false`). The process fails when any criterion fails,
//! except those listed in `KNOWN_RED`, which are reported as FAIL but do not abort the run.

use std::f64::consts::{FRAC_PI_4, PI};
use std::time::Instant;

use adiabat_core::adiabatic::{
    adiabatic_error, exact_frame_propagate, gamma_mn, trace_form_local, GammaForm, SweepOptions,
};
use adiabat_core::embed::{build_effective_hamiltonian, embed_density};
use adiabat_core::model::{DensityMatrix, LindbladModel};
use adiabat_core::numerics::eigen::trace_distance;
use adiabat_core::numerics::ode::IntegratorConfig;
use adiabat_core::numerics::{CMatrix, CVector};
use adiabat_core::propagation::{
    embedded_states, propagate_embedded_at, propagate_master_at, uniform_times,
};
use adiabat_core::rotated::{build_frame, rotate_model};
use adiabat_core::spectral::{decompose, eigenstate_to_density, EigenPath, TrackingOptions};
use adiabat_core::spin::{
    gamma_surface, spin_eigen_closed_form, spin_model, spin_model_on, SpinParams, SURFACE_THETA,
};
use adiabat_core::{random, Cx};
use rand::Rng;

type C = Cx<f64>;

/// Criteria allowed to fail without failing the run; each has a written analysis.
const KNOWN_RED: &[u8] = &[7];

const C1_TOL: f64 = 1e-12;
const C2_TOL: f64 = 1e-12;
const C3_CUBIC_TOL: f64 = 1e-10;
const C3_TRACE_TOL: f64 = 1e-12;
const C3_LIMIT_GAMMA: f64 = 1e-7;
const C3_LIMIT_TOL: f64 = 1e-6;
const C4_TOL: f64 = 1e-8;
const C5_REL_TOL: f64 = 1e-4;
/// Structurally zero pairs: the difference-quotient form carries O(1e-10) noise there.
const C5_FLOOR: f64 = 1e-8;
const C6_TOL: f64 = 1e-8;
const C7_LINEAR_TOL: f64 = 1e-6;
const C7_DECAY_RATIO: f64 = 0.1;
const C8_FRAME_TOL: f64 = 1e-6;
const C9_TOL: f64 = 1e-6;
const C9_MIN_REDUCTION: f64 = 2.0;
const C10_BIORTH_TOL: f64 = 1e-10;
const C10_COMPLETE_TOL: f64 = 1e-9;
const C10_RECON_TOL: f64 = 1e-9;

struct Check {
    id: u8,
    name: &'static str,
    budget_s: f64,
    run: fn() -> (bool, String),
}

fn i() -> C {
    C::new(0.0, 1.0)
}

fn max_abs(a: &CMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

fn unit(n: usize, a: usize, b: usize) -> CMatrix<f64> {
    let mut m = CMatrix::zeros(n, n);
    m[(a, b)] = C::new(1.0, 0.0);
    m
}

fn vec_rows(m: &CMatrix<f64>) -> CVector<f64> {
    let n = m.nrows();
    CVector::from_fn(n * n, |k, _| m[(k / n, k % n)])
}

fn unvec_rows(v: &CVector<f64>) -> CMatrix<f64> {
    let n = (v.len() as f64).sqrt().round() as usize;
    CMatrix::from_fn(n, n, |a, b| v[a * n + b])
}

/// `𝓛ρ = [H, ρ] + i Σ (LρL† − ½{L†L, ρ})`, assembled on matrix units.
fn liouvillian_oracle(h: &CMatrix<f64>, jumps: &[CMatrix<f64>]) -> CMatrix<f64> {
    let n = h.nrows();
    let mut s = CMatrix::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            let rho = unit(n, a, b);
            let mut out = h * &rho - &rho * h;
            for l in jumps {
                let ldl = l.adjoint() * l;
                let d = l * &rho * l.adjoint() - (&ldl * &rho + &rho * &ldl) * C::new(0.5, 0.0);
                out += d * i();
            }
            s.set_column(a * n + b, &vec_rows(&out));
        }
    }
    s
}

fn c1_embedding_oracle() -> (bool, String) {
    let mut rng = random::rng(101);
    let mut worst = 0.0f64;
    let count = 120;
    for k in 0..count {
        let n = 2 + k % 5;
        let m = random::model::<f64, _>(&mut rng, n, k % 3, (0.0, 5.0)).unwrap();
        let t = rng.random_range(0.0..5.0);
        let h = m.hamiltonian_at(t).unwrap();
        let jumps = m.jump_ops_at(t).unwrap();
        let oracle = liouvillian_oracle(&h, &jumps);
        let ht = build_effective_hamiltonian(&m, t).unwrap().matrix;
        let scale = max_abs(&oracle).max(1.0);
        worst = worst.max(max_abs(&(ht - &oracle)) / scale);
    }
    (
        worst <= C1_TOL,
        format!("{count} models N=2..6, max scaled deviation {worst:.2e} (tol {C1_TOL:.0e})"),
    )
}

/// The spin-model generator in the `{gg, ge, eg, ee}` basis, in units of the field strength.
fn explicit_spin_generator(gamma: f64, theta: f64, phi: f64) -> CMatrix<f64> {
    let (s, c) = (theta.sin(), theta.cos());
    let ep = C::from_polar(s, phi);
    let em = C::from_polar(s, -phi);
    let z = C::new(0.0, 0.0);
    let rows = [
        [z, -em, ep, C::new(0.0, gamma)],
        [-ep, C::new(-2.0 * c, -0.5 * gamma), z, ep],
        [em, z, C::new(2.0 * c, -0.5 * gamma), -em],
        [z, em, -ep, C::new(0.0, -gamma)],
    ];
    CMatrix::from_fn(4, 4, |r, k| rows[r][k])
}

fn c2_spin_generator() -> (bool, String) {
    let mut rng = random::rng(202);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let gamma = rng.random_range(0.0..5.0);
        let theta = rng.random_range(0.0..PI);
        let phi = rng.random_range(0.0..2.0 * PI);
        let p = SpinParams::new(gamma, 1.0, theta).unwrap();
        let m = spin_model_on(&p, (0.0, 2.0 * PI)).unwrap();
        let ht = build_effective_hamiltonian(&m, phi).unwrap().matrix;
        worst = worst.max(max_abs(&(ht - explicit_spin_generator(gamma, theta, phi))));
    }
    (
        worst <= C2_TOL,
        format!("50 draws of (γ, θ, φ), max entry deviation {worst:.2e} (tol {C2_TOL:.0e})"),
    )
}

fn general_eigenvalues(a: &CMatrix<f64>) -> Vec<C> {
    let mut v: Vec<C> = nalgebra::Schur::new(a.clone())
        .eigenvalues()
        .unwrap()
        .iter()
        .copied()
        .collect();
    v.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
    });
    v
}

fn spin_eigenvalues(gamma: f64, theta: f64, phi: f64) -> Vec<C> {
    let p = SpinParams::new(gamma, 1.0, theta).unwrap();
    let m = spin_model_on(&p, (0.0, 2.0 * PI)).unwrap();
    general_eigenvalues(&build_effective_hamiltonian(&m, phi).unwrap().matrix)
}

/// Residual of `μ³ + ½iγμ² − 4μ − rhs` at `μ = λ + ½iγ`.
fn cubic_residual(lambda: C, gamma: f64, rhs: C) -> f64 {
    let mu = lambda + C::new(0.0, 0.5 * gamma);
    (mu * mu * mu + C::new(0.0, 0.5 * gamma) * mu * mu - 4.0 * mu - rhs).norm()
}

fn c3_spin_spectrum() -> (bool, String) {
    let mut rng = random::rng(303);
    let (mut zero_err, mut cubic_err, mut trace_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut exact_zero = true;
    for _ in 0..30 {
        let gamma = rng.random_range(0.05..4.0);
        let theta = rng.random_range(0.1..PI - 0.1);
        let phi = rng.random_range(0.0..2.0 * PI);
        let vals = spin_eigenvalues(gamma, theta, phi);
        let k0 = (0..4)
            .min_by(|&a, &b| vals[a].norm().partial_cmp(&vals[b].norm()).unwrap())
            .unwrap();
        zero_err = zero_err.max(vals[k0].norm());
        let rhs = C::new(0.0, 2.0 * gamma * theta.cos().powi(2));
        for (k, &v) in vals.iter().enumerate() {
            if k != k0 {
                cubic_err = cubic_err.max(cubic_residual(v, gamma, rhs));
            }
        }
        let sum: C = vals.iter().sum();
        trace_err = trace_err.max((sum - C::new(0.0, -2.0 * gamma)).norm());
        let closed =
            spin_eigen_closed_form(&SpinParams::new(gamma, 1.0, theta).unwrap(), phi).unwrap();
        exact_zero &= closed.values[0] == C::new(0.0, 0.0);
    }
    let mut limit = spin_eigenvalues(C3_LIMIT_GAMMA, FRAC_PI_4, 0.3);
    limit.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    let target = [-2.0, 0.0, 0.0, 2.0];
    let limit_err = limit
        .iter()
        .zip(target)
        .fold(0.0f64, |m, (v, t)| m.max((v - t).norm()));

    // the variant cubic with γ² on the right coincides with the corrected one only at γ = 1
    let variant = |gamma: f64| {
        let vals = spin_eigenvalues(gamma, FRAC_PI_4, 0.0);
        let rhs = C::new(0.0, 2.0 * gamma * gamma * 0.5);
        vals.iter()
            .filter(|v| v.norm() > 1e-9)
            .fold(0.0f64, |m, &v| m.max(cubic_residual(v, gamma, rhs)))
    };
    let (variant_half, variant_one) = (variant(0.5), variant(1.0));

    let pass = exact_zero
        && zero_err <= C3_CUBIC_TOL
        && cubic_err <= C3_CUBIC_TOL
        && trace_err <= C3_TRACE_TOL
        && limit_err <= C3_LIMIT_TOL;
    (
        pass,
        format!(
            "λ=0 exact {exact_zero} (numeric |λ|min {zero_err:.1e}); cubic residual {cubic_err:.1e}; \
             Σλ+2iγ {trace_err:.1e}; γ→0 limit {limit_err:.1e}; γ² variant residual {variant_half:.1e} \
             at γ=0.5, {variant_one:.1e} at γ=1"
        ),
    )
}

fn max_distance(a: &[CMatrix<f64>], b: &[CMatrix<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |m, (x, y)| m.max(trace_distance(x, y).unwrap()))
}

fn c4_representations() -> (bool, String) {
    let cfg = IntegratorConfig::default();
    let mut rng = random::rng(404);
    let mut spin_worst = 0.0f64;
    for gamma in [0.2, 1.0, 3.0] {
        for omega in [0.05, 0.5] {
            let p = SpinParams::new(gamma, omega, FRAC_PI_4).unwrap();
            let m = spin_model(&p).unwrap();
            let rho0 = random::density(&mut rng, 2);
            let times = uniform_times(0.0, 2.0 * PI / omega, 41).unwrap();
            let a = propagate_master_at(&m, &rho0, &times, &cfg).unwrap();
            let b = propagate_embedded_at(&m, &rho0, &times, &cfg).unwrap();
            spin_worst = spin_worst.max(max_distance(&a.states, &b.states));
        }
    }
    let mut random_worst = 0.0f64;
    let horizon = 2.0 * PI / 0.2;
    for k in 0..20 {
        let n = 2 + k % 3;
        let m = random::model::<f64, _>(&mut rng, n, 1 + k % 2, (0.0, horizon)).unwrap();
        let rho0 = random::density(&mut rng, n);
        let times = uniform_times(0.0, horizon, 41).unwrap();
        let a = propagate_master_at(&m, &rho0, &times, &cfg).unwrap();
        let b = propagate_embedded_at(&m, &rho0, &times, &cfg).unwrap();
        random_worst = random_worst.max(max_distance(&a.states, &b.states));
    }
    (
        spin_worst.max(random_worst) <= C4_TOL,
        format!("spin max D {spin_worst:.2e}, 20 random N≤4 max D {random_worst:.2e} (tol {C4_TOL:.0e})"),
    )
}

fn c5_gamma_forms() -> (bool, String) {
    let mut rng = random::rng(505);
    let (mut worst_rel, mut worst_trace, mut pairs, mut excluded) = (0.0f64, 0.0f64, 0, 0);
    let mut pass = true;
    for _ in 0..100 {
        let gamma = rng.random_range(0.1..3.0);
        let omega = rng.random_range(0.05..1.0);
        let theta = rng.random_range(0.2..PI - 0.2);
        let t = rng.random_range(0.0..10.0);
        let m = spin_model_on(&SpinParams::new(gamma, omega, theta).unwrap(), (0.0, 20.0)).unwrap();
        let path = EigenPath::single(&m, t, TrackingOptions::default()).unwrap();
        let local = path.local(t).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                if a == b {
                    continue;
                }
                let g1 = match gamma_mn(&path, t, a, b, GammaForm::GeneratorDerivative) {
                    Ok(v) => v,
                    Err(_) => {
                        excluded += 1;
                        continue;
                    }
                };
                let g2 = gamma_mn(&path, t, a, b, GammaForm::EigenvectorDerivative).unwrap();
                let gap = (local.spectrum.values[a] - local.spectrum.values[b]).norm();
                let g3 = trace_form_local(&local, a, b).unwrap().norm() / gap;
                pairs += 1;
                for (g, worst) in [(g2, &mut worst_rel), (g3, &mut worst_trace)] {
                    pass &= (g1 - g).abs() <= C5_REL_TOL * g1 + C5_FLOOR;
                    if g1 > 1e3 * C5_FLOOR {
                        *worst = worst.max((g1 - g).abs() / g1);
                    }
                }
            }
        }
    }
    (
        pass,
        format!(
            "{pairs} pairs ({excluded} excluded), max rel deviation ⟨L|Ṙ⟩ form {worst_rel:.2e}, trace form \
             {worst_trace:.2e} (tol {C5_REL_TOL:.0e} + {C5_FLOOR:.0e})"
        ),
    )
}

fn sorted_hermitian_eigen(h: &CMatrix<f64>) -> (Vec<f64>, CMatrix<f64>) {
    let e = h.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..h.nrows()).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].partial_cmp(&e.eigenvalues[b]).unwrap());
    let vals = idx.iter().map(|&k| e.eigenvalues[k]).collect();
    let vecs = CMatrix::from_columns(
        &idx.iter()
            .map(|&k| e.eigenvectors.column(k).into_owned())
            .collect::<Vec<_>>(),
    );
    (vals, vecs)
}

/// `|⟨E_a|Ė_c⟩| / |E_a − E_c|` by central differences of parallel-phased eigenvectors.
fn closed_gamma(m: &LindbladModel<f64>, t: f64) -> (CMatrix<f64>, Vec<Vec<f64>>) {
    let h = 1e-5;
    let (e, v) = sorted_hermitian_eigen(&m.hamiltonian_at(t).unwrap());
    let n = e.len();
    let aligned = |s: f64| {
        let (_, mut w) = sorted_hermitian_eigen(&m.hamiltonian_at(s).unwrap());
        for k in 0..n {
            let ov = v.column(k).dotc(&w.column(k));
            let col = w.column(k) * (ov.conj() / ov.norm());
            w.set_column(k, &col);
        }
        w
    };
    let d = (aligned(t + h) - aligned(t - h)) / C::new(2.0 * h, 0.0);
    let q = (0..n)
        .map(|a| {
            (0..n)
                .map(|c| {
                    if a == c {
                        0.0
                    } else {
                        v.column(a).dotc(&d.column(c)).norm() / (e[a] - e[c]).abs()
                    }
                })
                .collect()
        })
        .collect();
    (v, q)
}

fn c6_closed_reduction() -> (bool, String) {
    let mut rng = random::rng(606);
    let mut models: Vec<(LindbladModel<f64>, f64)> = Vec::new();
    for (omega, theta) in [(0.3, 1.0), (0.05, FRAC_PI_4), (1.0, 2.5)] {
        let m = spin_model(&SpinParams::new(0.0, omega, theta).unwrap())
            .unwrap()
            .without_jumps();
        models.push((m, 1.3));
    }
    for _ in 0..3 {
        models.push((
            random::model::<f64, _>(&mut rng, 2, 0, (0.0, 5.0)).unwrap(),
            2.2,
        ));
    }
    let mut worst = 0.0f64;
    let mut analytic = 0.0f64;
    for (k, (m, t)) in models.iter().enumerate() {
        let (v, q) = closed_gamma(m, *t);
        let n = v.nrows();
        let path = EigenPath::single(m, *t, TrackingOptions::default()).unwrap();
        let local = path.local(*t).unwrap();
        // label each generator eigenvector by its product-state content E_a ⊗ E_b*
        let labels: Vec<(usize, usize)> = local
            .spectrum
            .right
            .iter()
            .map(|r| {
                let mut best = ((0, 0), -1.0);
                for a in 0..n {
                    for b in 0..n {
                        let p =
                            CVector::from_fn(n * n, |x, _| v[(x / n, a)] * v[(x % n, b)].conj());
                        let ov = p.dotc(r).norm();
                        if ov > best.1 {
                            best = ((a, b), ov);
                        }
                    }
                }
                best.0
            })
            .collect();
        for mi in 0..n * n {
            for ni in 0..n * n {
                if mi == ni {
                    continue;
                }
                let Ok(g) = gamma_mn(&path, *t, mi, ni, GammaForm::GeneratorDerivative) else {
                    continue;
                };
                let ((a, b), (c, d)) = (labels[mi], labels[ni]);
                let expect = if b == d && a != c {
                    q[a][c]
                } else if a == c && b != d {
                    q[b][d]
                } else {
                    0.0
                };
                worst = worst.max((g - expect).abs());
                if k == 0 && expect > 0.0 {
                    analytic = analytic.max((expect - 0.3 * 1.0f64.sin() / 4.0).abs());
                }
            }
        }
    }
    (
        worst <= C6_TOL && analytic <= C6_TOL,
        format!("3 spin + 3 random two-level models, max |Γ − Γ_closed| {worst:.2e}; FD oracle vs ω sinθ/4 {analytic:.1e} (tol {C6_TOL:.0e})"),
    )
}

fn c7_surface_trends() -> (bool, String) {
    let mut gammas: Vec<f64> = (0..28).map(|k| 0.3 + 0.1 * k as f64).collect();
    gammas.extend([10.0, 30.0]);
    let omegas: Vec<f64> = (1..=30).map(|k| 0.01 * k as f64).collect();
    let sweep = gamma_surface(SURFACE_THETA, &gammas, &omegas, &SweepOptions::default()).unwrap();
    let mut linear_dev = 0.0f64;
    for (r, _) in gammas.iter().enumerate() {
        let row: Vec<f64> = sweep
            .row(r)
            .iter()
            .zip(&omegas)
            .map(|(v, w)| v.unwrap() / w)
            .collect();
        linear_dev = linear_dev.max(
            row.iter()
                .fold(0.0f64, |m, x| m.max((x - row[0]).abs() / row[0])),
        );
    }
    let mut first_rise = None;
    for (j, _) in omegas.iter().enumerate() {
        let col = sweep.column(j);
        for k in 0..27 {
            if col[k + 1].unwrap() >= col[k].unwrap() && first_rise.is_none() {
                first_rise = Some((
                    gammas[k],
                    gammas[k + 1],
                    col[k].unwrap() / omegas[j],
                    col[k + 1].unwrap() / omegas[j],
                ));
            }
        }
    }
    let (i05, i10) = (2, 28);
    let ratio = (0..omegas.len())
        .map(|j| sweep.point(i10, j).value.unwrap() / sweep.point(i05, j).value.unwrap())
        .fold(0.0f64, f64::max);
    let linear = linear_dev <= C7_LINEAR_TOL;
    let decreasing = first_rise.is_none();
    let vanishing = ratio < C7_DECAY_RATIO;
    let rise = match first_rise {
        Some((g0, g1, a, b)) => {
            format!("Γ/ω rises {a:.4} → {b:.4} between γ={g0:.1} and γ={g1:.1}")
        }
        None => "strictly decreasing".into(),
    };
    (
        linear && decreasing && vanishing,
        format!(
            "ω-linearity dev {linear_dev:.1e} [{}]; decay on [0.3, 3]: {rise} [{}]; Γ(10)/Γ(0.5) = {ratio:.3} [{}]",
            ok(linear),
            ok(decreasing),
            ok(vanishing)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn stationary_state(m: &LindbladModel<f64>) -> DensityMatrix<f64> {
    let path = EigenPath::single(m, 0.0, TrackingOptions::default()).unwrap();
    let sd = &path.spectra()[0];
    let k = (0..sd.len())
        .min_by(|&a, &b| {
            sd.values[a]
                .norm()
                .partial_cmp(&sd.values[b].norm())
                .unwrap()
        })
        .unwrap();
    let rho = eigenstate_to_density(&sd.right[k]).unwrap();
    let tr = rho.trace();
    DensityMatrix::new(rho / tr).unwrap()
}

fn c8_adiabatic_propagator() -> (bool, String) {
    let cfg = IntegratorConfig::with_tolerances(1e-10, 1e-12);
    let mut rng = random::rng(808);
    let mut cases: Vec<(LindbladModel<f64>, f64, usize)> = vec![(
        spin_model_on(
            &SpinParams::new(0.5, 0.2, FRAC_PI_4).unwrap(),
            (0.0, 2.0 * PI / 0.2),
        )
        .unwrap(),
        2.0 * PI / 0.2,
        400,
    )];
    for _ in 0..4 {
        cases.push((
            random::model::<f64, _>(&mut rng, 2, 1, (0.0, 3.0)).unwrap(),
            3.0,
            60,
        ));
    }
    let mut frame_worst = 0.0f64;
    for (m, t1, nodes) in &cases {
        let rho0 = random::density(&mut rng, 2);
        let grid = uniform_times(0.0, *t1, *nodes + 1).unwrap();
        let path = EigenPath::track(m, &grid, TrackingOptions::default()).unwrap();
        let psi0 = embed_density(&rho0);
        let frame = exact_frame_propagate(&path, &psi0, 0.0, *t1, &cfg).unwrap();
        let exact = embedded_states(m, psi0.vector(), &grid, &cfg).unwrap();
        for (a, b) in frame.states.iter().zip(&exact) {
            frame_worst =
                frame_worst.max(trace_distance(&unvec_rows(a.vector()), &unvec_rows(b)).unwrap());
        }
    }
    let horizon = 2.0 * PI / 0.2;
    let errors: Vec<f64> = [0.2, 0.1, 0.05, 0.02]
        .iter()
        .map(|&w| {
            let m = spin_model_on(&SpinParams::new(0.5, w, FRAC_PI_4).unwrap(), (0.0, horizon))
                .unwrap();
            let rho0 = stationary_state(&m);
            adiabatic_error(&m, &rho0, horizon, 401, TrackingOptions::default(), &cfg)
                .unwrap()
                .trace_distance
        })
        .collect();
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    (
        frame_worst <= C8_FRAME_TOL && monotone,
        format!(
            "with coupling max D {frame_worst:.2e} (tol {C8_FRAME_TOL:.0e}); adiabatic error at ω=0.2,0.1,0.05,0.02: \
             {:.2e} {:.2e} {:.2e} {:.2e}",
            errors[0], errors[1], errors[2], errors[3]
        ),
    )
}

fn c9_rotated_frame() -> (bool, String) {
    let cfg = IntegratorConfig::with_tolerances(1e-11, 1e-13);
    let p = SpinParams::new(0.5, 0.5, FRAC_PI_4).unwrap();
    let m = spin_model(&p).unwrap();
    let t1 = m.t_domain().1;
    let rho0 = random::density(&mut random::rng(909), 2);
    let times = uniform_times(0.0, t1, 21).unwrap();
    let direct = propagate_master_at(&m, &rho0, &times, &cfg).unwrap();
    let error = |nodes: usize| {
        let f = build_frame(&m, &uniform_times(0.0, t1, nodes).unwrap()).unwrap();
        let rotated = rotate_model(&m, &f).unwrap();
        let start = DensityMatrix::new(f.rotate_state(0, rho0.matrix())).unwrap();
        let tr = propagate_master_at(&rotated, &start, &times, &cfg).unwrap();
        // output times sit on frame nodes: (nodes − 1) is a multiple of 20
        let stride = (nodes - 1) / 20;
        (0..times.len()).fold(0.0f64, |worst, k| {
            let back = f.unrotate_state(k * stride, &tr.states[k]);
            worst.max(trace_distance(&back, &direct.states[k]).unwrap())
        })
    };
    let (coarse, fine) = (error(801), error(1601));
    let reduction = coarse / fine;
    (
        fine <= C9_TOL && reduction >= C9_MIN_REDUCTION,
        format!("max D {coarse:.2e} at h=T/800, {fine:.2e} at h=T/1600, reduction {reduction:.2}× (tol {C9_TOL:.0e}, ≥{C9_MIN_REDUCTION}×)"),
    )
}

fn c10_biorthogonal_engine() -> (bool, String) {
    let mut rng = random::rng(1010);
    let (mut bi, mut comp, mut recon) = (0.0f64, 0.0f64, 0.0f64);
    let mut count = 0;
    for n in [2, 3, 4, 9, 16, 25, 36] {
        for _ in 0..4 {
            let a = random::complex_matrix::<f64, _>(&mut rng, n, n, 1.0);
            let sd = decompose(&a, 1e-8).unwrap();
            let r = CMatrix::from_columns(&sd.right);
            let l = CMatrix::from_rows(&sd.left.iter().map(|v| v.transpose()).collect::<Vec<_>>());
            let id = CMatrix::identity(n, n);
            bi = bi.max(max_abs(&(&l * &r - &id)));
            comp = comp.max(max_abs(&(&r * &l - &id)));
            let lam = CMatrix::from_diagonal(&CVector::from_vec(sd.values.clone()));
            recon = recon.max((&r * lam * &l - &a).norm() / a.norm());
            count += 1;
        }
    }
    (
        bi <= C10_BIORTH_TOL && comp <= C10_COMPLETE_TOL && recon <= C10_RECON_TOL,
        format!("{count} matrices up to 36×36: biorthonormality {bi:.1e}, completeness {comp:.1e}, reconstruction {recon:.1e}·‖A‖"),
    )
}

fn main() {
    let checks = [
        Check {
            id: 1,
            name: "embedding equals Liouvillian superoperator",
            budget_s: 10.0,
            run: c1_embedding_oracle,
        },
        Check {
            id: 2,
            name: "spin generator matches explicit 4×4 form",
            budget_s: 1.0,
            run: c2_spin_generator,
        },
        Check {
            id: 3,
            name: "spin spectrum closed forms",
            budget_s: 1.0,
            run: c3_spin_spectrum,
        },
        Check {
            id: 4,
            name: "master and embedded propagation agree",
            budget_s: 60.0,
            run: c4_representations,
        },
        Check {
            id: 5,
            name: "three forms of Γ agree",
            budget_s: 30.0,
            run: c5_gamma_forms,
        },
        Check {
            id: 6,
            name: "closed-system reduction of Γ",
            budget_s: 5.0,
            run: c6_closed_reduction,
        },
        Check {
            id: 7,
            name: "Γ(γ, ω) sweep trends",
            budget_s: 60.0,
            run: c7_surface_trends,
        },
        Check {
            id: 8,
            name: "adiabatic propagator soundness",
            budget_s: 120.0,
            run: c8_adiabatic_propagator,
        },
        Check {
            id: 9,
            name: "rotated-frame consistency",
            budget_s: 60.0,
            run: c9_rotated_frame,
        },
        Check {
            id: 10,
            name: "biorthogonal spectral engine",
            budget_s: 10.0,
            run: c10_biorthogonal_engine,
        },
    ];
    let mut unexpected = Vec::new();
    for c in &checks {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(c.run);
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match outcome {
            Ok((pass, detail)) => (pass && secs <= c.budget_s, detail),
            Err(_) => (false, "panicked".to_string()),
        };
        let timing = if secs <= c.budget_s {
            ""
        } else {
            " OVER BUDGET"
        };
        println!(
            "criterion {:>2} {} {}: {} [{secs:.2}s / {}s{timing}]",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.name,
            detail,
            c.budget_s
        );
        if !pass && !KNOWN_RED.contains(&c.id) {
            unexpected.push(c.id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
