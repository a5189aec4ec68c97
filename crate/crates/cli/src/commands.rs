//! Subcommands that write result files into the output directory.

use std::fmt::Write as _;
use std::time::Instant;

use adiabat_core::adiabatic::SweepResult;
use adiabat_core::adiabatic::{
    adiabatic_error, adiabatic_propagate, gamma_max, GammaForm, SweepOptions,
};
use adiabat_core::embed::{build_effective_hamiltonian, embed_density};
use adiabat_core::model::{DensityMatrix, LindbladModel};
use adiabat_core::numerics::trace_distance;
use adiabat_core::parallel::thread_cap;
use adiabat_core::propagation::{
    compare_trajectories, model_hash, propagate_embedded_at, propagate_master_at, uniform_times,
    Representation, Trajectory, TrajectoryMeta,
};
use adiabat_core::rotated::{build_frame, high_order_gamma_max, rotate_model};
use adiabat_core::spectral::{
    decompose, eigenstate_to_density, EigenPath, TrackingOptions, DEFAULT_DEGENERACY_REL_TOL,
};
use adiabat_core::spin::{gamma_surface, spin_eigen_closed_form, spin_model_on};
use adiabat_core::Error;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::{stage, CliError, InitialState, PropagatorName};

/// Output states of the rotated propagator sit on every `ROTATED_REFINE`-th frame node.
pub const ROTATED_REFINE: usize = 8;
pub const QUICK_SAMPLES: usize = 41;
pub const QUICK_GRID: usize = 8;

fn write(cfg: &RunConfig, name: &str, contents: &str) -> Result<(), CliError> {
    let path = cfg.path(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Stage {
        stage: format!("writing {}", path.display()),
        source: e.into(),
    })
}

fn write_json(cfg: &RunConfig, name: &str, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    write(cfg, name, &(text + "\n"))
}

/// `meta.json`: tool version, resolved configuration, tolerances and wall-clock time.
fn write_meta(cfg: &RunConfig, started: Instant, extra: Value) -> Result<(), CliError> {
    let tracking = TrackingOptions::<f64>::default();
    let mut meta = json!({
        "tool": "adiabat",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "tolerances": {
            "rel_tol": cfg.rel_tol,
            "abs_tol": cfg.abs_tol,
            "degeneracy_rel_tol": tracking.degeneracy_rel_tol,
            "fd_step": tracking.fd_step,
        },
        "threads": thread_cap()?,
        "wall_clock_s": started.elapsed().as_secs_f64(),
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut meta, extra) {
        m.extend(e);
    }
    write_json(cfg, "meta.json", &meta)
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let started = Instant::now();
    let model = cfg.load()?;
    let t = model.t_domain().0;
    let ht = stage(
        "building the effective Hamiltonian",
        build_effective_hamiltonian(&model, t),
    )?
    .matrix;
    let sd = stage(
        "decomposing the effective Hamiltonian",
        decompose(&ht, DEFAULT_DEGENERACY_REL_TOL),
    )?;
    let conds = sd.condition_numbers();
    let mut csv = String::from("index,re,im,degenerate,condition\n");
    for (k, v) in sd.values.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{k},{},{},{},{}",
            f(v.re),
            f(v.im),
            u8::from(sd.degenerate[k]),
            f(conds[k])
        );
    }
    write(cfg, "eigenvalues.csv", &csv)?;
    let (right, left) = sd.residuals(&ht);
    let degenerate: Vec<usize> = (0..sd.len()).filter(|&k| sd.degenerate[k]).collect();
    write_json(
        cfg,
        "biorth_residuals.json",
        &json!({
            "time": t,
            "dim": sd.len(),
            "biorthogonality_error": sd.biorthogonality_error(true),
            "completeness_error": sd.completeness_error(),
            "reconstruction_error": (sd.reconstruct() - &ht).norm() / ht.norm().max(f64::MIN_POSITIVE),
            "right_residual": right,
            "left_residual": left,
            "condition_numbers": conds,
            "degeneracy_threshold": sd.degeneracy_threshold,
            "degenerate_indices": degenerate,
        }),
    )?;
    write_meta(cfg, started, json!({ "time": t }))?;
    if !degenerate.is_empty() {
        return Err(Error::Degenerate(format!(
            "eigenvalues {degenerate:?} coincide within {:.3e}; Γ is undefined for those pairs",
            sd.degeneracy_threshold
        ))
        .into());
    }
    Ok(())
}

fn run_sweep(cfg: &RunConfig) -> Result<SweepResult<f64>, CliError> {
    let theta = cfg.spin_params()?.theta;
    let mut gammas = cfg.grid_gamma;
    let mut omegas = cfg.grid_omega;
    if cfg.quick {
        gammas.count = gammas.count.min(QUICK_GRID);
        omegas.count = omegas.count.min(QUICK_GRID);
    }
    stage(
        "Γ sweep",
        gamma_surface(
            theta,
            &gammas.points(),
            &omegas.points(),
            &SweepOptions::default(),
        ),
    )
}

fn sweep_meta(result: &SweepResult<f64>) -> Result<Value, CliError> {
    let text = result.to_json()?;
    Ok(json!({ "sweep": serde_json::from_str::<Value>(&text).map_err(Error::from)? }))
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let started = Instant::now();
    let result = run_sweep(cfg)?;
    write(cfg, "gamma_surface.csv", &result.to_csv())?;
    write_meta(cfg, started, sweep_meta(&result)?)
}

fn initial_state(
    model: &LindbladModel<f64>,
    which: InitialState,
) -> Result<DensityMatrix<f64>, CliError> {
    let n = model.dim();
    Ok(match which {
        InitialState::Ground => DensityMatrix::basis_state(n, 0)?,
        InitialState::Excited => DensityMatrix::basis_state(n, n - 1)?,
        InitialState::Mixed => DensityMatrix::maximally_mixed(n),
        InitialState::Stationary => {
            let t0 = model.t_domain().0;
            let path = stage(
                "stationary state",
                EigenPath::single(model, t0, TrackingOptions::default()),
            )?;
            let sd = &path.spectra()[0];
            let k = (0..sd.len())
                .min_by(|&a, &b| sd.values[a].norm().total_cmp(&sd.values[b].norm()))
                .unwrap_or(0);
            let rho = eigenstate_to_density(&sd.right[k])?;
            let tr = rho.trace();
            stage("stationary state", DensityMatrix::new(rho / tr))?
        }
    })
}

fn rotated_trajectory(
    model: &LindbladModel<f64>,
    rho0: &DensityMatrix<f64>,
    times: &[f64],
    cfg: &RunConfig,
) -> Result<Trajectory<f64>, CliError> {
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let nodes = (times.len() - 1) * ROTATED_REFINE + 1;
    let frame = stage(
        "building the eigenbasis frame",
        build_frame(model, &uniform_times(t0, t1, nodes)?),
    )?;
    let rotated = stage("rotating the model", rotate_model(model, &frame))?;
    let start = DensityMatrix::new(frame.rotate_state(0, rho0.matrix()))?;
    let tr = stage(
        "rotated propagation",
        propagate_master_at(&rotated, &start, times, &cfg.integrator()),
    )?;
    let states = tr
        .states
        .iter()
        .enumerate()
        .map(|(k, s)| frame.unrotate_state(k * ROTATED_REFINE, s))
        .collect();
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        meta: TrajectoryMeta {
            representation: Representation::Rotated,
            model_hash: model_hash(model)?,
            ..tr.meta
        },
    })
}

fn label(p: PropagatorName) -> &'static str {
    match p {
        PropagatorName::Master => "master",
        PropagatorName::Embedded => "embedded",
        PropagatorName::Adiabatic => "adiabatic",
        PropagatorName::Rotated => "rotated",
    }
}

pub fn compare(
    cfg: &RunConfig,
    propagators: &[PropagatorName],
    samples: usize,
    initial: InitialState,
) -> Result<(), CliError> {
    let started = Instant::now();
    let mut selected: Vec<PropagatorName> = Vec::new();
    for &p in propagators {
        if !selected.contains(&p) {
            selected.push(p);
        }
    }
    if selected.is_empty() {
        return Err(CliError::Usage("no propagators selected".into()));
    }
    let samples = if cfg.quick {
        samples.min(QUICK_SAMPLES)
    } else {
        samples
    };
    if samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let model = cfg.load()?;
    let (t0, t1) = model.t_domain();
    let times = uniform_times(t0, t1, samples)?;
    let rho0 = initial_state(&model, initial)?;
    let integ = cfg.integrator();
    let mut runs: Vec<(PropagatorName, Trajectory<f64>)> = Vec::new();
    for &p in &selected {
        let tr = match p {
            PropagatorName::Master => stage(
                "master propagation",
                propagate_master_at(&model, &rho0, &times, &integ),
            )?,
            PropagatorName::Embedded => stage(
                "embedded propagation",
                propagate_embedded_at(&model, &rho0, &times, &integ),
            )?,
            PropagatorName::Adiabatic => {
                let path = stage(
                    "tracking eigenpaths",
                    EigenPath::track(&model, &times, TrackingOptions::default()),
                )?;
                let ad = stage(
                    "adiabatic propagation",
                    adiabatic_propagate(&path, &embed_density(&rho0), t0, t1),
                )?;
                ad.to_trajectory(&model)?
            }
            PropagatorName::Rotated => rotated_trajectory(&model, &rho0, &times, cfg)?,
        };
        runs.push((p, tr));
    }

    let mut csv = String::new();
    for (k, (p, tr)) in runs.iter().enumerate() {
        let body = tr.to_csv();
        let mut lines = body.lines();
        let header = lines.next().unwrap_or("time");
        if k == 0 {
            let _ = writeln!(csv, "propagator,{header}");
        }
        for line in lines {
            let _ = writeln!(csv, "{},{line}", label(*p));
        }
    }
    write(cfg, "trajectories.csv", &csv)?;

    let mut pairs = Vec::new();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let r = compare_trajectories(&runs[i].1, &runs[j].1)?;
            pairs.push(json!({
                "a": label(runs[i].0),
                "b": label(runs[j].0),
                "max_trace_distance": r.max_distance,
                "final_trace_distance": r.distances.last().copied(),
            }));
        }
    }
    let mut report = json!({
        "initial_state": format!("{initial:?}").to_lowercase(),
        "t_domain": [t0, t1],
        "samples": samples,
        "model_hash": model_hash(&model)?,
        "pairs": pairs,
    });
    if selected.contains(&PropagatorName::Adiabatic) {
        if let Ok(p) = cfg.spin_params() {
            report["omega_scan"] = omega_scan(cfg, p, &rho0, (t0, t1), samples)?;
        }
    }
    write_json(cfg, "report.json", &report)?;
    write_meta(
        cfg,
        started,
        json!({ "propagators": selected.iter().map(|p| label(*p)).collect::<Vec<_>>() }),
    )
}

/// Adiabatic error on the same horizon as the driving slows down: ω, ω/2, ω/4, ω/8.
fn omega_scan(
    cfg: &RunConfig,
    p: adiabat_core::spin::SpinParams<f64>,
    rho0: &DensityMatrix<f64>,
    domain: (f64, f64),
    nodes: usize,
) -> Result<Value, CliError> {
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for k in 0..4 {
        let omega = p.omega / f64::from(1u32 << k);
        let q = adiabat_core::spin::SpinParams { omega, ..p };
        let m = spin_model_on(&q, domain)?;
        let r = stage(
            "adiabatic error scan",
            adiabatic_error(
                &m,
                rho0,
                domain.1,
                nodes,
                TrackingOptions::default(),
                &cfg.integrator(),
            ),
        )?;
        errors.push(r.trace_distance);
        rows.push(json!({ "omega": omega, "final_trace_distance": r.trace_distance }));
    }
    Ok(json!({
        "points": rows,
        "monotone_decreasing": errors.windows(2).all(|w| w[1] < w[0]),
    }))
}

pub fn rotated(cfg: &RunConfig, frame_nodes: usize) -> Result<(), CliError> {
    let started = Instant::now();
    let nodes = if cfg.quick {
        frame_nodes.min(201)
    } else {
        frame_nodes
    };
    if nodes < 3 {
        return Err(CliError::Usage("--frame-nodes must be at least 3".into()));
    }
    let model = cfg.load()?;
    let (t0, t1) = model.t_domain();
    let grid = uniform_times(t0, t1, nodes)?;
    let frame = stage("building the eigenbasis frame", build_frame(&model, &grid))?;
    let path = stage(
        "first-order spectrum",
        EigenPath::single(&model, t0, TrackingOptions::default()),
    )?;
    let (g1, pair1) = stage(
        "first-order Γ",
        gamma_max(&path, t0, GammaForm::GeneratorDerivative),
    )?;
    let (g2, pair2) = stage(
        "rotated-frame Γ",
        high_order_gamma_max(&model, &frame, t0, GammaForm::GeneratorDerivative),
    )?;

    let rho0 = initial_state(&model, InitialState::Excited)?;
    let rotated = stage("rotating the model", rotate_model(&model, &frame))?;
    let start = DensityMatrix::new(frame.rotate_state(0, rho0.matrix()))?;
    let ends = [t0, t1];
    let direct = stage(
        "direct propagation",
        propagate_master_at(&model, &rho0, &ends, &cfg.integrator()),
    )?;
    let moved = stage(
        "rotated propagation",
        propagate_master_at(&rotated, &start, &ends, &cfg.integrator()),
    )?;
    let back = frame.unrotate_state(nodes - 1, moved.final_state());
    let consistency = trace_distance(&back, direct.final_state())?;

    let n = frame.dim();
    let mut csv = String::from("time");
    for k in 0..n {
        let _ = write!(csv, ",E_{k}");
    }
    csv.push_str(",z_norm\n");
    for k in 0..frame.len() {
        let _ = write!(csv, "{}", f(frame.times[k]));
        for e in &frame.energies[k] {
            let _ = write!(csv, ",{}", f(*e));
        }
        let _ = writeln!(csv, ",{}", f(frame.z[k].norm()));
    }
    write(cfg, "frame.csv", &csv)?;
    write_json(
        cfg,
        "report.json",
        &json!({
            "frame_nodes": nodes,
            "unitarity_error": frame.unitarity_error(),
            "z_hermiticity_error": frame.z_hermiticity_error(),
            "first_order_gamma": { "time": t0, "value": g1, "pair": pair1 },
            "rotated_gamma": { "time": t0, "value": g2, "pair": pair2 },
            "round_trip_trace_distance": consistency,
        }),
    )?;
    write_meta(cfg, started, json!({}))
}

pub fn spin(cfg: &RunConfig) -> Result<(), CliError> {
    let started = Instant::now();
    let p = cfg.spin_params()?;
    let model = cfg.load()?;
    let t = model.t_domain().0;
    let phi = p.omega * t;
    let closed = stage("closed-form spectrum", spin_eigen_closed_form(&p, phi))?;
    let ht = build_effective_hamiltonian(&model, t)?.matrix;
    let generic = stage(
        "generic spectrum",
        decompose(&ht, DEFAULT_DEGENERACY_REL_TOL),
    )?;
    let mut csv = String::from("index,closed_re,closed_im,generic_re,generic_im,abs_diff\n");
    let mut worst = 0.0f64;
    for (j, lam) in closed.values.iter().enumerate() {
        let g = generic
            .values
            .iter()
            .min_by(|a, b| (*a - lam).norm().total_cmp(&(*b - lam).norm()))
            .copied()
            .unwrap_or(*lam);
        let d = (g - lam).norm();
        worst = worst.max(d);
        let _ = writeln!(
            csv,
            "{j},{},{},{},{},{}",
            f(lam.re),
            f(lam.im),
            f(g.re),
            f(g.im),
            f(d)
        );
    }
    write(cfg, "eigenvalues.csv", &csv)?;
    let result = run_sweep(cfg)?;
    write(cfg, "gamma_surface.csv", &result.to_csv())?;
    let mut extra = sweep_meta(&result)?;
    extra["closed_form"] = json!({ "phi": phi, "max_eigenvalue_deviation": worst });
    write_meta(cfg, started, extra)
}
