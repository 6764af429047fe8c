// Copyright 2026 The transmon-drag Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use serde::{Deserialize, Serialize};
use transmon_core::lattice::{
    build_lattice, phase_operator, solve_eigensystem, transition_frequencies, EigenSystem,
    LatticeHamiltonian, TransmonParams,
};
use transmon_core::optimizer::{
    figure_of_merit, optimize_pulse, sweep, sweep_with_jobs, FidelityCurve, FomResult,
    OptimizedPulse,
};
use transmon_core::propagator::{
    evolve, evolve_lattice, full_fidelity, lattice_default_dt, leakage_population,
    two_state_fidelity, EvolveOptions,
};
use transmon_core::pulses::DriveSignal;
use transmon_core::spectra::{linewidth, power_spectrum, spectral_hole_depth};
use transmon_core::truncation::{truncate, ModelJson, TruncatedModel};
use transmon_core::{angular_to_ghz, Error as CoreError};

use crate::config::{detuning_mhz, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{num, opt_num, OutputDir};

/// Wavefunctions exported by `model`.
const EXPORTED_STATES: usize = 4;

struct Built {
    h: LatticeHamiltonian,
    eigs: EigenSystem,
    model: TruncatedModel,
}

fn build(cfg: &RunConfig) -> CliResult<Built> {
    let h = build_lattice(&cfg.params())?;
    let levels = cfg.model.dim.max(EXPORTED_STATES).min(h.len());
    let eigs = solve_eigensystem(&h, levels)?;
    let model = cfg.shape_model(truncate(&eigs, &phase_operator(&h), cfg.model.dim)?)?;
    Ok(Built { h, eigs, model })
}

#[derive(Debug, Serialize)]
struct ModelReport {
    params: TransmonParams,
    ec_ghz: f64,
    omega01_ghz: f64,
    omega12_ghz: f64,
    delta2_ghz: f64,
    delta2_over_omega01: f64,
    /// `sqrt(8 E_J E_C) - E_C`.
    analytic_omega01_ghz: f64,
    lambda12_over_lambda01: Option<f64>,
    lambda23_over_lambda01: Option<f64>,
    lambda03_over_lambda01: Option<f64>,
    model: ModelJson,
}

pub fn cmd_model(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let b = build(cfg)?;
    let tf = transition_frequencies(&b.eigs)?;
    let params = cfg.params();
    let ec = params.ec_ghz();
    // Ratios come from the unmodified projection so the coupling switch
    // does not hide them.
    let full = truncate(&b.eigs, &phase_operator(&b.h), b.eigs.levels())?;
    let ratio = |i: usize, j: usize| (j < full.dim()).then(|| full.lambda(i, j) / full.lambda01());
    let report = ModelReport {
        params,
        ec_ghz: ec,
        omega01_ghz: tf.omega01_ghz(),
        omega12_ghz: tf.omega12_ghz(),
        delta2_ghz: tf.delta2_ghz(),
        delta2_over_omega01: tf.relative_anharmonicity(),
        analytic_omega01_ghz: (8.0 * params.ej_ghz * ec).sqrt() - ec,
        lambda12_over_lambda01: ratio(1, 2),
        lambda23_over_lambda01: ratio(2, 3),
        lambda03_over_lambda01: ratio(0, 3),
        model: b.model.to_json(),
    };

    let energies = b.eigs.energies_ghz();
    let rows: Vec<Vec<String>> = energies
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let transition = if k == 0 { String::new() } else { num(e - energies[k - 1]) };
            vec![k.to_string(), num(*e), transition]
        })
        .collect();
    out.write_csv("levels.csv", &["level", "energy_ghz", "transition_ghz"], &rows)?;

    let n_states = EXPORTED_STATES.min(b.eigs.levels());
    let mut header = vec!["index".to_string(), "phi_rad".to_string()];
    header.extend((0..n_states).map(|j| format!("psi{j}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = b
        .h
        .phase_coords
        .iter()
        .enumerate()
        .map(|(k, phi)| {
            let mut r = vec![k.to_string(), num(*phi)];
            r.extend((0..n_states).map(|j| num(b.eigs.states[j][k])));
            r
        })
        .collect();
    out.write_csv("wavefunctions.csv", &header, &rows)?;
    out.write_json("model.json", &report)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct OptimizationSummary {
    detuning_mhz: f64,
    a_x: f64,
    infidelity: f64,
    rounds: usize,
    evaluations: usize,
    converged: bool,
    history: Vec<f64>,
}

impl From<&OptimizedPulse> for OptimizationSummary {
    fn from(o: &OptimizedPulse) -> Self {
        Self {
            detuning_mhz: detuning_mhz(o.detuning),
            a_x: o.a_x,
            infidelity: o.infidelity,
            rounds: o.rounds,
            evaluations: o.evaluations,
            converged: o.converged,
            history: o.history.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
struct LatticeComparison {
    /// Largest population difference over shared samples and kept levels.
    max_population_difference: f64,
    samples: usize,
    lattice_dt_ns: f64,
    lattice_norm: f64,
}

#[derive(Debug, Serialize)]
struct SimulationReport {
    a_x: f64,
    a_y: f64,
    detuning_mhz: f64,
    optimization: Option<OptimizationSummary>,
    two_state_fidelity: f64,
    infidelity: f64,
    full_fidelity: f64,
    /// Mean population left in level 2; absent for two-level models.
    gamma2: Option<f64>,
    unitarity_error: f64,
    dt_ns: f64,
    steps: usize,
    /// Lab-frame propagator, row-major.
    propagator_re: Vec<Vec<f64>>,
    propagator_im: Vec<Vec<f64>>,
    lattice: Option<LatticeComparison>,
}

pub fn cmd_simulate(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let b = build(cfg)?;
    let mut drive = cfg.drive()?;
    let optimization = if cfg.pulse.optimize {
        let o = optimize_pulse(&b.model, &drive, &cfg.optimizer()?)?;
        drive = drive.with_detuning(o.detuning).with_amplitude(o.a_x);
        Some(OptimizationSummary::from(&o))
    } else {
        None
    };

    let mut dt = cfg.dt_ns()?;
    // Sample times must coincide with lattice steps for the comparison.
    let sub = if cfg.run.lattice_reference {
        let model_dt = dt.unwrap_or_else(|| {
            transmon_core::propagator::default_dt(&b.model, drive.carrier(&b.model))
        });
        dt = Some(model_dt);
        (model_dt / lattice_default_dt(&b.h, &b.eigs)).ceil() as usize
    } else {
        1
    };
    let opts = EvolveOptions { dt, sample_every: cfg.run.trajectory_every };
    let r = evolve(&b.model, &drive, opts)?;
    let f2 = two_state_fidelity(&r);
    let d = r.dim();

    let signal = DriveSignal::new(&drive, &b.model)?;
    let lattice = if cfg.run.lattice_reference {
        let lat_opts = EvolveOptions {
            dt: Some(r.dt_used / sub as f64),
            sample_every: cfg.run.trajectory_every.map(|n| n * sub),
        };
        let lat = evolve_lattice(&b.h, &b.eigs, &signal, 0, lat_opts)?;
        let mut worst = 0.0f64;
        let samples = match &r.trajectory {
            Some(tr) => {
                let n = tr.times.len().min(lat.populations.len());
                for level in 0..d.min(b.eigs.levels()) {
                    for (i, p) in tr.populations(0, level).iter().take(n).enumerate() {
                        worst = worst.max((p - lat.populations[i][level]).abs());
                    }
                }
                n
            }
            None => {
                let last = lat.populations.last().expect("lattice run records its end state");
                for level in 0..d.min(b.eigs.levels()) {
                    worst = worst.max((r.propagator[[level, 0]].norm_sqr() - last[level]).abs());
                }
                1
            }
        };
        Some(LatticeComparison {
            max_population_difference: worst,
            samples,
            lattice_dt_ns: lat.dt_used,
            lattice_norm: lat.norm,
        })
    } else {
        None
    };

    let report = SimulationReport {
        a_x: drive.a_x,
        a_y: drive.a_y,
        detuning_mhz: detuning_mhz(drive.detuning),
        optimization,
        two_state_fidelity: f2,
        infidelity: 1.0 - f2,
        full_fidelity: full_fidelity(&r)?,
        gamma2: if d >= 3 { Some(leakage_population(&r)?) } else { None },
        unitarity_error: r.unitarity_error,
        dt_ns: r.dt_used,
        steps: r.steps,
        propagator_re: r.propagator.rows().into_iter().map(|row| row.iter().map(|c| c.re).collect()).collect(),
        propagator_im: r.propagator.rows().into_iter().map(|row| row.iter().map(|c| c.im).collect()).collect(),
        lattice,
    };

    if let Some(tr) = &r.trajectory {
        let mut header = vec!["t_ns".to_string()];
        header.extend((0..d).map(|k| format!("p{k}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let pops: Vec<Vec<f64>> = (0..d).map(|k| tr.populations(0, k)).collect();
        let rows: Vec<Vec<String>> = tr
            .times
            .iter()
            .enumerate()
            .map(|(i, t)| std::iter::once(num(*t)).chain(pops.iter().map(|p| num(p[i]))).collect())
            .collect();
        out.write_csv("trajectory.csv", &header, &rows)?;
    }

    let (times, _) = transmon_core::spectra::sample_signal(&signal, cfg.run.sample_dt_ns)?;
    let mut rows = Vec::with_capacity(times.len());
    for t in times {
        let (sx, sy) = signal.quadratures(t)?;
        rows.push(vec![num(t), num(sx), num(sy), num(sx + sy)]);
    }
    out.write_csv("signal.csv", &["t_ns", "s_x", "s_y", "s"], &rows)?;
    out.write_json("report.json", &report)?;
    Ok(())
}

fn run_sweep(cfg: &RunConfig, model: &TruncatedModel) -> CliResult<Vec<FidelityCurve>> {
    let spec = cfg.sweep_spec()?;
    let curves = match cfg.run.jobs {
        Some(n) => sweep_with_jobs(model, &spec, n)?,
        None => sweep(model, &spec)?,
    };
    Ok(curves)
}

fn curve_rows(curves: &[FidelityCurve]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for c in curves {
        for p in &c.points {
            rows.push(vec![
                c.family.clone(),
                opt_num(c.w),
                num(c.a_y),
                num(p.t_p),
                num(p.infidelity),
                num(p.reported_infidelity()),
                num(detuning_mhz(p.detuning)),
                num(p.a_x),
                num(p.gamma2),
                num(p.slope),
            ]);
        }
    }
    rows
}

const CURVE_HEADER: [&str; 10] = [
    "family",
    "w",
    "a_y",
    "tp_ns",
    "infidelity",
    "reported_infidelity",
    "detuning_mhz",
    "a_x",
    "gamma2",
    "slope_per_ns",
];

#[derive(Debug, Serialize)]
struct FomWindow {
    window_ns: (f64, f64),
    /// Best first.
    ranking: Vec<FomResult>,
}

fn fom_tables(cfg: &RunConfig, curves: &[FidelityCurve]) -> CliResult<Vec<FomWindow>> {
    let mut out = Vec::new();
    for &[a, b] in &cfg.sweep.fom_windows_ns {
        let mut ranking =
            curves.iter().map(|c| figure_of_merit(c, a, b)).collect::<Result<Vec<_>, CoreError>>()?;
        ranking.sort_by(|x, y| y.fom.total_cmp(&x.fom));
        out.push(FomWindow { window_ns: (a, b), ranking });
    }
    Ok(out)
}

fn write_fom(out: &mut OutputDir, tables: &[FomWindow]) -> CliResult<()> {
    let mut rows = Vec::new();
    for t in tables {
        for (rank, f) in t.ranking.iter().enumerate() {
            rows.push(vec![
                num(t.window_ns.0),
                num(t.window_ns.1),
                (rank + 1).to_string(),
                opt_num(f.w),
                num(f.a_y),
                num(f.fom),
                num(1.0 - f.fom),
            ]);
        }
    }
    let header = ["window_start_ns", "window_end_ns", "rank", "w", "a_y", "fom", "mean_infidelity"];
    out.write_csv("fom.csv", &header, &rows)?;
    out.write_json("fom.json", &tables)?;
    Ok(())
}

pub fn cmd_sweep(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let b = build(cfg)?;
    let curves = run_sweep(cfg, &b.model)?;
    out.write_csv("curves.csv", &CURVE_HEADER, &curve_rows(&curves))?;
    out.write_json("sweep.json", &curves)?;
    if !cfg.sweep.fom_windows_ns.is_empty() {
        write_fom(out, &fom_tables(cfg, &curves)?)?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct SweepDocument {
    data: Vec<FidelityCurve>,
}

/// Figure-of-merit tables, from a previous `sweep.json` when given.
pub fn cmd_fom(cfg: &RunConfig, from: Option<&Path>, out: &mut OutputDir) -> CliResult<()> {
    if cfg.sweep.fom_windows_ns.is_empty() {
        return Err(CliError::Validation("sweep.fom_windows_ns is empty".into()));
    }
    let curves = match from {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let doc: SweepDocument = serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            doc.data
        }
        None => run_sweep(cfg, &build(cfg)?.model)?,
    };
    write_fom(out, &fom_tables(cfg, &curves)?)
}

#[derive(Debug, Serialize)]
struct SpectrumReport {
    omega01_ghz: f64,
    delta2_ghz: Option<f64>,
    peak_frequency_ghz: f64,
    peak_magnitude: f64,
    linewidth_ghz: Option<f64>,
    linewidth_threshold: f64,
    /// Minimum DRAG / plain ratio in `[omega01 - 2 delta2, omega01 - delta2]`.
    hole_ratio: Option<f64>,
    hole_window_ghz: Option<(f64, f64)>,
    sample_dt_ns: f64,
    pad_factor: usize,
    fft_len: usize,
    normalization: f64,
}

pub fn cmd_spectrum(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let b = build(cfg)?;
    let drive = cfg.drive()?;
    let (dt, pad) = (cfg.run.sample_dt_ns, cfg.spectrum.pad_factor);
    let spec = power_spectrum(&drive, &b.model, dt, pad)?;
    let pair = cfg.spectrum.drag_pair && drive.a_y != 0.0;
    let plain = if pair { Some(power_spectrum(&drive.clone().with_drag(0.0), &b.model, dt, pad)?) } else { None };

    let f01 = angular_to_ghz(b.model.omega01);
    let d2 = b.model.delta2.map(angular_to_ghz);
    let window = d2.map(|d2| (f01 - 2.0 * d2, f01 - d2));
    let hole_ratio = match (&plain, window) {
        (Some(p), Some(w)) => Some(spectral_hole_depth(&spec, p, w)?),
        _ => None,
    };
    let lw = match linewidth(&spec, cfg.spectrum.linewidth_threshold) {
        Ok(w) => Some(w),
        Err(CoreError::Spectrum(msg)) => {
            log::warn!("linewidth unavailable: {msg}");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let report = SpectrumReport {
        omega01_ghz: f01,
        delta2_ghz: d2,
        peak_frequency_ghz: spec.peak_frequency(),
        peak_magnitude: spec.magnitude.iter().cloned().fold(0.0, f64::max),
        linewidth_ghz: lw,
        linewidth_threshold: cfg.spectrum.linewidth_threshold,
        hole_ratio,
        hole_window_ghz: window,
        sample_dt_ns: spec.sample_dt,
        pad_factor: spec.pad_factor,
        fft_len: spec.fft_len,
        normalization: spec.scale,
    };

    let rows: Vec<Vec<String>> = match &plain {
        Some(p) => spec
            .freqs
            .iter()
            .zip(spec.magnitude.iter().zip(&p.magnitude))
            .map(|(f, (m, q))| vec![num(*f), num(*m), num(*q)])
            .collect(),
        None => spec.freqs.iter().zip(&spec.magnitude).map(|(f, m)| vec![num(*f), num(*m)]).collect(),
    };
    let header: &[&str] = if pair { &["f_ghz", "magnitude", "magnitude_plain"] } else { &["f_ghz", "magnitude"] };
    out.write_csv("spectrum.csv", header, &rows)?;
    out.write_json("spectrum.json", &report)?;
    Ok(())
}
