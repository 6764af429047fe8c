// Copyright 2026 The transmon-drag Contributors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any check outside `KNOWN_FAILURES` fails.

use std::collections::BTreeMap;
use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64 as C;
use transmon_core::lattice::{
    build_lattice, phase_operator, solve_eigensystem, transition_frequencies, EigenSystem,
    LatticeHamiltonian, TransmonParams,
};
use transmon_core::optimizer::{
    evaluate, figure_of_merit, optimize_pulse, sweep, FidelityCurve, OptimizeConfig, SweepSpec,
};
use transmon_core::propagator::{
    evolve, evolve_lattice, evolve_piecewise_constant, piecewise_hamiltonians,
    EvolveOptions,
};
use transmon_core::pulses::{CosineEnvelope, DriveSignal, Envelope, GaussianEnvelope};
use transmon_core::spectra::{
    power_spectrum, spectral_hole_depth, DEFAULT_PAD_FACTOR, DEFAULT_SAMPLE_DT,
};
use transmon_core::truncation::{truncate, TruncatedModel};

mod common;
use common::{expm_step, gaussian, max_diff, simpson};

/// Sub-checks that do not hold for this model; see the project notes.
const KNOWN_FAILURES: &[&str] = &["4a", "7b", "8b", "9"];

/// Step for optimized sweeps, ns.
const SWEEP_DT: f64 = 2e-3;

struct Check {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn check(id: &'static str, pass: bool, detail: String) -> Check {
    Check { id, pass, detail }
}

struct Fixture {
    h: LatticeHamiltonian,
    eigs: EigenSystem,
}

impl Fixture {
    fn new() -> Self {
        let h = build_lattice(&TransmonParams::default()).unwrap();
        let eigs = solve_eigensystem(&h, 8).unwrap();
        Self { h, eigs }
    }

    fn model(&self, dim: usize) -> TruncatedModel {
        truncate(&self.eigs, &phase_operator(&self.h), dim).unwrap()
    }
}

fn sweep_cfg() -> OptimizeConfig {
    OptimizeConfig { dt: Some(SWEEP_DT), ..OptimizeConfig::default() }
}

fn gaussian_sweep(m: &TruncatedModel, w: Vec<f64>, a_y: Vec<f64>, t_p: Vec<f64>) -> Vec<FidelityCurve> {
    let spec = SweepSpec { t_p, optimizer: sweep_cfg(), ..SweepSpec::gaussian(a_y, w, true).unwrap() };
    sweep(m, &spec).unwrap()
}

fn grid(lo: u32, hi: u32, step: usize) -> Vec<f64> {
    (lo..=hi).step_by(step).map(f64::from).collect()
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target.abs()
}

fn c1_spectrum(fx: &Fixture) -> Vec<Check> {
    let tf = transition_frequencies(&fx.eigs).unwrap();
    let (ej, ec) = (22.05f64, 0.2205f64);
    let analytic = (8.0 * ej * ec).sqrt() - ec;
    let f01 = tf.omega01_ghz();
    let rel = tf.relative_anharmonicity();
    vec![
        check("1a", within(f01, 6.0, 0.02), format!("omega01 = {f01:.4} GHz")),
        check("1b", (rel - 0.04).abs() <= 0.005, format!("delta2/omega01 = {rel:.4}")),
        check(
            "1c",
            within(f01, analytic, 0.03),
            format!("analytic estimate {analytic:.4} GHz ({:+.2}%)", 100.0 * (f01 / analytic - 1.0)),
        ),
    ]
}

fn c2_matrix_elements(fx: &Fixture) -> Vec<Check> {
    let m = fx.model(4);
    let l01 = m.lambda01();
    let r12 = m.lambda(1, 2) / l01;
    let r23 = m.lambda(2, 3) / l01;
    let r03 = (m.lambda(0, 3) / l01).abs();
    vec![
        check("2a", within(r12, 2.08f64.sqrt(), 0.01), format!("l12/l01 = {r12:.5}")),
        check("2b", within(r23, 1.8, 0.02), format!("l23/l01 = {r23:.4}")),
        check("2c", (0.004..=0.016).contains(&r03), format!("|l03/l01| = {r03:.5}")),
    ]
}

fn c3_truncation(fx: &Fixture) -> Vec<Check> {
    // Slow pulse; both runs sample every 0.5 ns.
    let m = fx.model(3);
    let drive = gaussian(40.0, 0.5);
    let dt = 5e-4;
    let every = 1000;
    let small = evolve(&m, &drive, EvolveOptions { dt: Some(dt), sample_every: Some(every) }).unwrap();
    let tr = small.trajectory.unwrap();
    let signal = DriveSignal::new(&drive, &m).unwrap();
    let sub = 56;
    let opts = EvolveOptions { dt: Some(dt / sub as f64), sample_every: Some(every * sub) };
    let full = evolve_lattice(&fx.h, &fx.eigs, &signal, 0, opts).unwrap();
    let mut worst = 0.0f64;
    let aligned = tr.times.len() == full.times.len();
    if aligned {
        for level in 0..3 {
            let p3 = tr.populations(0, level);
            for (i, p) in p3.iter().enumerate() {
                worst = worst.max((p - full.populations[i][level]).abs());
            }
        }
    }
    vec![check(
        "3",
        aligned && worst <= 1e-3,
        format!("max population difference {worst:.2e} over {} samples", tr.times.len()),
    )]
}

fn c4_saturation(fx: &Fixture, dim3_w06: &[FidelityCurve]) -> Vec<Check> {
    let m4 = fx.model(4);
    let m8 = fx.model(8);
    let cfg = OptimizeConfig { dt: Some(1e-3), ..OptimizeConfig::default() };
    let mut abs_worst = 0.0f64;
    let mut rel_worst = 0.0f64;
    for (w, a_y, t_p) in [(0.6, 0.0, 12.0), (0.6, 0.0, 24.0), (1.0, 2.0, 10.0)] {
        let drive = gaussian(t_p, w).with_drag(a_y);
        let a = optimize_pulse(&m4, &drive, &cfg).unwrap().infidelity;
        let b = optimize_pulse(&m8, &drive, &cfg).unwrap().infidelity;
        abs_worst = abs_worst.max((a - b).abs());
        rel_worst = rel_worst.max((a - b).abs() / b);
    }

    let dim4 = gaussian_sweep(&m4, vec![0.6], vec![0.0, 2.0], grid(10, 30, 1));
    let mut shifts = Vec::new();
    for c4 in &dim4 {
        let c3 = dim3_w06.iter().find(|c| c.a_y == c4.a_y).unwrap();
        match (c3.first_crossing(1e-6), c4.first_crossing(1e-6)) {
            (Some(a), Some(b)) => shifts.push(b - a),
            _ => shifts.push(f64::NAN),
        }
    }
    vec![
        check(
            "4a",
            abs_worst <= 1e-8,
            format!("dim 4 vs 8 optimized: max |diff| {abs_worst:.2e}, max relative {rel_worst:.2e}"),
        ),
        check(
            "4b",
            shifts.iter().all(|s| (3.0..=7.0).contains(s)),
            format!("shoulder shift at 1e-6 for A_y = 0, 2: {shifts:.2?} ns"),
        ),
    ]
}

fn c5_half_drag(fx: &Fixture) -> Vec<Check> {
    let m = fx.model(3);
    let mut out = Vec::new();
    for (id, t_p) in [("5a", 15.0), ("5b", 20.0)] {
        let plain = evaluate(&m, &gaussian(t_p, 1.0), None).unwrap().0;
        let half = evaluate(&m, &gaussian(t_p, 1.0).with_drag(1.0), None).unwrap().0;
        let gain = plain / half;
        out.push(check(id, gain >= 10.0, format!("t_p = {t_p}: {plain:.2e} -> {half:.2e} ({gain:.0}x)")));
    }
    out
}

fn c6_optimized(fx: &Fixture) -> Vec<Check> {
    let m = fx.model(3);
    let o = optimize_pulse(&m, &gaussian(10.0, 1.0).with_drag(2.0), &OptimizeConfig::default()).unwrap();
    vec![check(
        "6",
        o.converged && o.infidelity <= 1e-5,
        format!(
            "1 - F' = {:.2e} at delta = {:.4} rad/ns, A_x = {:.5} ({} rounds)",
            o.infidelity, o.detuning, o.a_x, o.rounds
        ),
    )]
}

fn c7_cosine(fx: &Fixture) -> Vec<Check> {
    let m = fx.model(3);
    let t_p = grid(8, 24, 2);
    let a_y = vec![0.0, 1.0, 2.0];
    let gauss = gaussian_sweep(&m, vec![1.0], a_y.clone(), t_p.clone());
    let spec = SweepSpec {
        t_p: t_p.clone(),
        a_y,
        w: vec![],
        template: Envelope::Cosine(CosineEnvelope::standard_pi(10.0).unwrap()),
        optimize: true,
        optimizer: sweep_cfg(),
    };
    let cos = sweep(&m, &spec).unwrap();

    let mut ranking = true;
    let mut trends = true;
    let mut outside = Vec::new();
    for i in 0..t_p.len() {
        let order = |curves: &[FidelityCurve]| {
            let mut idx: Vec<usize> = (0..curves.len()).collect();
            idx.sort_by(|&a, &b| curves[b].points[i].infidelity.total_cmp(&curves[a].points[i].infidelity));
            idx
        };
        ranking &= order(&gauss) == order(&cos);
        for curves in [&gauss, &cos] {
            trends &= curves.windows(2).all(|c| {
                c[1].points[i].a_x < c[0].points[i].a_x
                    && c[1].points[i].detuning < c[0].points[i].detuning
            });
        }
        for (g, c) in gauss.iter().zip(&cos) {
            let (a, b) = (g.points[i].reported_infidelity(), c.points[i].reported_infidelity());
            let factor = (a / b).max(b / a);
            if factor > 10.0 {
                outside.push(format!("A_y {} t_p {}: {a:.1e} vs {b:.1e}", g.a_y, t_p[i]));
            }
        }
    }
    let total = t_p.len() * gauss.len();
    vec![
        check("7a", ranking && trends, format!("A_y ranking same: {ranking}, delta*/A_x* trends same: {trends}")),
        check(
            "7b",
            outside.is_empty(),
            format!("{}/{total} points beyond 10x: {}", outside.len(), outside.join("; ")),
        ),
    ]
}

fn c8_hole(fx: &Fixture) -> Vec<Check> {
    let m = fx.model(3);
    let tf = transition_frequencies(&fx.eigs).unwrap();
    let (f01, d2) = (tf.omega01_ghz(), tf.delta2_ghz());
    let window = (f01 - 2.0 * d2, f01 - d2);
    let ratio = |w: f64| {
        let spec = |a_y: f64| {
            power_spectrum(&gaussian(15.0, w).with_drag(a_y), &m, DEFAULT_SAMPLE_DT, DEFAULT_PAD_FACTOR)
                .unwrap()
        };
        spectral_hole_depth(&spec(1.0), &spec(0.0), window).unwrap()
    };
    let (r1, r05) = (ratio(1.0), ratio(0.5));
    vec![
        check("8a", r1 < 1.0, format!("W = 1 hole ratio {r1:.4}")),
        check("8b", r05 > 0.5, format!("W = 0.5 hole ratio {r05:.4}")),
    ]
}

fn c9_low_weight(dim3_w06: &[FidelityCurve]) -> Vec<Check> {
    let plain = dim3_w06.iter().find(|c| c.a_y == 0.0).unwrap();
    let mut worst_gain = 0.0f64;
    let mut worst_abs = 0.0f64;
    for (i, p) in plain.points.iter().enumerate().filter(|(_, p)| p.t_p > 20.0) {
        let best = dim3_w06
            .iter()
            .map(|c| c.points[i].reported_infidelity())
            .fold(f64::INFINITY, f64::min);
        worst_gain = worst_gain.max(p.reported_infidelity() / best);
        worst_abs = worst_abs.max(p.infidelity - best);
    }
    vec![check(
        "9",
        worst_gain < 10.0,
        format!("max DRAG gain above 20 ns {worst_gain:.1}x, max absolute improvement {worst_abs:.1e}"),
    )]
}

fn c10_integrity(fx: &Fixture) -> Vec<Check> {
    let m = fx.model(3);
    let drive = gaussian(10.0, 1.0).with_drag(2.0);
    let a = evolve(&m, &drive, EvolveOptions::default()).unwrap();
    let b = evolve(&m, &drive, EvolveOptions::with_dt(a.dt_used / 2.0)).unwrap();
    let unitarity = a.unitarity_error.max(b.unitarity_error);
    let halving = max_diff(&a.propagator, &b.propagator);

    let short = gaussian(2.0, 1.0).with_drag(1.0);
    let dt = 1e-4;
    let rk4 = evolve_piecewise_constant(&m, &short, dt).unwrap();
    let mut exact = Array2::<C>::eye(3);
    for (h, hm) in piecewise_hamiltonians(&m, &short, dt).unwrap() {
        exact = expm_step(&hm, h).dot(&exact);
    }
    let oracle = max_diff(&rk4, &exact);

    let mut norm_err = 0.0f64;
    let mut deriv_err = 0.0f64;
    for (t_p, w) in [(8.0, 0.5), (15.0, 1.0), (30.0, 1.5)] {
        let g = GaussianEnvelope::new(t_p, w).unwrap();
        norm_err = norm_err.max((simpson(|t| g.value(t).unwrap(), 0.0, t_p, 20000) - 1.0).abs());
        let h = 1e-4;
        for k in 1..100 {
            let t = t_p * k as f64 / 100.0;
            let fd = (g.value(t + h).unwrap() - g.value(t - h).unwrap()) / (2.0 * h);
            deriv_err = deriv_err.max((fd - g.derivative(t).unwrap()).abs());
        }
    }
    vec![
        check("10a", unitarity <= 1e-8, format!("unitarity {unitarity:.1e}")),
        check("10b", oracle <= 1e-8, format!("RK4 vs exponential product {oracle:.1e}")),
        check("10c", halving <= 1e-9, format!("step halving {halving:.1e}")),
        check("10d", norm_err <= 1e-9, format!("envelope norm {norm_err:.1e}")),
        check("10e", deriv_err <= 1e-6, format!("envelope derivative {deriv_err:.1e}")),
    ]
}

fn c11_fom(fx: &Fixture) -> Vec<Check> {
    let m = fx.model(3);
    let ws = vec![0.6, 0.8, 1.0, 1.2];
    let curves = gaussian_sweep(&m, ws, vec![0.0, 1.0, 2.0, 2.5, 3.0], grid(10, 26, 2));
    let rank = |t1: f64, t2: f64| {
        let mut v: Vec<_> = curves.iter().map(|c| figure_of_merit(c, t1, t2).unwrap()).collect();
        v.sort_by(|a, b| b.fom.total_cmp(&a.fom));
        v
    };
    let early = rank(10.0, 18.0);
    let best = &early[0];
    let early_ok = best.w == Some(1.0) && (best.a_y - 2.5).abs() <= 0.5;

    let late = rank(17.0, 25.0);
    let w06: Vec<f64> = late.iter().filter(|f| f.w == Some(0.6)).map(|f| f.fom).collect();
    let gap = late[0].fom - w06.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = w06.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - w06.iter().cloned().fold(f64::INFINITY, f64::min);
    vec![
        check(
            "11a",
            early_ok,
            format!("[10, 18]: best W = {:?}, A_y = {} (1 - FOM {:.1e})", best.w, best.a_y, 1.0 - best.fom),
        ),
        check(
            "11b",
            gap <= 1e-5 && spread <= 1e-5,
            format!("[17, 25]: W = 0.6 gap to best {gap:.1e}, spread over A_y {spread:.1e}"),
        ),
    ]
}

fn main() {
    let start = Instant::now();
    let fx = Fixture::new();
    // Shared by criteria 4 and 9.
    let dim3_w06 = gaussian_sweep(&fx.model(3), vec![0.6], vec![0.0, 1.0, 2.0], grid(10, 30, 1));

    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Vec<Check> + '_>)> = vec![
        (1, "model spectrum", Box::new(|| c1_spectrum(&fx))),
        (2, "matrix elements", Box::new(|| c2_matrix_elements(&fx))),
        (3, "truncation equivalence", Box::new(|| c3_truncation(&fx))),
        (4, "multi-level saturation", Box::new(|| c4_saturation(&fx, &dim3_w06))),
        (5, "unoptimized DRAG", Box::new(|| c5_half_drag(&fx))),
        (6, "optimized DRAG", Box::new(|| c6_optimized(&fx))),
        (7, "cosine parity", Box::new(|| c7_cosine(&fx))),
        (8, "spectral hole", Box::new(|| c8_hole(&fx))),
        (9, "low spectral weight", Box::new(|| c9_low_weight(&dim3_w06))),
        (10, "numerical integrity", Box::new(|| c10_integrity(&fx))),
        (11, "FOM ranking", Box::new(|| c11_fom(&fx))),
    ];

    let mut unexpected = BTreeMap::new();
    for (n, name, run) in &criteria {
        let t0 = Instant::now();
        let checks = run();
        let pass = checks.iter().all(|c| c.pass);
        println!(
            "criterion {n:>2} {name:<24} {} ({:.1} s)",
            if pass { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64()
        );
        for c in &checks {
            let known = KNOWN_FAILURES.contains(&c.id);
            let tag = match (c.pass, known) {
                (true, _) => "ok",
                (false, true) => "known failure",
                (false, false) => "FAILED",
            };
            println!("    {:<4} {:<14} {}", c.id, tag, c.detail);
            if !c.pass && !known {
                unexpected.insert(c.id, c.detail.clone());
            }
        }
    }
    println!("acceptance finished in {:.0} s", start.elapsed().as_secs_f64());
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
