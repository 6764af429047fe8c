// Copyright 2026 The transmon-drag Contributors
// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex64 as C;
use transmon_core::lattice::{build_lattice, phase_operator, solve_eigensystem, TransmonParams};
use transmon_core::pulses::{DriveConfig, Envelope, GaussianEnvelope};
use transmon_core::truncation::{truncate, TruncatedModel};

/// Default transmon truncated to `dim` levels.
pub fn model(dim: usize) -> TruncatedModel {
    let h = build_lattice(&TransmonParams::default()).unwrap();
    let eigs = solve_eigensystem(&h, dim.max(3)).unwrap();
    truncate(&eigs, &phase_operator(&h), dim).unwrap()
}

pub fn gaussian(t_p: f64, w: f64) -> DriveConfig {
    DriveConfig::new(Envelope::Gaussian(GaussianEnvelope::new(t_p, w).unwrap()))
}

pub fn max_diff(a: &Array2<C>, b: &Array2<C>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `exp(-i h H)` by scaling and squaring with a degree-20 Taylor core.
pub fn expm_step(hm: &Array2<f64>, h: f64) -> Array2<C> {
    let d = hm.nrows();
    let a = hm.mapv(|v| C::new(0.0, -h * v));
    let norm = a.iter().map(|v| v.norm()).fold(0.0, f64::max) * d as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a.mapv(|v| v / 2f64.powi(squarings as i32));
    let mut term = Array2::<C>::eye(d);
    let mut sum = Array2::<C>::eye(d);
    for k in 1..=20 {
        term = term.dot(&scaled).mapv(|v| v / k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = sum.dot(&sum);
    }
    sum
}

/// Composite Simpson rule on `n` (rounded up to even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}
