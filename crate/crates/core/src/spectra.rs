// Copyright 2026 The transmon-drag Contributors
// SPDX-License-Identifier: Apache-2.0

//! Fourier spectra of drive signals.
//!
//! The continuous transform `X(f) = ∫ S(t) e^{-2πi f t} dt` is approximated by
//! `dt` times the DFT of the zero-padded samples, with no window. Reported
//! magnitudes are `|X(f)|` divided by `π / (2 λ01)`, the carrier-peak height
//! of any calibrated `A_x = 1` pulse, so the plain `W = 1` reference pulse
//! peaks at one.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulses::{DriveConfig, DriveSignal};
use crate::truncation::TruncatedModel;

/// Minimum samples per carrier period.
pub const MIN_SAMPLES_PER_PERIOD: f64 = 20.0;
pub const DEFAULT_PAD_FACTOR: usize = 8;
/// Default sampling step, ns (about 33 samples per period at 6 GHz).
pub const DEFAULT_SAMPLE_DT: f64 = 0.005;

/// One-sided magnitude spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Non-negative frequencies, GHz.
    pub freqs: Vec<f64>,
    /// `|X(f)| / scale`.
    pub magnitude: Vec<f64>,
    pub sample_dt: f64,
    pub pad_factor: usize,
    /// Transform length after padding.
    pub fft_len: usize,
    /// Divisor applied to `|X(f)|`, in the drive's rad/ns·ns units.
    pub scale: f64,
}

impl SpectrumResult {
    pub fn bin_width(&self) -> f64 {
        self.freqs.get(1).map_or(0.0, |f| f - self.freqs[0])
    }

    /// `∫ |X(f)|^2 df` over all frequencies, from the one-sided bins.
    pub fn energy(&self) -> f64 {
        let n = self.magnitude.len();
        let df = self.bin_width();
        let mut sum = 0.0;
        for (k, m) in self.magnitude.iter().enumerate() {
            let a = m * self.scale;
            // DC and Nyquist bins appear once in the two-sided sum.
            let weight = if k == 0 || (k == n - 1 && self.fft_len.is_multiple_of(2)) { 1.0 } else { 2.0 };
            sum += weight * a * a;
        }
        sum * df
    }

    /// Magnitude at the bin nearest `f`.
    pub fn magnitude_at(&self, f: f64) -> f64 {
        let i = self.freqs.partition_point(|&x| x < f).min(self.freqs.len() - 1);
        let j = i.saturating_sub(1);
        if (self.freqs[j] - f).abs() <= (self.freqs[i] - f).abs() {
            self.magnitude[j]
        } else {
            self.magnitude[i]
        }
    }

    /// Frequency of the largest bin.
    pub fn peak_frequency(&self) -> f64 {
        let (i, _) = self
            .magnitude
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &m)| if m > acc.1 { (i, m) } else { acc });
        self.freqs[i]
    }
}

/// Samples `S(t)` at `t = n dt` for `n = 0 ..= floor(t_p / dt)`.
pub fn sample_signal(signal: &DriveSignal, sample_dt: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(sample_dt.is_finite() && sample_dt > 0.0) {
        return Err(Error::Spectrum(format!("sample step must be positive, got {sample_dt}")));
    }
    let t_p = signal.t_p();
    let n = (t_p / sample_dt * (1.0 + 1e-12)).floor() as usize + 1;
    let mut times = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let t = (i as f64 * sample_dt).min(t_p);
        times.push(t);
        values.push(signal.value(t)?);
    }
    Ok((times, values))
}

/// Spectrum of arbitrary real samples spaced `sample_dt` ns apart.
pub fn spectrum_of_samples(
    samples: &[f64],
    sample_dt: f64,
    pad_factor: usize,
    scale: f64,
) -> Result<SpectrumResult> {
    if samples.len() < 2 {
        return Err(Error::Spectrum("need at least two samples".into()));
    }
    if pad_factor == 0 {
        return Err(Error::Spectrum("pad factor must be at least 1".into()));
    }
    if !(sample_dt.is_finite() && sample_dt > 0.0) {
        return Err(Error::Spectrum(format!("sample step must be positive, got {sample_dt}")));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Spectrum(format!("normalization must be positive, got {scale}")));
    }
    let n = samples.len() * pad_factor;
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&s| Complex::new(s, 0.0)).collect();
    buf.resize(n, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let df = 1.0 / (n as f64 * sample_dt);
    let freqs = (0..=half).map(|k| k as f64 * df).collect();
    let magnitude = buf[..=half].iter().map(|c| c.norm() * sample_dt / scale).collect();
    Ok(SpectrumResult { freqs, magnitude, sample_dt, pad_factor, fft_len: n, scale })
}

/// Normalized magnitude spectrum of the drive `S(t)` on `[0, t_p]`.
pub fn power_spectrum(
    drive: &DriveConfig,
    model: &TruncatedModel,
    sample_dt: f64,
    pad_factor: usize,
) -> Result<SpectrumResult> {
    let signal = DriveSignal::new(drive, model)?;
    let carrier_ghz = crate::angular_to_ghz(signal.carrier.abs());
    if !(sample_dt.is_finite() && sample_dt > 0.0) {
        return Err(Error::Spectrum(format!("sample step must be positive, got {sample_dt}")));
    }
    let per_period = 1.0 / (carrier_ghz * sample_dt);
    if per_period < MIN_SAMPLES_PER_PERIOD {
        return Err(Error::Spectrum(format!(
            "sample step {sample_dt} ns gives {per_period:.1} samples per carrier period; \
             at least {MIN_SAMPLES_PER_PERIOD} required"
        )));
    }
    let (_, values) = sample_signal(&signal, sample_dt)?;
    spectrum_of_samples(&values, sample_dt, pad_factor, reference_peak(model))
}

/// `π / (2 λ01)`.
pub fn reference_peak(model: &TruncatedModel) -> f64 {
    PI / (2.0 * model.lambda01().abs())
}

fn check_same_grid(a: &SpectrumResult, b: &SpectrumResult) -> Result<()> {
    let same = a.freqs.len() == b.freqs.len()
        && a.freqs.iter().zip(&b.freqs).all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(1.0));
    if same {
        Ok(())
    } else {
        Err(Error::Spectrum("spectra are on different frequency grids".into()))
    }
}

/// Minimum of `drag / plain` over bins in `[f_lo, f_hi]` GHz.
pub fn spectral_hole_depth(
    spec_drag: &SpectrumResult,
    spec_plain: &SpectrumResult,
    window: (f64, f64),
) -> Result<f64> {
    check_same_grid(spec_drag, spec_plain)?;
    let (lo, hi) = window;
    let ratio = spec_drag
        .freqs
        .iter()
        .zip(spec_drag.magnitude.iter().zip(&spec_plain.magnitude))
        .filter(|(f, (_, p))| **f >= lo && **f <= hi && **p > 0.0)
        .map(|(_, (d, p))| d / p)
        .fold(f64::INFINITY, f64::min);
    if ratio.is_finite() {
        Ok(ratio)
    } else {
        Err(Error::Spectrum(format!("no usable bins in window [{lo}, {hi}] GHz")))
    }
}

/// Width in GHz of the contiguous band around the peak where the magnitude
/// stays at or above `threshold * peak`. Band edges are linearly
/// interpolated between bins.
pub fn linewidth(spec: &SpectrumResult, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Spectrum(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let m = &spec.magnitude;
    let (peak_i, peak) =
        m.iter().enumerate().fold((0, f64::NEG_INFINITY), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
    if !(peak > 0.0) {
        return Err(Error::Spectrum("spectrum has no peak".into()));
    }
    let level = threshold * peak;
    let crossing = |inside: usize, outside: usize| {
        let (fi, fo) = (spec.freqs[inside], spec.freqs[outside]);
        let s = (m[inside] - level) / (m[inside] - m[outside]);
        fi + s * (fo - fi)
    };
    let not_crossed = || Error::Spectrum(format!("magnitude never falls below {threshold} of the peak"));
    let left = (0..peak_i).rev().find(|&i| m[i] < level).ok_or_else(not_crossed)?;
    let right = (peak_i + 1..m.len()).find(|&i| m[i] < level).ok_or_else(not_crossed)?;
    Ok(crossing(right - 1, right) - crossing(left + 1, left))
}
