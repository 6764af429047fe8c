// Copyright 2026 The transmon-drag Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pulse envelopes and the two-quadrature (DRAG) lab-frame drive.
//!
//! The drive multiplies the truncated coupling: `H(t) = H0' + S(t) Sigma_x'`
//! with
//!
//! ```text
//! S(t)   = S_x(t) + S_y(t)
//! S_x(t) = A_x B cos(w_d t) xi(t)
//! S_y(t) = A_y B (lambda12/lambda01)^2 / (4 Delta2) sin(w_d t) dxi/dt
//! ```
//!
//! where `w_d = omega01 + delta` and `B` is the calibration that makes
//! `A_x = 1` a nominal pi rotation. With this carrier convention a positive
//! `A_y` suppresses the spectrum below the carrier, at the `1 -> 2`
//! transition `omega01 - Delta2`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::truncation::TruncatedModel;

/// Gaussian envelope truncated at the pulse edges and shifted so it
/// vanishes there, normalized to unit area over `[0, t_p]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianEnvelope {
    /// Pulse width in ns.
    pub t_p: f64,
    /// Cutoff parameter; the edge value before subtraction is `exp(-2/W^2)`.
    pub w: f64,
}

impl GaussianEnvelope {
    pub fn new(t_p: f64, w: f64) -> Result<Self> {
        if !(t_p.is_finite() && t_p > 0.0) {
            return Err(invalid(format!("pulse width must be positive, got {t_p}")));
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(invalid(format!("cutoff W must be positive, got {w}")));
        }
        Ok(Self { t_p, w })
    }

    pub fn gamma(&self) -> f64 {
        self.w * self.t_p / (2.0 * SQRT_2)
    }

    /// `G = exp(-2 / W^2)`.
    pub fn cutoff(&self) -> f64 {
        (-2.0 / (self.w * self.w)).exp()
    }

    pub fn center(&self) -> f64 {
        0.5 * self.t_p
    }

    /// Exact integral of the shifted Gaussian over `[0, t_p]`.
    pub fn norm(&self) -> f64 {
        let g = self.gamma();
        g * PI.sqrt() * libm::erf(SQRT_2 / self.w) - self.t_p * self.cutoff()
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        check_time(t, self.t_p)?;
        Ok(self.value_unchecked(t))
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        check_time(t, self.t_p)?;
        Ok(self.derivative_unchecked(t))
    }

    pub(crate) fn value_unchecked(&self, t: f64) -> f64 {
        let g = self.gamma();
        let x = (t - self.center()) / g;
        ((-x * x).exp() - self.cutoff()) / self.norm()
    }

    pub(crate) fn derivative_unchecked(&self, t: f64) -> f64 {
        let g = self.gamma();
        let x = (t - self.center()) / g;
        -2.0 * x / g * (-x * x).exp() / self.norm()
    }
}

/// Cosine-series envelope
/// `xi(t) = theta/t_p + (2 pi/t_p) sum_k alpha_k cos(2 k pi t / t_p)`, `k = 0, 1, ...`.
///
/// The `k = 0` term is a constant, so the area is `theta + 2 pi alpha_0`.
/// The standard `1 - cos` pulse uses `theta = pi`, `alphas = [-1, 0.5]`,
/// which yields `-(pi/t_p)(1 - cos(2 pi t/t_p))`; the amplitude calibration
/// absorbs the sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosineEnvelope {
    pub t_p: f64,
    pub theta: f64,
    pub alphas: Vec<f64>,
}

impl CosineEnvelope {
    pub fn new(t_p: f64, theta: f64, alphas: Vec<f64>) -> Result<Self> {
        if !(t_p.is_finite() && t_p > 0.0) {
            return Err(invalid(format!("pulse width must be positive, got {t_p}")));
        }
        if alphas.is_empty() {
            return Err(invalid("cosine envelope needs at least one coefficient"));
        }
        if !theta.is_finite() || alphas.iter().any(|a| !a.is_finite()) {
            return Err(invalid("cosine envelope coefficients must be finite"));
        }
        Ok(Self { t_p, theta, alphas })
    }

    /// The usual `1 - cos` pi pulse.
    pub fn standard_pi(t_p: f64) -> Result<Self> {
        Self::new(t_p, PI, vec![-1.0, 0.5])
    }

    pub fn area(&self) -> f64 {
        self.theta + 2.0 * PI * self.alphas[0]
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        check_time(t, self.t_p)?;
        Ok(self.value_unchecked(t))
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        check_time(t, self.t_p)?;
        Ok(self.derivative_unchecked(t))
    }

    pub(crate) fn value_unchecked(&self, t: f64) -> f64 {
        let base = 2.0 * PI * t / self.t_p;
        let series: f64 = self
            .alphas
            .iter()
            .enumerate()
            .map(|(k, a)| a * (k as f64 * base).cos())
            .sum();
        self.theta / self.t_p + 2.0 * PI / self.t_p * series
    }

    pub(crate) fn derivative_unchecked(&self, t: f64) -> f64 {
        let base = 2.0 * PI * t / self.t_p;
        let series: f64 = self
            .alphas
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| {
                let kf = k as f64;
                -a * kf * (kf * base).sin()
            })
            .sum();
        (2.0 * PI / self.t_p).powi(2) * series
    }
}

fn check_time(t: f64, t_p: f64) -> Result<()> {
    if !(0.0..=t_p).contains(&t) {
        return Err(invalid(format!("time {t} ns outside pulse window [0, {t_p}]")));
    }
    Ok(())
}

/// Envelope family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Envelope {
    Gaussian(GaussianEnvelope),
    Cosine(CosineEnvelope),
}

impl Envelope {
    pub fn t_p(&self) -> f64 {
        match self {
            Envelope::Gaussian(g) => g.t_p,
            Envelope::Cosine(c) => c.t_p,
        }
    }

    /// Time integral over the pulse window.
    pub fn area(&self) -> f64 {
        match self {
            Envelope::Gaussian(_) => 1.0,
            Envelope::Cosine(c) => c.area(),
        }
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        check_time(t, self.t_p())?;
        Ok(self.value_unchecked(t))
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        check_time(t, self.t_p())?;
        Ok(self.derivative_unchecked(t))
    }

    pub(crate) fn value_unchecked(&self, t: f64) -> f64 {
        match self {
            Envelope::Gaussian(g) => g.value_unchecked(t),
            Envelope::Cosine(c) => c.value_unchecked(t),
        }
    }

    pub(crate) fn derivative_unchecked(&self, t: f64) -> f64 {
        match self {
            Envelope::Gaussian(g) => g.derivative_unchecked(t),
            Envelope::Cosine(c) => c.derivative_unchecked(t),
        }
    }

    pub(crate) fn value_and_derivative_unchecked(&self, t: f64) -> (f64, f64) {
        (self.value_unchecked(t), self.derivative_unchecked(t))
    }

    /// Same family and shape parameters at a different pulse width.
    pub fn with_width(&self, t_p: f64) -> Result<Self> {
        match self {
            Envelope::Gaussian(g) => Ok(Envelope::Gaussian(GaussianEnvelope::new(t_p, g.w)?)),
            Envelope::Cosine(c) => {
                Ok(Envelope::Cosine(CosineEnvelope::new(t_p, c.theta, c.alphas.clone())?))
            }
        }
    }

    /// The Gaussian cutoff `W`, if any.
    pub fn cutoff_w(&self) -> Option<f64> {
        match self {
            Envelope::Gaussian(g) => Some(g.w),
            Envelope::Cosine(_) => None,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Envelope::Gaussian(_) => "gaussian",
            Envelope::Cosine(_) => "cosine",
        }
    }
}

/// Scale `B` such that `B cos(omega01 t) xi(t) Sigma_x'` is a pi rotation of
/// the qubit transition in the rotating-wave limit: `lambda01 B area / 2 = pi/2`.
pub fn calibrate_base_amplitude(model: &TruncatedModel, envelope: &Envelope) -> Result<f64> {
    let l01 = model.lambda01();
    if l01 == 0.0 || !l01.is_finite() {
        return Err(invalid("lambda_01 must be non-zero to calibrate the drive"));
    }
    let area = envelope.area();
    if area == 0.0 {
        return Err(invalid("envelope has zero area"));
    }
    Ok(PI / (l01 * area))
}

/// Drive parameters. Amplitudes are dimensionless multiples of the calibrated scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub a_x: f64,
    /// DRAG amplitude: 0 none, 1 half, 2 full.
    pub a_y: f64,
    /// Carrier offset from `omega01`, rad/ns.
    pub detuning: f64,
    pub envelope: Envelope,
}

impl DriveConfig {
    pub fn new(envelope: Envelope) -> Self {
        Self { a_x: 1.0, a_y: 0.0, detuning: 0.0, envelope }
    }

    pub fn with_drag(mut self, a_y: f64) -> Self {
        self.a_y = a_y;
        self
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_amplitude(mut self, a_x: f64) -> Self {
        self.a_x = a_x;
        self
    }

    /// Zero drive over the same window.
    pub fn idle(envelope: Envelope) -> Self {
        Self { a_x: 0.0, a_y: 0.0, detuning: 0.0, envelope }
    }

    pub fn t_p(&self) -> f64 {
        self.envelope.t_p()
    }

    pub fn carrier(&self, model: &TruncatedModel) -> f64 {
        model.omega01 + self.detuning
    }
}

/// Envelope constants hoisted out of the per-sample evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Gaussian { center: f64, inv_gamma: f64, cutoff: f64, inv_norm: f64 },
    Cosine,
}

impl Shape {
    fn of(envelope: &Envelope) -> Self {
        match envelope {
            Envelope::Gaussian(g) => Shape::Gaussian {
                center: g.center(),
                inv_gamma: 1.0 / g.gamma(),
                cutoff: g.cutoff(),
                inv_norm: 1.0 / g.norm(),
            },
            Envelope::Cosine(_) => Shape::Cosine,
        }
    }
}

/// A drive resolved against a model: every coefficient precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSignal {
    pub envelope: Envelope,
    shape: Shape,
    /// `A_x B`.
    pub x_scale: f64,
    /// `A_y B (lambda12/lambda01)^2 / (4 Delta2)`, ns.
    pub y_scale: f64,
    /// Carrier angular frequency, rad/ns.
    pub carrier: f64,
}

impl DriveSignal {
    pub fn new(cfg: &DriveConfig, model: &TruncatedModel) -> Result<Self> {
        let values = [cfg.a_x, cfg.a_y, cfg.detuning];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("drive amplitudes and detuning must be finite"));
        }
        let carrier = cfg.carrier(model);
        if carrier <= 0.0 {
            return Err(invalid(format!("carrier must be positive, got {carrier} rad/ns")));
        }
        let b = calibrate_base_amplitude(model, &cfg.envelope)?;
        let y_scale = if cfg.a_y == 0.0 {
            0.0
        } else {
            let delta2 = model.delta2.unwrap_or(0.0);
            let ratio = model.drag_ratio_sq().unwrap_or(f64::NAN);
            if delta2 == 0.0 || !ratio.is_finite() {
                return Err(invalid(
                    "DRAG quadrature needs a non-zero anharmonicity and lambda_12",
                ));
            }
            cfg.a_y * b * ratio / (4.0 * delta2)
        };
        Ok(Self {
            envelope: cfg.envelope.clone(),
            shape: Shape::of(&cfg.envelope),
            x_scale: cfg.a_x * b,
            y_scale,
            carrier,
        })
    }

    pub fn t_p(&self) -> f64 {
        self.envelope.t_p()
    }

    /// `(S_x, S_y)` at `t`.
    pub fn quadratures(&self, t: f64) -> Result<(f64, f64)> {
        let xi = self.envelope.value(t)?;
        let dxi = self.envelope.derivative_unchecked(t);
        let (s, c) = (self.carrier * t).sin_cos();
        Ok((self.x_scale * c * xi, self.y_scale * s * dxi))
    }

    /// `S(t) = S_x + S_y`.
    pub fn value(&self, t: f64) -> Result<f64> {
        let (sx, sy) = self.quadratures(t)?;
        Ok(sx + sy)
    }

    pub(crate) fn value_unchecked(&self, t: f64) -> f64 {
        let (s, c) = (self.carrier * t).sin_cos();
        self.value_with_carrier(t, c, s)
    }

    /// `S(t)` given `cos(w_d t)` and `sin(w_d t)` from the caller.
    pub(crate) fn value_with_carrier(&self, t: f64, cos_wt: f64, sin_wt: f64) -> f64 {
        let (xi, dxi) = match self.shape {
            Shape::Gaussian { center, inv_gamma, cutoff, inv_norm } => {
                let x = (t - center) * inv_gamma;
                let e = (-x * x).exp();
                ((e - cutoff) * inv_norm, -2.0 * x * inv_gamma * e * inv_norm)
            }
            Shape::Cosine => self.envelope.value_and_derivative_unchecked(t),
        };
        self.x_scale * cos_wt * xi + self.y_scale * sin_wt * dxi
    }

    /// `dS/dt`, analytic. Needs the envelope's second derivative for the
    /// DRAG term, taken by central difference of the analytic first derivative.
    pub fn time_derivative(&self, t: f64) -> Result<f64> {
        let tp = self.t_p();
        check_time(t, tp)?;
        let xi = self.envelope.value_unchecked(t);
        let dxi = self.envelope.derivative_unchecked(t);
        let (s, c) = (self.carrier * t).sin_cos();
        let w = self.carrier;
        let mut ds = self.x_scale * (-w * s * xi + c * dxi);
        if self.y_scale != 0.0 {
            let h = 1e-4 * tp;
            let ddxi = (self.envelope.derivative_unchecked(t + h)
                - self.envelope.derivative_unchecked(t - h))
                / (2.0 * h);
            ds += self.y_scale * (w * c * dxi + s * ddxi);
        }
        Ok(ds)
    }
}

/// `S(t)` for `cfg` driving `model`.
pub fn drive_signal(t: f64, cfg: &DriveConfig, model: &TruncatedModel) -> Result<f64> {
    DriveSignal::new(cfg, model)?.value(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + h * i as f64);
        }
        s * h / 3.0
    }

    #[test]
    fn gaussian_vanishes_at_edges() {
        for &w in &[0.25, 0.5, 1.0, 1.5] {
            let g = GaussianEnvelope::new(15.0, w).unwrap();
            assert!(g.value(0.0).unwrap().abs() < 1e-15);
            assert!(g.value(15.0).unwrap().abs() < 1e-15);
            assert!(g.value(7.0).unwrap() > 0.0);
        }
    }

    #[test]
    fn gaussian_peak_value() {
        let g = GaussianEnvelope::new(15.0, 1.0).unwrap();
        let gamma = 15.0 / (2.0 * SQRT_2);
        let cut = (-2.0f64).exp();
        let n = gamma * PI.sqrt() * libm::erf(SQRT_2) - 15.0 * cut;
        let expected = (1.0 - cut) / n;
        assert!((g.value(7.5).unwrap() - expected).abs() < 1e-15);
        let area = simpson(|t| g.value_unchecked(t), 0.0, 15.0, 20_000);
        assert!((area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_derivative_matches_finite_difference() {
        let g = GaussianEnvelope::new(12.0, 0.8).unwrap();
        let h = 1e-5;
        let mut worst = 0.0f64;
        for i in 1..200 {
            let t = 12.0 * i as f64 / 200.0;
            let fd = (g.value_unchecked(t + h) - g.value_unchecked(t - h)) / (2.0 * h);
            worst = worst.max((fd - g.derivative(t).unwrap()).abs());
        }
        assert!(worst < 1e-6, "worst {worst}");
        assert_eq!(g.derivative(6.0).unwrap(), 0.0);
    }

    #[test]
    fn out_of_window_times_rejected() {
        let g = Envelope::Gaussian(GaussianEnvelope::new(10.0, 1.0).unwrap());
        assert!(g.value(-1e-9).is_err());
        assert!(g.value(10.0 + 1e-9).is_err());
        assert!(g.derivative(11.0).is_err());
    }

    #[test]
    fn standard_cosine_pulse() {
        let c = CosineEnvelope::standard_pi(20.0).unwrap();
        assert!(c.value(0.0).unwrap().abs() < 1e-15);
        assert!(c.value(20.0).unwrap().abs() < 1e-14);
        // -(pi/t_p)(1 - cos(pi)) at the centre
        assert!((c.value(10.0).unwrap() + 2.0 * PI / 20.0).abs() < 1e-14);
        assert!((c.area() + PI).abs() < 1e-15);
        let area = simpson(|t| c.value_unchecked(t), 0.0, 20.0, 2000);
        assert!((area - c.area()).abs() < 1e-12);
    }

    #[test]
    fn cosine_harmonics_integrate_to_zero() {
        let c = CosineEnvelope::new(8.0, 1.3, vec![0.0, 0.4, -0.2, 0.1]).unwrap();
        let area = simpson(|t| c.value_unchecked(t), 0.0, 8.0, 4000);
        assert!((area - 1.3).abs() < 1e-12);
    }

    #[test]
    fn cosine_derivative_matches_finite_difference() {
        let c = CosineEnvelope::new(8.0, 1.3, vec![0.2, 0.4, -0.2, 0.1]).unwrap();
        let h = 1e-5;
        for i in 1..100 {
            let t = 8.0 * i as f64 / 100.0;
            let fd = (c.value_unchecked(t + h) - c.value_unchecked(t - h)) / (2.0 * h);
            assert!((fd - c.derivative(t).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn empty_alphas_rejected() {
        assert!(CosineEnvelope::new(10.0, PI, vec![]).is_err());
    }

    #[test]
    fn calibration_scales_inversely_with_lambda() {
        let env = Envelope::Gaussian(GaussianEnvelope::new(15.0, 1.0).unwrap());
        let b1 = calibrate_base_amplitude(&TruncatedModel::two_level(37.7, 1.0), &env).unwrap();
        let b2 = calibrate_base_amplitude(&TruncatedModel::two_level(37.7, 2.0), &env).unwrap();
        assert!((b1 - PI).abs() < 1e-15);
        assert!((b2 - b1 / 2.0).abs() < 1e-15);
        assert!(calibrate_base_amplitude(&TruncatedModel::two_level(37.7, 0.0), &env).is_err());
    }

    #[test]
    fn plain_pulse_vanishes_at_edges() {
        let env = Envelope::Gaussian(GaussianEnvelope::new(15.0, 1.0).unwrap());
        let m = TruncatedModel::two_level(37.7, 0.3);
        let cfg = DriveConfig::new(env);
        assert!(drive_signal(0.0, &cfg, &m).unwrap().abs() < 1e-14);
        assert!(drive_signal(15.0, &cfg, &m).unwrap().abs() < 1e-14);
    }

    #[test]
    fn drag_requires_level_two() {
        let env = Envelope::Gaussian(GaussianEnvelope::new(15.0, 1.0).unwrap());
        let m = TruncatedModel::two_level(37.7, 0.3);
        let cfg = DriveConfig::new(env).with_drag(1.0);
        assert!(DriveSignal::new(&cfg, &m).is_err());
    }

    #[test]
    fn signal_time_derivative_matches_finite_difference() {
        let env = Envelope::Gaussian(GaussianEnvelope::new(10.0, 1.0).unwrap());
        let mut m = TruncatedModel::two_level(37.7, 0.3);
        m.delta2 = Some(1.5);
        m.lambda12 = Some(0.43);
        let sig = DriveSignal::new(&DriveConfig::new(env).with_drag(2.0), &m).unwrap();
        let h = 1e-6;
        for i in 1..50 {
            let t = 10.0 * i as f64 / 50.0;
            let fd = (sig.value_unchecked(t + h) - sig.value_unchecked(t - h)) / (2.0 * h);
            let an = sig.time_derivative(t).unwrap();
            assert!((fd - an).abs() < 1e-5 * (1.0 + an.abs()), "t={t} fd={fd} an={an}");
        }
    }
}
