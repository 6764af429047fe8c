// Copyright 2026 The transmon-drag Contributors
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use transmon_core::lattice::{build_lattice, phase_operator, solve_eigensystem, TransmonParams};
use transmon_core::pulses::{
    calibrate_base_amplitude, CosineEnvelope, DriveConfig, DriveSignal, Envelope, GaussianEnvelope,
};
use transmon_core::truncation::{truncate, TruncatedModel};

mod common;
use common::simpson;

fn model() -> TruncatedModel {
    let h = build_lattice(&TransmonParams::default()).unwrap();
    let eigs = solve_eigensystem(&h, 3).unwrap();
    truncate(&eigs, &phase_operator(&h), 3).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gaussian_has_unit_area(w in 0.25f64..1.5, t_p in 5.0f64..40.0) {
        let g = GaussianEnvelope::new(t_p, w).unwrap();
        let area = simpson(|t| g.value(t).unwrap(), 0.0, t_p, 4000);
        prop_assert!((area - 1.0).abs() < 1e-9, "area {area}");
        prop_assert!(g.value(0.0).unwrap().abs() < 1e-15);
        prop_assert!(g.value(t_p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn gaussian_derivative_matches_finite_difference(
        w in 0.25f64..1.5,
        t_p in 5.0f64..40.0,
        frac in 0.01f64..0.99,
    ) {
        let g = GaussianEnvelope::new(t_p, w).unwrap();
        let t = frac * t_p;
        let h = 1e-5 * t_p;
        let fd = (g.value(t + h).unwrap() - g.value(t - h).unwrap()) / (2.0 * h);
        let peak = g.value(0.5 * t_p).unwrap() / t_p;
        prop_assert!((fd - g.derivative(t).unwrap()).abs() < 1e-6 * peak.max(1e-3));
    }

    #[test]
    fn gaussian_is_symmetric_about_centre(w in 0.25f64..1.5, t_p in 5.0f64..40.0, frac in 0.0f64..0.5) {
        let g = GaussianEnvelope::new(t_p, w).unwrap();
        let t = frac * t_p;
        prop_assert!((g.value(t).unwrap() - g.value(t_p - t).unwrap()).abs() < 1e-13);
        prop_assert!((g.derivative(t).unwrap() + g.derivative(t_p - t).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn calibrated_pulses_share_quadrature_area(t_p in 5.0f64..40.0, w in 0.3f64..1.5) {
        let m = model();
        for env in [
            Envelope::Gaussian(GaussianEnvelope::new(t_p, w).unwrap()),
            Envelope::Cosine(CosineEnvelope::standard_pi(t_p).unwrap()),
        ] {
            let b = calibrate_base_amplitude(&m, &env).unwrap();
            let area = simpson(|t| env.value(t).unwrap(), 0.0, t_p, 4000);
            prop_assert!((b * area * m.lambda01() - std::f64::consts::PI).abs() < 1e-8);
        }
    }

    #[test]
    fn signal_derivative_matches_finite_difference(a_y in -2.0f64..3.0, frac in 0.05f64..0.95) {
        let m = model();
        let drive = DriveConfig::new(Envelope::Gaussian(GaussianEnvelope::new(12.0, 1.0).unwrap()))
            .with_drag(a_y);
        let s = DriveSignal::new(&drive, &m).unwrap();
        let t = frac * 12.0;
        let h = 1e-6;
        let fd = (s.value(t + h).unwrap() - s.value(t - h).unwrap()) / (2.0 * h);
        let scale = s.x_scale * s.carrier / 12.0;
        prop_assert!((fd - s.time_derivative(t).unwrap()).abs() < 1e-5 * scale);
    }
}

#[test]
fn cosine_envelope_matches_closed_form() {
    let t_p = 12.0;
    let c = CosineEnvelope::standard_pi(t_p).unwrap();
    let area = simpson(|t| c.value(t).unwrap(), 0.0, t_p, 2000);
    assert!((area - c.area()).abs() < 1e-12);
    assert!((c.value(0.0).unwrap()).abs() < 1e-15);
    assert!((c.value(t_p).unwrap()).abs() < 1e-14);
}
