// Copyright 2026 The transmon-drag Contributors
// SPDX-License-Identifier: Apache-2.0

//! Single-qubit gate simulation for weakly anharmonic (Transmon) qubits.
//!
//! The pipeline is: build the phase-grid lattice ([`lattice`]), project it
//! onto its lowest levels ([`truncation`]), synthesize a two-quadrature
//! drive ([`pulses`]), integrate the lab-frame Schrödinger equation
//! ([`propagator`]), and co-optimize detuning and amplitude per pulse
//! width ([`optimizer`]). [`spectra`] analyses the drive in frequency space.
//!
//! Units: user-facing frequencies are ordinary frequencies in GHz. Internally
//! every energy and frequency is angular (rad/ns) and time is in ns.

pub mod error;
pub mod lattice;
pub mod optimizer;
pub mod propagator;
pub mod pulses;
pub mod spectra;
pub mod truncation;
mod tridiag;

pub use error::{Error, Result};
pub use tridiag::tridiagonal_eigen;

use std::f64::consts::TAU;

/// GHz (ordinary) to rad/ns.
pub fn ghz_to_angular(f_ghz: f64) -> f64 {
    TAU * f_ghz
}

/// rad/ns to GHz (ordinary).
pub fn angular_to_ghz(omega: f64) -> f64 {
    omega / TAU
}
