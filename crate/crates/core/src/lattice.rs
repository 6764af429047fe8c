// Copyright 2026 The transmon-drag Contributors
// SPDX-License-Identifier: Apache-2.0

//! Finite-difference Transmon Hamiltonian on a phase grid.
//!
//! The charging term `4 E_C n^2` with `n = -i d/dphi` becomes a
//! nearest-neighbour hopping `-tau` with `tau = 4 E_C / a^2` and the
//! Josephson term an on-site potential, giving the tight-binding form
//!
//! ```text
//! H = sum_k (2 tau - E_J cos phi_k) |k><k| - tau (|k><k+1| + |k+1><k|)
//! ```
//!
//! Sites include both endpoints of `[phase_min, phase_max]`; the wavefunction
//! is taken to vanish outside (hard walls). Energies are stored in rad/ns.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::tridiag::tridiagonal_eigen;
use crate::{angular_to_ghz, ghz_to_angular};

/// Junction constants and phase-grid layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonParams {
    /// Josephson energy in GHz (ordinary frequency).
    pub ej_ghz: f64,
    /// Dimensionless E_J / E_C.
    pub ej_over_ec: f64,
    pub grid_sites: usize,
    pub phase_min: f64,
    pub phase_max: f64,
}

impl Default for TransmonParams {
    /// E_J = 22.05 GHz, E_J/E_C = 100 on 100 sites spanning [-pi, pi].
    fn default() -> Self {
        Self {
            ej_ghz: 22.05,
            ej_over_ec: 100.0,
            grid_sites: 100,
            phase_min: -std::f64::consts::PI,
            phase_max: std::f64::consts::PI,
        }
    }
}

impl TransmonParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.ej_ghz, self.ej_over_ec, self.phase_min, self.phase_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("transmon parameters must be finite"));
        }
        if self.ej_ghz <= 0.0 {
            return Err(invalid(format!("E_J must be positive, got {}", self.ej_ghz)));
        }
        if self.ej_over_ec <= 0.0 {
            return Err(invalid(format!("E_J/E_C must be positive, got {}", self.ej_over_ec)));
        }
        if self.grid_sites < 3 {
            return Err(invalid(format!("need at least 3 grid sites, got {}", self.grid_sites)));
        }
        if self.phase_min >= self.phase_max {
            return Err(invalid("phase_min must be below phase_max"));
        }
        Ok(())
    }

    /// Charging energy E_C in GHz.
    pub fn ec_ghz(&self) -> f64 {
        self.ej_ghz / self.ej_over_ec
    }

    pub fn spacing(&self) -> f64 {
        (self.phase_max - self.phase_min) / (self.grid_sites - 1) as f64
    }
}

/// Symmetric tridiagonal lattice Hamiltonian (rad/ns).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeHamiltonian {
    /// On-site terms `2 tau - E_J cos(phi_k)`.
    pub onsite: Vec<f64>,
    /// Hopping magnitude `tau = 4 E_C / a^2`; the off-diagonal entries are `-tau`.
    pub hopping: f64,
    pub phase_coords: Vec<f64>,
    pub spacing: f64,
}

/// Builds the tight-binding Hamiltonian for `params`.
pub fn build_lattice(params: &TransmonParams) -> Result<LatticeHamiltonian> {
    params.validate()?;
    LatticeHamiltonian::from_energies(
        params.ej_ghz,
        params.ec_ghz(),
        params.grid_sites,
        params.phase_min,
        params.phase_max,
    )
}

impl LatticeHamiltonian {
    /// Lattice from explicit energies in GHz. `ej_ghz = 0` gives the
    /// free-particle chain with hard walls.
    pub fn from_energies(
        ej_ghz: f64,
        ec_ghz: f64,
        grid_sites: usize,
        phase_min: f64,
        phase_max: f64,
    ) -> Result<Self> {
        if ![ej_ghz, ec_ghz, phase_min, phase_max].iter().all(|v| v.is_finite()) {
            return Err(invalid("lattice energies and domain must be finite"));
        }
        if ec_ghz <= 0.0 {
            return Err(invalid(format!("E_C must be positive, got {ec_ghz}")));
        }
        if grid_sites < 3 {
            return Err(invalid(format!("need at least 3 grid sites, got {grid_sites}")));
        }
        if phase_min >= phase_max {
            return Err(invalid("phase_min must be below phase_max"));
        }
        let n = grid_sites;
        let a = (phase_max - phase_min) / (n - 1) as f64;
        let ej = ghz_to_angular(ej_ghz);
        let tau = 4.0 * ghz_to_angular(ec_ghz) / (a * a);

        let phase_coords: Vec<f64> = (0..n)
            .map(|k| if k == n - 1 { phase_max } else { phase_min + a * k as f64 })
            .collect();
        let onsite = phase_coords.iter().map(|phi| 2.0 * tau - ej * phi.cos()).collect();
        Ok(Self { onsite, hopping: tau, phase_coords, spacing: a })
    }

    pub fn len(&self) -> usize {
        self.onsite.len()
    }

    pub fn is_empty(&self) -> bool {
        self.onsite.is_empty()
    }

    /// Charging energy in rad/ns, recovered from the hopping.
    pub fn charging_energy(&self) -> f64 {
        0.25 * self.hopping * self.spacing * self.spacing
    }

    /// `y = H x` using the tridiagonal structure.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        for k in 0..n {
            let mut acc = self.onsite[k] * x[k];
            if k > 0 {
                acc -= self.hopping * x[k - 1];
            }
            if k + 1 < n {
                acc -= self.hopping * x[k + 1];
            }
            y[k] = acc;
        }
    }

    /// Upper bound on the spectral radius (Gershgorin).
    pub fn spectral_bound(&self) -> f64 {
        self.onsite
            .iter()
            .map(|d| d.abs() + 2.0 * self.hopping)
            .fold(0.0, f64::max)
    }

    /// Dense copy, row-major. Intended for tests and small grids.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.len();
        let mut m = vec![0.0; n * n];
        for k in 0..n {
            m[k * n + k] = self.onsite[k];
            if k + 1 < n {
                m[k * n + k + 1] = -self.hopping;
                m[(k + 1) * n + k] = -self.hopping;
            }
        }
        m
    }
}

/// Lowest eigenpairs of the lattice, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// Energies in rad/ns.
    pub energies: Vec<f64>,
    /// `states[j][k]`: amplitude of level `j` on site `k`.
    pub states: Vec<Vec<f64>>,
}

impl EigenSystem {
    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    pub fn energies_ghz(&self) -> Vec<f64> {
        self.energies.iter().map(|&e| angular_to_ghz(e)).collect()
    }
}

/// Solves for the lowest `n_levels` eigenpairs.
///
/// Each wavefunction's sign is fixed so that its largest-magnitude
/// component is positive; near-ties (relative 1e-8) go to the larger
/// phase coordinate, which keeps odd states positive on the right.
pub fn solve_eigensystem(h: &LatticeHamiltonian, n_levels: usize) -> Result<EigenSystem> {
    let n = h.len();
    if n_levels == 0 || n_levels > n {
        return Err(invalid(format!("n_levels must be in 1..={n}, got {n_levels}")));
    }
    let offdiag = vec![-h.hopping; n - 1];
    let (values, vectors) = tridiagonal_eigen(&h.onsite, &offdiag)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut energies = Vec::with_capacity(n_levels);
    let mut states = Vec::with_capacity(n_levels);
    for &col in order.iter().take(n_levels) {
        energies.push(values[col]);
        let mut psi: Vec<f64> = (0..n).map(|k| vectors[k * n + col]).collect();
        let norm = psi.iter().map(|v| v * v).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|v| *v /= norm);
        fix_sign(&mut psi);
        states.push(psi);
    }
    Ok(EigenSystem { energies, states })
}

fn fix_sign(psi: &mut [f64]) {
    let max = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let pivot = psi
        .iter()
        .rposition(|v| v.abs() >= max * (1.0 - 1e-8))
        .unwrap_or(0);
    if psi[pivot] < 0.0 {
        psi.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Diagonal phase operator `sum_k phi_k |k><k|` on the full lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOperator {
    pub diagonal: Vec<f64>,
}

pub fn phase_operator(h: &LatticeHamiltonian) -> PhaseOperator {
    PhaseOperator { diagonal: h.phase_coords.clone() }
}

impl PhaseOperator {
    /// `<a| phi |b>` for two lattice vectors.
    pub fn matrix_element(&self, a: &[f64], b: &[f64]) -> f64 {
        self.diagonal
            .iter()
            .zip(a.iter().zip(b))
            .map(|(phi, (x, y))| phi * x * y)
            .sum()
    }
}

/// Lowest transition frequencies, rad/ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionFrequencies {
    pub omega01: f64,
    pub omega12: f64,
    /// Anharmonicity `omega01 - omega12`.
    pub delta2: f64,
}

impl TransitionFrequencies {
    pub fn omega01_ghz(&self) -> f64 {
        angular_to_ghz(self.omega01)
    }

    pub fn omega12_ghz(&self) -> f64 {
        angular_to_ghz(self.omega12)
    }

    pub fn delta2_ghz(&self) -> f64 {
        angular_to_ghz(self.delta2)
    }

    pub fn relative_anharmonicity(&self) -> f64 {
        self.delta2 / self.omega01
    }
}

pub fn transition_frequencies(eigs: &EigenSystem) -> Result<TransitionFrequencies> {
    if eigs.levels() < 3 {
        return Err(invalid(format!("need at least 3 levels, have {}", eigs.levels())));
    }
    let e = &eigs.energies;
    let omega01 = e[1] - e[0];
    let omega12 = e[2] - e[1];
    Ok(TransitionFrequencies { omega01, omega12, delta2: omega01 - omega12 })
}
