// Copyright 2026 The transmon-drag Contributors
// SPDX-License-Identifier: Apache-2.0

//! Projection of the lattice onto its lowest `d` eigenstates.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::{EigenSystem, PhaseOperator};
use crate::{angular_to_ghz, ghz_to_angular};

/// Truncated `d`-level model: diagonal `H0'` and real symmetric coupling `Sigma_x'`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedModel {
    /// Level energies in rad/ns with `E_0 = 0`.
    pub h0: Vec<f64>,
    /// `lambda_ij = <psi_i| phi |psi_j>`.
    pub sigma_x: Array2<f64>,
    pub omega01: f64,
    /// Anharmonicity `omega01 - omega12`; `None` if fewer than three levels were solved.
    pub delta2: Option<f64>,
    /// `lambda_12`, kept even for `d = 2` so the DRAG coefficient stays defined.
    pub lambda12: Option<f64>,
}

/// Builds the truncated model from solved eigenstates.
///
/// Level 2 data (`delta2`, `lambda12`) is taken from `eigs` whenever it
/// holds at least three levels, independent of `dim`.
pub fn truncate(eigs: &EigenSystem, phase_op: &PhaseOperator, dim: usize) -> Result<TruncatedModel> {
    if dim < 2 {
        return Err(invalid(format!("truncated dimension must be at least 2, got {dim}")));
    }
    if dim > eigs.levels() {
        return Err(invalid(format!(
            "truncated dimension {dim} exceeds the {} solved levels",
            eigs.levels()
        )));
    }
    let e0 = eigs.energies[0];
    let h0: Vec<f64> = eigs.energies[..dim].iter().map(|e| e - e0).collect();

    let mut sigma_x = Array2::zeros((dim, dim));
    for i in 0..dim {
        for j in i..dim {
            let v = phase_op.matrix_element(&eigs.states[i], &eigs.states[j]);
            sigma_x[[i, j]] = v;
            sigma_x[[j, i]] = v;
        }
    }

    let (delta2, lambda12) = if eigs.levels() >= 3 {
        let e = &eigs.energies;
        let d2 = (e[1] - e[0]) - (e[2] - e[1]);
        let l12 = phase_op.matrix_element(&eigs.states[1], &eigs.states[2]);
        (Some(d2), Some(l12))
    } else {
        (None, None)
    };

    Ok(TruncatedModel { omega01: h0[1], h0, sigma_x, delta2, lambda12 })
}

impl TruncatedModel {
    pub fn dim(&self) -> usize {
        self.h0.len()
    }

    pub fn lambda(&self, i: usize, j: usize) -> f64 {
        self.sigma_x[[i, j]]
    }

    pub fn lambda01(&self) -> f64 {
        self.sigma_x[[0, 1]]
    }

    /// `(lambda_12 / lambda_01)^2`, the DRAG quadrature's level-ratio factor.
    pub fn drag_ratio_sq(&self) -> Option<f64> {
        self.lambda12.map(|l12| (l12 / self.lambda01()).powi(2))
    }

    /// Largest frequency present in `H0'`.
    pub fn max_energy(&self) -> f64 {
        self.h0.iter().copied().fold(0.0, f64::max)
    }

    /// Copy with every coupling beyond nearest neighbours (e.g. `lambda_03`) set to zero.
    pub fn nearest_neighbor_only(&self) -> Self {
        let mut out = self.clone();
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                if i.abs_diff(j) != 1 {
                    out.sigma_x[[i, j]] = 0.0;
                }
            }
        }
        out
    }

    /// Copy with the single symmetric pair `(i, j)` zeroed.
    pub fn with_zeroed(&self, i: usize, j: usize) -> Self {
        let mut out = self.clone();
        out.sigma_x[[i, j]] = 0.0;
        out.sigma_x[[j, i]] = 0.0;
        out
    }

    /// Two-level model `H0 = diag(0, omega01)`, `Sigma_x = lambda01 X`.
    /// Handy for analytic checks; carries no level-2 data.
    pub fn two_level(omega01: f64, lambda01: f64) -> Self {
        let mut sigma_x = Array2::zeros((2, 2));
        sigma_x[[0, 1]] = lambda01;
        sigma_x[[1, 0]] = lambda01;
        Self { h0: vec![0.0, omega01], sigma_x, omega01, delta2: None, lambda12: None }
    }

    pub fn to_json(&self) -> ModelJson {
        let d = self.dim();
        ModelJson {
            dim: d,
            energies_ghz: self.h0.iter().map(|&e| angular_to_ghz(e)).collect(),
            omega01_ghz: angular_to_ghz(self.omega01),
            delta2_ghz: self.delta2.map(angular_to_ghz),
            lambda12: self.lambda12,
            lambda: (0..d).map(|i| (0..d).map(|j| self.sigma_x[[i, j]]).collect()).collect(),
        }
    }

    pub fn from_json(json: &ModelJson) -> Result<Self> {
        let d = json.dim;
        if d < 2 || json.energies_ghz.len() != d || json.lambda.len() != d {
            return Err(invalid("model JSON has inconsistent dimensions"));
        }
        let mut sigma_x = Array2::zeros((d, d));
        for (i, row) in json.lambda.iter().enumerate() {
            if row.len() != d {
                return Err(invalid("model JSON lambda matrix is not square"));
            }
            for (j, &v) in row.iter().enumerate() {
                sigma_x[[i, j]] = v;
            }
        }
        for i in 0..d {
            for j in 0..i {
                if sigma_x[[i, j]] != sigma_x[[j, i]] {
                    return Err(invalid("model JSON lambda matrix is not symmetric"));
                }
            }
        }
        let h0: Vec<f64> = json.energies_ghz.iter().map(|&f| ghz_to_angular(f)).collect();
        Ok(Self {
            omega01: h0[1],
            h0,
            sigma_x,
            delta2: json.delta2_ghz.map(ghz_to_angular),
            lambda12: json.lambda12,
        })
    }
}

/// Serialized form of [`TruncatedModel`]; energies in GHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub dim: usize,
    pub energies_ghz: Vec<f64>,
    pub omega01_ghz: f64,
    pub delta2_ghz: Option<f64>,
    pub lambda12: Option<f64>,
    pub lambda: Vec<Vec<f64>>,
}

/// Pseudo-Pauli `y` and `z` operators built from the truncated coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoPauliSet {
    pub sigma_y: Array2<Complex64>,
    pub sigma_z: Array2<Complex64>,
}

/// `Sigma_y = -i (Sigma_+ - Sigma_-)` with `Sigma_+` the strict upper triangle
/// of `Sigma_x`, and `Sigma_z = [Sigma_x, Sigma_y] / 2i`.
pub fn pseudo_pauli(model: &TruncatedModel) -> PseudoPauliSet {
    let d = model.dim();
    let i_unit = Complex64::new(0.0, 1.0);
    let sx = model.sigma_x.mapv(|v| Complex64::new(v, 0.0));
    let mut sy = Array2::<Complex64>::zeros((d, d));
    for i in 0..d {
        for j in (i + 1)..d {
            let l = model.sigma_x[[i, j]];
            sy[[i, j]] = -i_unit * l;
            sy[[j, i]] = i_unit * l;
        }
    }
    let comm = sx.dot(&sy) - sy.dot(&sx);
    let sz = comm.mapv(|c| c / (2.0 * i_unit));
    PseudoPauliSet { sigma_y: sy, sigma_z: sz }
}
