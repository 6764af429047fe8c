// Copyright 2026 The transmon-drag Contributors
// SPDX-License-Identifier: Apache-2.0

//! TOML run configuration.
//!
//! Every physical key carries its unit in the name. Frequencies the user
//! types are ordinary (MHz or GHz); they are converted to rad/ns here.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use transmon_core::lattice::TransmonParams;
use transmon_core::optimizer::{OptimizeConfig, SearchOrder, SweepSpec};
use transmon_core::pulses::{CosineEnvelope, DriveConfig, Envelope, GaussianEnvelope};
use transmon_core::truncation::TruncatedModel;
use transmon_core::{angular_to_ghz, ghz_to_angular};

use crate::error::{CliError, CliResult};

fn mhz_to_angular(mhz: f64) -> f64 {
    ghz_to_angular(mhz * 1e-3)
}

fn angular_to_mhz(omega: f64) -> f64 {
    angular_to_ghz(omega) * 1e3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub pulse: PulseSection,
    pub run: RunSection,
    pub optimizer: OptimizerSection,
    pub sweep: SweepSection,
    pub spectrum: SpectrumSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Full projected phase matrix.
    #[default]
    Full,
    /// Keep only `lambda_{j, j+1}`.
    NearestNeighbor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub ej_ghz: f64,
    pub ej_over_ec: f64,
    pub grid_sites: usize,
    pub phase_min_rad: f64,
    pub phase_max_rad: f64,
    /// Levels kept in the truncated model.
    pub dim: usize,
    pub coupling: Coupling,
    /// Extra `lambda_ij` pairs forced to zero.
    pub zero_elements: Vec<[usize; 2]>,
}

impl Default for ModelSection {
    fn default() -> Self {
        let p = TransmonParams::default();
        Self {
            ej_ghz: p.ej_ghz,
            ej_over_ec: p.ej_over_ec,
            grid_sites: p.grid_sites,
            phase_min_rad: p.phase_min,
            phase_max_rad: p.phase_max,
            dim: 3,
            coupling: Coupling::Full,
            zero_elements: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[default]
    Gaussian,
    Cosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSection {
    pub family: Family,
    pub tp_ns: f64,
    /// Gaussian cutoff parameter.
    pub w: f64,
    /// Cosine-series rotation angle.
    pub theta_rad: f64,
    /// Cosine-series coefficients.
    pub alphas: Vec<f64>,
    pub a_x: f64,
    pub a_y: f64,
    pub detuning_mhz: f64,
    /// Co-optimize detuning and `A_x` before propagating.
    pub optimize: bool,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self {
            family: Family::Gaussian,
            tp_ns: 10.0,
            w: 1.0,
            theta_rad: PI,
            alphas: vec![-1.0, 0.5],
            a_x: 1.0,
            a_y: 0.0,
            detuning_mhz: 0.0,
            optimize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Integration step; the propagator picks one when absent.
    pub dt_ps: Option<f64>,
    /// Sampling step for signal dumps and spectra.
    pub sample_dt_ns: f64,
    /// Record populations every this many integration steps.
    pub trajectory_every: Option<usize>,
    /// Also propagate on the full lattice and compare populations.
    pub lattice_reference: bool,
    // Execution settings below do not change results and are left out of the
    // embedded config.
    #[serde(skip_serializing)]
    pub out_dir: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub jobs: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            dt_ps: None,
            sample_dt_ns: transmon_core::spectra::DEFAULT_SAMPLE_DT,
            trajectory_every: None,
            lattice_reference: false,
            out_dir: None,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    /// Detuning search interval relative to the pulse detuning.
    pub delta_bracket_mhz: [f64; 2],
    pub ax_bracket: [f64; 2],
    pub tol: f64,
    pub max_rounds: usize,
    pub delta_xtol_mhz: f64,
    pub ax_xtol: f64,
    pub order: SearchOrder,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = OptimizeConfig::default();
        Self {
            delta_bracket_mhz: [angular_to_mhz(d.delta_bracket.0), angular_to_mhz(d.delta_bracket.1)],
            ax_bracket: [d.ax_bracket.0, d.ax_bracket.1],
            tol: d.tol,
            max_rounds: d.max_rounds,
            delta_xtol_mhz: angular_to_mhz(d.delta_xtol),
            ax_xtol: d.ax_xtol,
            order: d.order,
        }
    }
}

/// Explicit list or inclusive arithmetic range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range(RangeSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn values(&self) -> CliResult<Vec<f64>> {
        match self {
            Grid::List(v) => Ok(v.clone()),
            Grid::Range(r) => {
                if !(r.step > 0.0 && r.step.is_finite() && r.start.is_finite() && r.stop >= r.start) {
                    return Err(CliError::Validation(format!(
                        "bad range start = {}, stop = {}, step = {}",
                        r.start, r.stop, r.step
                    )));
                }
                let n = ((r.stop - r.start) / r.step + 1e-9).floor() as usize;
                Ok((0..=n).map(|i| r.start + i as f64 * r.step).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub tp_ns: Grid,
    pub a_y: Vec<f64>,
    /// Gaussian cutoffs; ignored for the cosine family.
    pub w: Vec<f64>,
    pub optimize: bool,
    pub fom_windows_ns: Vec<[f64; 2]>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            tp_ns: Grid::Range(RangeSpec { start: 8.0, stop: 30.0, step: 1.0 }),
            a_y: vec![0.0, 1.0, 2.0],
            w: vec![1.0],
            optimize: true,
            fom_windows_ns: vec![[10.0, 18.0], [17.0, 25.0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub pad_factor: usize,
    /// Also compute the same pulse with `A_y = 0` and report the ratio.
    pub drag_pair: bool,
    /// Linewidth level relative to the peak.
    pub linewidth_threshold: f64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            pad_factor: transmon_core::spectra::DEFAULT_PAD_FACTOR,
            drag_pair: true,
            linewidth_threshold: 1e-2,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn params(&self) -> TransmonParams {
        let m = &self.model;
        TransmonParams {
            ej_ghz: m.ej_ghz,
            ej_over_ec: m.ej_over_ec,
            grid_sites: m.grid_sites,
            phase_min: m.phase_min_rad,
            phase_max: m.phase_max_rad,
        }
    }

    /// Integration step in ns.
    pub fn dt_ns(&self) -> CliResult<Option<f64>> {
        match self.run.dt_ps {
            None => Ok(None),
            Some(ps) if ps.is_finite() && ps > 0.0 => Ok(Some(ps * 1e-3)),
            Some(ps) => Err(CliError::Validation(format!("dt_ps must be positive, got {ps}"))),
        }
    }

    pub fn envelope(&self) -> CliResult<Envelope> {
        let p = &self.pulse;
        let env = match p.family {
            Family::Gaussian => Envelope::Gaussian(GaussianEnvelope::new(p.tp_ns, p.w)?),
            Family::Cosine => Envelope::Cosine(CosineEnvelope::new(p.tp_ns, p.theta_rad, p.alphas.clone())?),
        };
        Ok(env)
    }

    pub fn drive(&self) -> CliResult<DriveConfig> {
        let p = &self.pulse;
        if ![p.a_x, p.a_y, p.detuning_mhz].iter().all(|v| v.is_finite()) {
            return Err(CliError::Validation("pulse amplitudes and detuning must be finite".into()));
        }
        Ok(DriveConfig::new(self.envelope()?)
            .with_amplitude(p.a_x)
            .with_drag(p.a_y)
            .with_detuning(mhz_to_angular(p.detuning_mhz)))
    }

    pub fn optimizer(&self) -> CliResult<OptimizeConfig> {
        let o = &self.optimizer;
        let cfg = OptimizeConfig {
            delta_bracket: (mhz_to_angular(o.delta_bracket_mhz[0]), mhz_to_angular(o.delta_bracket_mhz[1])),
            ax_bracket: (o.ax_bracket[0], o.ax_bracket[1]),
            tol: o.tol,
            max_rounds: o.max_rounds,
            delta_xtol: mhz_to_angular(o.delta_xtol_mhz),
            ax_xtol: o.ax_xtol,
            order: o.order,
            dt: self.dt_ns()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sweep_spec(&self) -> CliResult<SweepSpec> {
        let s = &self.sweep;
        let spec = SweepSpec {
            t_p: s.tp_ns.values()?,
            a_y: s.a_y.clone(),
            w: s.w.clone(),
            template: self.envelope()?,
            optimize: s.optimize,
            optimizer: self.optimizer()?,
        };
        spec.validate()?;
        let lo = spec.t_p.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = spec.t_p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for [a, b] in &s.fom_windows_ns {
            if !(a < b) {
                return Err(CliError::Validation(format!("empty FOM window [{a}, {b}] ns")));
            }
            if *a < lo || *b > hi {
                return Err(CliError::Validation(format!(
                    "FOM window [{a}, {b}] ns outside the swept range [{lo}, {hi}] ns"
                )));
            }
        }
        Ok(spec)
    }

    /// Applies the coupling switch to a freshly truncated model.
    pub fn shape_model(&self, model: TruncatedModel) -> CliResult<TruncatedModel> {
        let mut m = match self.model.coupling {
            Coupling::Full => model,
            Coupling::NearestNeighbor => model.nearest_neighbor_only(),
        };
        for &[i, j] in &self.model.zero_elements {
            if i >= m.dim() || j >= m.dim() {
                return Err(CliError::Validation(format!(
                    "zero_elements pair ({i}, {j}) outside dimension {}",
                    m.dim()
                )));
            }
            m = m.with_zeroed(i, j);
        }
        Ok(m)
    }

    /// Full config plus every check that does not need the model.
    pub fn validate(&self) -> CliResult<()> {
        self.params().validate()?;
        if self.model.dim < 2 {
            return Err(CliError::Validation(format!("dim must be at least 2, got {}", self.model.dim)));
        }
        if self.model.dim > self.model.grid_sites {
            return Err(CliError::Validation("dim exceeds grid_sites".into()));
        }
        self.drive()?;
        self.optimizer()?;
        if !(self.run.sample_dt_ns.is_finite() && self.run.sample_dt_ns > 0.0) {
            return Err(CliError::Validation("sample_dt_ns must be positive".into()));
        }
        if self.run.trajectory_every == Some(0) {
            return Err(CliError::Validation("trajectory_every must be at least 1".into()));
        }
        if self.run.jobs == Some(0) {
            return Err(CliError::Validation("jobs must be at least 1".into()));
        }
        if self.spectrum.pad_factor == 0 {
            return Err(CliError::Validation("pad_factor must be at least 1".into()));
        }
        let th = self.spectrum.linewidth_threshold;
        if !(th > 0.0 && th < 1.0) {
            return Err(CliError::Validation(format!("linewidth_threshold must lie in (0, 1), got {th}")));
        }
        Ok(())
    }
}

pub(crate) fn detuning_mhz(omega: f64) -> f64 {
    angular_to_mhz(omega)
}
