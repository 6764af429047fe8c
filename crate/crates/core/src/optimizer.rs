// Copyright 2026 The transmon-drag Contributors
// SPDX-License-Identifier: Apache-2.0

//! Co-optimization of carrier detuning and amplitude, parameter sweeps and
//! figures of merit.
//!
//! [`optimize_pulse`] alternates one-dimensional golden-section searches over
//! the detuning `delta` and the amplitude `A_x`, minimizing the two-state
//! infidelity `1 - F'`. First-round searches start with a coarse scan of
//! the full bracket so that a side lobe of the detuning response cannot
//! capture the search. Brackets are re-centred on the current point every round and
//! widened when the optimum lands on an edge.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::propagator::evolve_qubit_columns;
use crate::pulses::{DriveConfig, Envelope};
use crate::truncation::TruncatedModel;

/// Floor applied to infidelities written for log-scale plots.
pub const REPORT_FLOOR: f64 = 1e-10;

const GOLDEN: f64 = 0.618_033_988_749_894_8;
const SCAN_INTERVALS: usize = 6;
const MAX_WIDENINGS: usize = 8;

/// Which coordinate each round searches first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchOrder {
    #[default]
    DetuningFirst,
    AmplitudeFirst,
}

/// Settings for [`optimize_pulse`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeConfig {
    /// Detuning search interval, rad/ns, relative to the template's detuning.
    pub delta_bracket: (f64, f64),
    /// Absolute `A_x` search interval.
    pub ax_bracket: (f64, f64),
    /// Stop when a full round improves the infidelity by less than this.
    pub tol: f64,
    pub max_rounds: usize,
    /// Golden-section resolution for the detuning, rad/ns.
    pub delta_xtol: f64,
    /// Golden-section resolution for `A_x`.
    pub ax_xtol: f64,
    pub order: SearchOrder,
    /// Integration step, ns; `None` uses the propagator default.
    pub dt: Option<f64>,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        let d = crate::ghz_to_angular(0.05);
        Self {
            delta_bracket: (-d, d),
            ax_bracket: (0.9, 1.1),
            tol: 1e-8,
            max_rounds: 50,
            delta_xtol: 1e-6,
            ax_xtol: 1e-7,
            order: SearchOrder::DetuningFirst,
            dt: None,
        }
    }
}

impl OptimizeConfig {
    pub fn validate(&self) -> Result<()> {
        let ok_bracket = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ok_bracket(self.delta_bracket) {
            return Err(invalid("detuning bracket must be a finite, non-empty interval"));
        }
        if !ok_bracket(self.ax_bracket) {
            return Err(invalid("A_x bracket must be a finite, non-empty interval"));
        }
        if !(self.tol > 0.0) || !(self.delta_xtol > 0.0) || !(self.ax_xtol > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        if self.max_rounds == 0 {
            return Err(invalid("max_rounds must be at least 1"));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(invalid(format!("time step must be positive, got {dt}")));
            }
        }
        Ok(())
    }

}

/// Result of [`optimize_pulse`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizedPulse {
    /// Optimal detuning, rad/ns.
    pub detuning: f64,
    pub a_x: f64,
    /// Unclamped `1 - F'` at the optimum.
    pub infidelity: f64,
    /// Mean leakage into level 2; zero for a two-level model.
    pub gamma2: f64,
    pub rounds: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best infidelity after each round, starting with the template's.
    pub history: Vec<f64>,
}

/// Two-state infidelity and leakage of one drive.
pub fn evaluate(model: &TruncatedModel, drive: &DriveConfig, dt: Option<f64>) -> Result<(f64, f64)> {
    let c = evolve_qubit_columns(model, drive, dt)?;
    Ok(((1.0 - c.two_state_fidelity()).max(0.0), c.leakage()))
}

struct Objective<'a> {
    model: &'a TruncatedModel,
    template: &'a DriveConfig,
    dt: Option<f64>,
    evaluations: usize,
}

impl Objective<'_> {
    fn eval(&mut self, detuning: f64, a_x: f64) -> Result<f64> {
        self.evaluations += 1;
        let drive = self.template.clone().with_detuning(detuning).with_amplitude(a_x);
        Ok(1.0 - evolve_qubit_columns(self.model, &drive, self.dt)?.two_state_fidelity())
    }
}

#[derive(Clone, Copy)]
enum Var {
    Detuning,
    Amplitude,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::Detuning => "detuning",
            Var::Amplitude => "A_x",
        }
    }
}

/// Minimizes `f` on `[lo, hi]` by golden section to `xtol`. With `scan`,
/// a coarse grid first picks the best pair of cells to refine. Returns
/// `(x, f(x), pinned)`, where `pinned` flags a minimum on the bracket
/// boundary.
fn line_search<F>(mut f: F, lo: f64, hi: f64, xtol: f64, scan: bool) -> Result<(f64, f64, bool)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b, mut grid_best) = (lo, hi, (lo, f64::INFINITY));
    if scan {
        let step = (hi - lo) / SCAN_INTERVALS as f64;
        let mut best = (0, f64::INFINITY);
        for i in 0..=SCAN_INTERVALS {
            let v = f(lo + step * i as f64)?;
            if v < best.1 {
                best = (i, v);
            }
        }
        let i = best.0;
        a = lo + step * i.saturating_sub(1) as f64;
        b = lo + step * (i + 1).min(SCAN_INTERVALS) as f64;
        grid_best = (lo + step * i as f64, best.1);
    }

    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > xtol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d)?;
        }
    }
    let (mut x, mut fx) = if fc < fd { (c, fc) } else { (d, fd) };
    if grid_best.1 <= fx {
        (x, fx) = grid_best;
    }
    let pinned = (x - lo) <= 2.0 * xtol || (hi - x) <= 2.0 * xtol;
    Ok((x, fx, pinned))
}

/// Line search with bracket widening on edge hits.
fn search_coordinate(
    obj: &mut Objective<'_>,
    var: Var,
    center: f64,
    half_width: f64,
    other: f64,
    xtol: f64,
    scan: bool,
) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (center - half_width, center + half_width);
    for _ in 0..=MAX_WIDENINGS {
        let (x, fx, pinned) = line_search(
            |x| match var {
                Var::Detuning => obj.eval(x, other),
                Var::Amplitude => obj.eval(other, x),
            },
            lo,
            hi,
            xtol,
            scan,
        )?;
        if !pinned {
            return Ok((x, fx));
        }
        let width = hi - lo;
        warn!("{} optimum at bracket edge {x:.6e} of [{lo:.6e}, {hi:.6e}]; widening", var.name());
        if x - lo < hi - x {
            lo -= width;
        } else {
            hi += width;
        }
    }
    Err(Error::BracketExhausted { variable: var.name(), lo, hi })
}

/// Minimizes `1 - F'` over detuning and `A_x` for a fixed envelope and `A_y`.
///
/// The template's detuning and amplitude are the starting point. The first
/// round searches the full configured brackets around it; later rounds use
/// half-widths of four times the previous round's move, bounded by the
/// configured half-width and a floor of `100 * xtol`.
pub fn optimize_pulse(
    model: &TruncatedModel,
    template: &DriveConfig,
    cfg: &OptimizeConfig,
) -> Result<OptimizedPulse> {
    cfg.validate()?;
    let mut obj = Objective { model, template, dt: cfg.dt, evaluations: 0 };

    let mut delta = template.detuning;
    let mut a_x = template.a_x;
    let mut best = obj.eval(delta, a_x)?;
    let mut history = vec![best];

    let full_d = 0.5 * (cfg.delta_bracket.1 - cfg.delta_bracket.0);
    let full_a = 0.5 * (cfg.ax_bracket.1 - cfg.ax_bracket.0);
    // First round honours the configured (possibly asymmetric) intervals.
    let mut center_d = delta + 0.5 * (cfg.delta_bracket.0 + cfg.delta_bracket.1);
    let mut center_a = 0.5 * (cfg.ax_bracket.0 + cfg.ax_bracket.1);
    let (mut hw_d, mut hw_a) = (full_d, full_a);

    let mut converged = false;
    let mut rounds = 0;
    while rounds < cfg.max_rounds {
        rounds += 1;
        let (start_d, start_a) = (delta, a_x);
        let vars = match cfg.order {
            SearchOrder::DetuningFirst => [Var::Detuning, Var::Amplitude],
            SearchOrder::AmplitudeFirst => [Var::Amplitude, Var::Detuning],
        };
        for var in vars {
            let (x, fx) = match var {
                Var::Detuning => {
                    search_coordinate(&mut obj, var, center_d, hw_d, a_x, cfg.delta_xtol, rounds == 1)?
                }
                Var::Amplitude => {
                    search_coordinate(&mut obj, var, center_a, hw_a, delta, cfg.ax_xtol, rounds == 1)?
                }
            };
            if fx < best {
                best = fx;
                match var {
                    Var::Detuning => delta = x,
                    Var::Amplitude => a_x = x,
                }
            }
        }
        let previous = *history.last().expect("history starts non-empty");
        history.push(best);

        let move_d = (delta - start_d).abs();
        let move_a = (a_x - start_a).abs();
        hw_d = (4.0 * move_d).max(100.0 * cfg.delta_xtol).min(full_d);
        hw_a = (4.0 * move_a).max(100.0 * cfg.ax_xtol).min(full_a);
        center_d = delta;
        center_a = a_x;

        if rounds > 1 && previous - best < cfg.tol {
            converged = true;
            break;
        }
    }

    let drive = template.clone().with_detuning(delta).with_amplitude(a_x);
    let (infidelity, gamma2) = evaluate(model, &drive, cfg.dt)?;
    Ok(OptimizedPulse {
        detuning: delta,
        a_x,
        infidelity,
        gamma2,
        rounds,
        evaluations: obj.evaluations + 1,
        converged,
        history,
    })
}

/// One point of a fidelity curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t_p: f64,
    /// Unclamped `1 - F'`.
    pub infidelity: f64,
    /// Detuning used, rad/ns.
    pub detuning: f64,
    pub a_x: f64,
    pub gamma2: f64,
    /// Finite-difference `d(1 - F')/dt_p`, per ns.
    pub slope: f64,
}

impl CurvePoint {
    /// Infidelity floored at [`REPORT_FLOOR`] for log-scale output.
    pub fn reported_infidelity(&self) -> f64 {
        self.infidelity.max(REPORT_FLOOR)
    }
}

/// Infidelity against pulse width for one `(A_y, W)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityCurve {
    pub a_y: f64,
    /// Gaussian cutoff; `None` for the cosine family.
    pub w: Option<f64>,
    pub dim: usize,
    pub family: String,
    pub optimized: bool,
    pub points: Vec<CurvePoint>,
}

impl FidelityCurve {
    pub fn t_p(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t_p).collect()
    }

    pub fn infidelities(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.infidelity).collect()
    }

    /// Linear interpolation of the infidelity at `t_p`.
    pub fn infidelity_at(&self, t_p: f64) -> Result<f64> {
        let pts = &self.points;
        let (first, last) = match (pts.first(), pts.last()) {
            (Some(f), Some(l)) => (f.t_p, l.t_p),
            _ => return Err(invalid("empty fidelity curve")),
        };
        if !(t_p >= first && t_p <= last) {
            return Err(invalid(format!("t_p = {t_p} ns outside curve range [{first}, {last}]")));
        }
        let i = pts.partition_point(|p| p.t_p < t_p);
        if pts[i].t_p == t_p {
            return Ok(pts[i].infidelity);
        }
        let (a, b) = (&pts[i - 1], &pts[i]);
        let s = (t_p - a.t_p) / (b.t_p - a.t_p);
        Ok(a.infidelity + s * (b.infidelity - a.infidelity))
    }

    /// First `t_p` at which the curve falls to `threshold`, interpolated in
    /// `log10(1 - F')`. `None` if it never does.
    pub fn first_crossing(&self, threshold: f64) -> Option<f64> {
        let pts = &self.points;
        if pts.first()?.infidelity <= threshold {
            return Some(pts[0].t_p);
        }
        pts.windows(2).find_map(|w| {
            let (a, b) = (&w[0], &w[1]);
            if b.infidelity > threshold {
                return None;
            }
            let la = a.reported_infidelity().log10();
            let lb = b.reported_infidelity().log10();
            let s = (la - threshold.log10()) / (la - lb);
            Some(a.t_p + s * (b.t_p - a.t_p))
        })
    }
}

fn fill_slopes(points: &mut [CurvePoint]) {
    let n = points.len();
    if n < 2 {
        return;
    }
    for i in 0..n {
        let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
        points[i].slope =
            (points[b].infidelity - points[a].infidelity) / (points[b].t_p - points[a].t_p);
    }
}

/// Grid specification for [`sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Pulse widths, ns, strictly ascending.
    pub t_p: Vec<f64>,
    pub a_y: Vec<f64>,
    /// Gaussian cutoffs. Ignored for a cosine template.
    pub w: Vec<f64>,
    /// Envelope family and shape; its width is replaced by each grid value.
    pub template: Envelope,
    pub optimize: bool,
    pub optimizer: OptimizeConfig,
}

impl SweepSpec {
    /// Gaussian sweep on the 8 to 30 ns grid in 1 ns steps.
    pub fn gaussian(a_y: Vec<f64>, w: Vec<f64>, optimize: bool) -> Result<Self> {
        Ok(Self {
            t_p: default_tp_grid(),
            a_y,
            w,
            template: Envelope::Gaussian(crate::pulses::GaussianEnvelope::new(10.0, 1.0)?),
            optimize,
            optimizer: OptimizeConfig::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_p.is_empty() || self.a_y.is_empty() {
            return Err(invalid("sweep grids must be non-empty"));
        }
        if self.t_p.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(invalid("pulse widths must be positive"));
        }
        if self.t_p.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("pulse widths must be strictly ascending"));
        }
        if self.a_y.iter().any(|a| !a.is_finite()) {
            return Err(invalid("A_y values must be finite"));
        }
        if matches!(self.template, Envelope::Gaussian(_)) && self.w.is_empty() {
            return Err(invalid("a Gaussian sweep needs at least one W"));
        }
        self.optimizer.validate()
    }

    fn widths(&self) -> Vec<Option<f64>> {
        match self.template {
            Envelope::Gaussian(_) => self.w.iter().map(|&w| Some(w)).collect(),
            Envelope::Cosine(_) => vec![None],
        }
    }

    fn envelope(&self, t_p: f64, w: Option<f64>) -> Result<Envelope> {
        match (w, &self.template) {
            (Some(w), Envelope::Gaussian(_)) => {
                Ok(Envelope::Gaussian(crate::pulses::GaussianEnvelope::new(t_p, w)?))
            }
            _ => self.template.with_width(t_p),
        }
    }
}

/// `8, 9, ..., 30` ns.
pub fn default_tp_grid() -> Vec<f64> {
    (8..=30).map(f64::from).collect()
}

fn sweep_point(
    model: &TruncatedModel,
    spec: &SweepSpec,
    a_y: f64,
    w: Option<f64>,
    t_p: f64,
) -> Result<CurvePoint> {
    let envelope = spec.envelope(t_p, w)?;
    let template = DriveConfig::new(envelope).with_drag(a_y);
    let (infidelity, detuning, a_x, gamma2) = if spec.optimize {
        let o = optimize_pulse(model, &template, &spec.optimizer)?;
        (o.infidelity, o.detuning, o.a_x, o.gamma2)
    } else {
        let (inf, g2) = evaluate(model, &template, spec.optimizer.dt)?;
        (inf, template.detuning, template.a_x, g2)
    };
    Ok(CurvePoint { t_p, infidelity, detuning, a_x, gamma2, slope: 0.0 })
}

/// Evaluates every `(A_y, W, t_p)` grid point, in parallel on the current
/// rayon pool. Curves come back ordered by `W` then `A_y`, points by `t_p`.
pub fn sweep(model: &TruncatedModel, spec: &SweepSpec) -> Result<Vec<FidelityCurve>> {
    spec.validate()?;
    let widths = spec.widths();
    let mut tasks = Vec::new();
    for &w in &widths {
        for &a_y in &spec.a_y {
            for &t_p in &spec.t_p {
                tasks.push((a_y, w, t_p));
            }
        }
    }
    let results: Vec<Result<CurvePoint>> = tasks
        .par_iter()
        .map(|&(a_y, w, t_p)| {
            sweep_point(model, spec, a_y, w, t_p).map_err(|e| Error::SweepPoint {
                a_y,
                w: w.unwrap_or(f64::NAN),
                t_p,
                source: Box::new(e),
            })
        })
        .collect();

    let mut results = results.into_iter();
    let mut curves = Vec::with_capacity(widths.len() * spec.a_y.len());
    for &w in &widths {
        for &a_y in &spec.a_y {
            let mut points = Vec::with_capacity(spec.t_p.len());
            for _ in &spec.t_p {
                points.push(results.next().expect("one result per task")?);
            }
            fill_slopes(&mut points);
            curves.push(FidelityCurve {
                a_y,
                w,
                dim: model.dim(),
                family: spec.template.family_name().to_string(),
                optimized: spec.optimize,
                points,
            });
        }
    }
    Ok(curves)
}

/// Runs [`sweep`] on a dedicated pool of `jobs` threads.
pub fn sweep_with_jobs(
    model: &TruncatedModel,
    spec: &SweepSpec,
    jobs: usize,
) -> Result<Vec<FidelityCurve>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| sweep(model, spec))
}

/// Figure of merit over a pulse-width window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FomResult {
    pub a_y: f64,
    pub w: Option<f64>,
    pub window: (f64, f64),
    pub fom: f64,
}

/// `1 - mean(1 - F')` over `[t_p1, t_p2]`, trapezoidal in `t_p` with the
/// curve linearly interpolated at window edges that fall between points.
pub fn figure_of_merit(curve: &FidelityCurve, t_p1: f64, t_p2: f64) -> Result<FomResult> {
    if !(t_p1 < t_p2) {
        return Err(invalid(format!("empty FOM window [{t_p1}, {t_p2}]")));
    }
    let lo = curve.infidelity_at(t_p1)?;
    let hi = curve.infidelity_at(t_p2)?;
    let mut xs = vec![t_p1];
    let mut ys = vec![lo];
    for p in curve.points.iter().filter(|p| p.t_p > t_p1 && p.t_p < t_p2) {
        xs.push(p.t_p);
        ys.push(p.infidelity);
    }
    xs.push(t_p2);
    ys.push(hi);
    let integral: f64 =
        xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (y[0] + y[1]) * (x[1] - x[0])).sum();
    Ok(FomResult {
        a_y: curve.a_y,
        w: curve.w,
        window: (t_p1, t_p2),
        fom: 1.0 - integral / (t_p2 - t_p1),
    })
}
