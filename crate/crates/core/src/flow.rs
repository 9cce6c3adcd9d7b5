//! Explicit time integration of the potential equation `du/dt = alpha(D^2 u)`.
//!
//! The potential is split as `u = x^T M x / 2 + v` with `v` periodic. Because
//! the right-hand side only depends on `D^2 u = M + D^2 v`, which is periodic,
//! `M` never changes and only `v` is evolved. The spatial mean of each
//! increment is stripped from `v` and accumulated in `drift`.

use crate::angle::angle_of_eigenvalues;
use crate::error::{Error, Result};
use crate::grid::{Grid, PeriodicField, Spectrum};
use crate::monitors::{snapshot_diagnostics, DiagnosticsRecord};
use crate::sym::{sym_eigen, EigenDecomp, SymMat};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Minimum number of grid points handed to one rayon task.
const PAR_CHUNK: usize = 256;

/// Relative size of the Nyquist shell, compared with the largest Fourier
/// coefficient, above which a field counts as carrying a grid-scale
/// oscillation.
pub const GRID_SCALE_REL: f64 = 1e-3;
/// Absolute floor for the same test, so that roundoff-level fields are
/// never flagged.
pub const GRID_SCALE_ABS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    /// Constant mean Hessian.
    pub m: SymMat,
    /// Periodic part of the potential.
    pub v: PeriodicField,
    pub t: f64,
    /// Accumulated spatial mean of the angle, removed from `v`.
    pub drift: f64,
}

impl FlowState {
    pub fn new(m: SymMat, v: PeriodicField) -> Result<Self> {
        if m.dim() != v.grid().dim() {
            return Err(Error::SizeMismatch(m.dim(), v.grid().dim()));
        }
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            m,
            v,
            t: 0.0,
            drift: 0.0,
        })
    }

    /// Flat state `v = 0`.
    pub fn flat(m: SymMat, grid: &Grid) -> Result<Self> {
        Self::new(m, grid.zeros())
    }

    pub fn grid(&self) -> &Grid {
        self.v.grid()
    }
}

/// Second-derivative multi-indices `e_i + e_j`, `i <= j`, in upper-triangle
/// order.
fn second_orders(n: usize) -> Vec<(usize, usize, Vec<usize>)> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let mut o = vec![0; n];
            o[i] += 1;
            o[j] += 1;
            out.push((i, j, o));
        }
    }
    out
}

/// `D^2 u(x) = M + D^2 v(x)` at every grid point.
#[derive(Debug, Clone)]
pub struct HessianField {
    grid: Grid,
    points: Vec<SymMat>,
}

impl HessianField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn points(&self) -> &[SymMat] {
        &self.points
    }

    /// Eigen-decomposition at every point, in sample order.
    pub fn eigen(&self) -> Vec<EigenDecomp> {
        self.points
            .par_iter()
            .with_min_len(PAR_CHUNK)
            .map(sym_eigen)
            .collect()
    }

    /// One entry `(i, j)` as a field.
    pub fn entry(&self, i: usize, j: usize) -> PeriodicField {
        let values = self.points.iter().map(|a| a.get(i, j)).collect();
        self.grid.field(values).expect("length matches grid")
    }
}

fn hessian_from_spectrum(m: &SymMat, grid: &Grid, spec: &Spectrum) -> Result<HessianField> {
    let n = grid.dim();
    let mut points = vec![*m; grid.len()];
    for (i, j, order) in second_orders(n) {
        let d = grid.synthesize(spec, &order)?;
        for (p, &dv) in points.iter_mut().zip(d.values()) {
            p.set(i, j, m.get(i, j) + dv);
        }
    }
    Ok(HessianField {
        grid: grid.clone(),
        points,
    })
}

pub fn hessian_field(state: &FlowState) -> Result<HessianField> {
    let spec = state.grid().spectrum(&state.v)?;
    hessian_from_spectrum(&state.m, state.grid(), &spec)
}

/// Largest coefficient magnitude on the Nyquist shell and overall.
fn nyquist_content(grid: &Grid, spec: &Spectrum) -> (f64, f64) {
    let half = grid.points() / 2;
    let n = grid.dim();
    let mut shell = 0.0_f64;
    let mut total = 0.0_f64;
    for (idx, c) in spec.coeffs.iter().enumerate() {
        let a = c.norm();
        total = total.max(a);
        if grid.index(idx)[..n].contains(&half) {
            shell = shell.max(a);
        }
    }
    (shell, total)
}

fn angle_field(h: &HessianField) -> PeriodicField {
    let values: Vec<f64> = h
        .points
        .par_iter()
        .with_min_len(PAR_CHUNK)
        .map(|a| angle_of_eigenvalues(sym_eigen(a).lambdas()))
        .collect();
    h.grid.field(values).expect("length matches grid")
}

/// `alpha(M + D^2 v)` at every point.
pub fn rhs(state: &FlowState) -> Result<PeriodicField> {
    Ok(angle_field(&hessian_field(state)?))
}

/// Stage evaluation with blow-up detection.
fn stage(m: &SymMat, v: &PeriodicField, t: f64) -> Result<PeriodicField> {
    let blow_up = |reason: &str| Error::BlowUp {
        t,
        reason: reason.to_string(),
    };
    if !v.is_finite() {
        return Err(blow_up("non-finite potential"));
    }
    let grid = v.grid();
    let spec = grid.spectrum(v)?;
    let (shell, total) = nyquist_content(grid, &spec);
    if shell > GRID_SCALE_ABS && shell > GRID_SCALE_REL * total {
        return Err(blow_up(&format!(
            "grid-scale oscillation (Nyquist amplitude {shell:e}, peak {total:e})"
        )));
    }
    let k = angle_field(&hessian_from_spectrum(m, grid, &spec)?);
    if !k.is_finite() {
        return Err(blow_up("non-finite angle"));
    }
    Ok(k)
}

/// Classical RK4 increment of `v` over `dt`, mean not removed.
fn rk4_increment(state: &FlowState, dt: f64) -> Result<PeriodicField> {
    let (m, v, t) = (&state.m, &state.v, state.t);
    let k1 = stage(m, v, t)?;
    let k2 = stage(m, &v.axpby(1.0, &k1, 0.5 * dt)?, t + 0.5 * dt)?;
    let k3 = stage(m, &v.axpby(1.0, &k2, 0.5 * dt)?, t + 0.5 * dt)?;
    let k4 = stage(m, &v.axpby(1.0, &k3, dt)?, t + dt)?;
    let mut inc = k1.axpby(1.0, &k4, 1.0)?;
    let mid = k2.axpby(2.0, &k3, 2.0)?;
    for (a, b) in inc.values_mut().iter_mut().zip(mid.values()) {
        *a = (*a + b) * (dt / 6.0);
    }
    Ok(inc)
}

/// `safety * h^2 / (2n)`; the linearized diffusion coefficients `g^{jk}` have
/// eigenvalues at most one.
pub fn cfl_dt(state: &FlowState, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::BadSafety(safety));
    }
    let g = state.grid();
    Ok(safety * g.spacing() * g.spacing() / (2.0 * g.dim() as f64))
}

/// One RK4 step. Stability needs `dt <= cfl_dt(state, 1)`; larger steps are
/// accepted and eventually end in [`Error::BlowUp`].
pub fn step_rk4(state: &FlowState, dt: f64) -> Result<FlowState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::BadStep(dt));
    }
    let mut inc = rk4_increment(state, dt)?;
    let mean = inc.mean();
    for x in inc.values_mut() {
        *x -= mean;
    }
    let v = state.v.axpby(1.0, &inc, 1.0)?;
    if !v.is_finite() {
        return Err(Error::BlowUp {
            t: state.t + dt,
            reason: "non-finite potential".into(),
        });
    }
    Ok(FlowState {
        m: state.m,
        v,
        t: state.t + dt,
        drift: state.drift + mean,
    })
}

/// Time-stepping controls for [`run`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub t_max: f64,
    pub safety: f64,
    /// Steps between diagnostics records.
    pub monitor_interval: usize,
    pub tol_h: f64,
    pub tol_flat: f64,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            t_max: 50.0,
            safety: 0.25,
            monitor_interval: 10,
            tol_h: 1e-8,
            tol_flat: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    TMax,
    BlowUp,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::Converged => "converged",
            StopReason::TMax => "t_max",
            StopReason::BlowUp => "blow_up",
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: FlowState,
    pub stop: StopReason,
    pub steps: usize,
    /// Message attached to a blow-up.
    pub detail: Option<String>,
}

/// Steps until `t_max`, convergence, or blow-up. Diagnostics are taken at
/// step 0, every `monitor_interval` steps, and at the final state; the
/// convergence test runs at each of those records.
///
/// The step is the CFL step shrunk slightly so that `t_max` is hit exactly.
pub fn run(initial: FlowState, settings: &RunSettings) -> Result<RunOutcome> {
    run_with(initial, settings, |_| {})
}

/// [`run`], calling `sink` on each record as it is produced.
pub fn run_with(
    initial: FlowState,
    settings: &RunSettings,
    mut sink: impl FnMut(&DiagnosticsRecord),
) -> Result<RunOutcome> {
    if settings.monitor_interval == 0 {
        return Err(Error::Config("monitor_interval must be at least 1".into()));
    }
    if !(settings.t_max >= 0.0 && settings.t_max.is_finite()) {
        return Err(Error::Config(format!("bad t_max {}", settings.t_max)));
    }
    let cfl = cfl_dt(&initial, settings.safety)?;
    let total_steps = (settings.t_max / cfl).ceil() as usize;
    let dt = if total_steps == 0 {
        0.0
    } else {
        settings.t_max / total_steps as f64
    };
    let t0 = initial.t;

    let mut records = Vec::new();
    let mut emit = |rec: DiagnosticsRecord, records: &mut Vec<DiagnosticsRecord>| {
        sink(&rec);
        records.push(rec);
    };
    let converged =
        |r: &DiagnosticsRecord| r.h_sup < settings.tol_h && r.flat_res < settings.tol_flat;

    let mut state = initial;
    let mut step = 0;
    loop {
        let on_schedule = step % settings.monitor_interval == 0;
        let at_end = step == total_steps;
        if on_schedule || at_end {
            let rec = snapshot_diagnostics(&state)?;
            let done = converged(&rec);
            emit(rec, &mut records);
            if done {
                return Ok(RunOutcome {
                    records,
                    final_state: state,
                    stop: StopReason::Converged,
                    steps: step,
                    detail: None,
                });
            }
        }
        if at_end {
            return Ok(RunOutcome {
                records,
                final_state: state,
                stop: StopReason::TMax,
                steps: step,
                detail: None,
            });
        }
        match step_rk4(&state, dt) {
            Ok(mut next) => {
                next.t = t0 + (step + 1) as f64 * dt;
                state = next;
                step += 1;
            }
            Err(Error::BlowUp { reason, .. }) => {
                if !on_schedule {
                    emit(snapshot_diagnostics(&state)?, &mut records);
                }
                return Ok(RunOutcome {
                    records,
                    final_state: state,
                    stop: StopReason::BlowUp,
                    steps: step,
                    detail: Some(reason),
                });
            }
            Err(e) => return Err(e),
        }
    }
}

/// Compares two one-step updates of the gradient `du`:
///
/// * forward Euler on `du_i/dt = g^{jk} u_{ijk}` (third derivatives spectral,
///   `g^{jk}` pointwise), and
/// * the spatial gradient of the RK4 update of `u` itself.
///
/// Since `d(du)/dt = d alpha` identically, the two routes share every
/// first-order term and the sup-norm gap is the Euler truncation error,
/// `O(dt^2)`.
pub fn gradient_flow_consistency(state: &FlowState, dt: f64) -> Result<f64> {
    let grid = state.grid();
    let n = grid.dim();
    let spec = grid.spectrum(&state.v)?;
    let hess = hessian_from_spectrum(&state.m, grid, &spec)?;
    let g_inv: Vec<SymMat> = hess
        .eigen()
        .iter()
        .map(|e| e.map(|l| 1.0 / (1.0 + l * l)))
        .collect();

    let dv = rk4_increment(state, dt)?;
    let dv_spec = grid.spectrum(&dv)?;

    let mut worst = 0.0_f64;
    for i in 0..n {
        let mut euler = vec![0.0; grid.len()];
        for j in 0..n {
            for k in 0..n {
                let mut order = vec![0; n];
                order[i] += 1;
                order[j] += 1;
                order[k] += 1;
                let third = grid.synthesize(&spec, &order)?;
                for ((e, gi), u) in euler.iter_mut().zip(&g_inv).zip(third.values()) {
                    *e += dt * gi.get(j, k) * u;
                }
            }
        }
        let mut first = vec![0; n];
        first[i] = 1;
        let grad_step = grid.synthesize(&dv_spec, &first)?;
        for (e, b) in euler.iter().zip(grad_step.values()) {
            worst = worst.max((e - b).abs());
        }
    }
    Ok(worst)
}
