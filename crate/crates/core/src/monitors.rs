//! Maximum-principle quantities of a flow snapshot and monotonicity checks
//! over a recorded series.
//!
//! All quantities are grid extrema, which do not depend on how the graph is
//! parametrized, so they can be compared directly with the parametric flow.

use crate::angle::{angle_of_eigenvalues, log_det_metric, s_value};
use crate::error::{Error, Result};
use crate::flow::{hessian_field, FlowState};
use serde::{Deserialize, Serialize};

/// One row of monitored scalars. Serialized field names are part of the
/// JSONL contract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `min_x min_i lambda_i / (1 + lambda_i^2)`.
    pub s_min: f64,
    /// `max_x ln det(I + (D^2 u)^2)`.
    pub logdet_sup: f64,
    pub omega_min: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// `max_x sqrt(g^{ij} alpha_i alpha_j)`.
    #[serde(rename = "H_sup")]
    pub h_sup: f64,
    /// `max_x |D^2 u - M|`.
    pub flat_res: f64,
    pub drift: f64,
}

impl DiagnosticsRecord {
    /// Looks up a column by its serialized name. Besides the stored columns
    /// this knows the derived `alpha_osc` (`alpha_max - alpha_min`) and
    /// `lambda_abs_max` (`max(|lambda_min|, |lambda_max|)`).
    pub fn field(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "t" => self.t,
            "lambda_min" => self.lambda_min,
            "lambda_max" => self.lambda_max,
            "s_min" => self.s_min,
            "logdet_sup" => self.logdet_sup,
            "omega_min" => self.omega_min,
            "alpha_min" => self.alpha_min,
            "alpha_max" => self.alpha_max,
            "H_sup" => self.h_sup,
            "flat_res" => self.flat_res,
            "drift" => self.drift,
            "alpha_osc" => self.alpha_max - self.alpha_min,
            "lambda_abs_max" => self.lambda_min.abs().max(self.lambda_max.abs()),
            other => return Err(Error::UnknownField(other.to_string())),
        })
    }
}

pub fn snapshot_diagnostics(state: &FlowState) -> Result<DiagnosticsRecord> {
    let grid = state.grid();
    let n = grid.dim();
    let hess = hessian_field(state)?;
    let eig = hess.eigen();

    let mut rec = DiagnosticsRecord {
        t: state.t,
        lambda_min: f64::INFINITY,
        lambda_max: f64::NEG_INFINITY,
        s_min: f64::INFINITY,
        logdet_sup: f64::NEG_INFINITY,
        omega_min: f64::INFINITY,
        alpha_min: f64::INFINITY,
        alpha_max: f64::NEG_INFINITY,
        h_sup: 0.0,
        flat_res: 0.0,
        drift: state.drift,
    };

    let mut alpha = Vec::with_capacity(grid.len());
    for (e, a) in eig.iter().zip(hess.points()) {
        let ls = e.lambdas();
        rec.lambda_min = rec.lambda_min.min(e.min());
        rec.lambda_max = rec.lambda_max.max(e.max());
        for &l in ls {
            rec.s_min = rec.s_min.min(s_value(l));
        }
        rec.logdet_sup = rec.logdet_sup.max(log_det_metric(ls));
        let al = angle_of_eigenvalues(ls);
        rec.alpha_min = rec.alpha_min.min(al);
        rec.alpha_max = rec.alpha_max.max(al);
        alpha.push(al);
        rec.flat_res = rec.flat_res.max(a.sub(&state.m).max_abs());
    }
    rec.omega_min = (-0.5 * rec.logdet_sup).exp();

    let alpha = grid.field(alpha)?;
    let spec = grid.spectrum(&alpha)?;
    let grads = (0..n)
        .map(|i| {
            let mut o = vec![0; n];
            o[i] = 1;
            grid.synthesize(&spec, &o)
        })
        .collect::<Result<Vec<_>>>()?;
    for (p, e) in eig.iter().enumerate() {
        let g_inv = e.map(|l| 1.0 / (1.0 + l * l));
        let mut h2 = 0.0;
        for i in 0..n {
            for j in 0..n {
                h2 += g_inv.get(i, j) * grads[i].values()[p] * grads[j].values()[p];
            }
        }
        rec.h_sup = rec.h_sup.max(h2.max(0.0).sqrt());
    }
    Ok(rec)
}

/// `(flat_res, H_sup)` of a state.
pub fn flatness_residual(state: &FlowState) -> Result<(f64, f64)> {
    let r = snapshot_diagnostics(state)?;
    Ok((r.flat_res, r.h_sup))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Nonincreasing,
    Nondecreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub field: String,
    pub direction: Direction,
    pub tol: f64,
    /// Largest step against the claimed direction (zero if none).
    pub worst_violation: f64,
    /// Record indices `(i, i+1)` of the worst step against the direction.
    pub worst_pair: Option<(usize, usize)>,
    pub pass: bool,
}

/// Worst consecutive-pair violation of the claimed monotonicity.
pub fn check_monotone(
    series: &[DiagnosticsRecord],
    field: &str,
    direction: Direction,
    tol: f64,
) -> Result<MonotoneReport> {
    // validate the name even when the series is empty
    DiagnosticsRecord::default_probe().field(field)?;
    let values = series
        .iter()
        .map(|r| r.field(field))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0_f64;
    let mut worst_pair = None;
    for (i, w) in values.windows(2).enumerate() {
        let step = match direction {
            Direction::Nonincreasing => w[1] - w[0],
            Direction::Nondecreasing => w[0] - w[1],
        };
        if step > worst {
            worst = step;
            worst_pair = Some((i, i + 1));
        }
    }
    Ok(MonotoneReport {
        field: field.to_string(),
        direction,
        tol,
        worst_violation: worst,
        worst_pair,
        pass: worst <= tol,
    })
}

/// Per-step tolerance `1e-6 * (1 + |initial value|)` used by the invariant
/// suite.
pub fn scaled_tolerance(series: &[DiagnosticsRecord], field: &str) -> Result<f64> {
    let first = match series.first() {
        Some(r) => r.field(field)?.abs(),
        None => 0.0,
    };
    Ok(1e-6 * (1.0 + first))
}

impl DiagnosticsRecord {
    fn default_probe() -> Self {
        DiagnosticsRecord {
            t: 0.0,
            lambda_min: 0.0,
            lambda_max: 0.0,
            s_min: 0.0,
            logdet_sup: 0.0,
            omega_min: 1.0,
            alpha_min: 0.0,
            alpha_max: 0.0,
            h_sup: 0.0,
            flat_res: 0.0,
            drift: 0.0,
        }
    }
}
