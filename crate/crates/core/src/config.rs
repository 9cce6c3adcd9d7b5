//! JSON run configuration.
//!
//! ```json
//! {
//!   "n": 2, "N": 32,
//!   "M": [0.3, 0.0, 0.7],
//!   "modes": [{"k": [1, 0], "amplitude": 0.05, "phase": 0.0}],
//!   "safety": 0.25, "t_max": 50.0, "monitor_interval": 10,
//!   "tol_H": 1e-8, "tol_flat": 1e-6, "seed": 0, "dealias": false,
//!   "output": {"diagnostics": "diag.jsonl", "initial_snapshot": "v0.json", "final_snapshot": "v1.json"}
//! }
//! ```
//!
//! `M` is the row-major upper triangle of the mean Hessian (omitted means
//! zero). Each mode contributes `amplitude * cos(k . x + phase)` to `v`.

use crate::error::{Error, Result};
use crate::flow::{FlowState, RunSettings};
use crate::grid::{Grid, SpectralFilter};
use crate::sym::SymMat;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub k: Vec<i64>,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub diagnostics: Option<PathBuf>,
    pub initial_snapshot: Option<PathBuf>,
    pub final_snapshot: Option<PathBuf>,
}

fn default_safety() -> f64 {
    RunSettings::default().safety
}
fn default_t_max() -> f64 {
    RunSettings::default().t_max
}
fn default_interval() -> usize {
    RunSettings::default().monitor_interval
}
fn default_tol_h() -> f64 {
    RunSettings::default().tol_h
}
fn default_tol_flat() -> f64 {
    RunSettings::default().tol_flat
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "M", default)]
    pub m_upper: Vec<f64>,
    #[serde(default)]
    pub modes: Vec<Mode>,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_interval")]
    pub monitor_interval: usize,
    #[serde(rename = "tol_H", default = "default_tol_h")]
    pub tol_h: f64,
    #[serde(default = "default_tol_flat")]
    pub tol_flat: f64,
    /// Carried into reports; the flow itself is deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub dealias: bool,
    #[serde(default)]
    pub output: OutputPaths,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<Grid> {
        let filter = if self.dealias {
            SpectralFilter::TwoThirds
        } else {
            SpectralFilter::None
        };
        Ok(Grid::new(self.n, self.points)?.with_filter(filter))
    }

    pub fn mean_hessian(&self) -> Result<SymMat> {
        if self.m_upper.is_empty() {
            return Ok(SymMat::zeros(self.n));
        }
        if self.m_upper.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("M has non-finite entries".into()));
        }
        SymMat::from_upper(self.n, &self.m_upper)
    }

    pub fn settings(&self) -> RunSettings {
        RunSettings {
            t_max: self.t_max,
            safety: self.safety,
            monitor_interval: self.monitor_interval,
            tol_h: self.tol_h,
            tol_flat: self.tol_flat,
        }
    }

    fn check_modes(&self) -> Result<()> {
        let half = (self.points / 2) as i64;
        for (i, m) in self.modes.iter().enumerate() {
            if m.k.len() != self.n {
                return Err(Error::Config(format!(
                    "mode {i}: wavevector has {} components, expected {}",
                    m.k.len(),
                    self.n
                )));
            }
            if let Some(k) = m.k.iter().find(|k| k.abs() >= half) {
                return Err(Error::Config(format!(
                    "mode {i}: |k| = {} is not resolvable on N = {} (needs |k| < {half})",
                    k.abs(),
                    self.points
                )));
            }
            if !m.amplitude.is_finite() || !m.phase.is_finite() {
                return Err(Error::Config(format!(
                    "mode {i}: non-finite amplitude or phase"
                )));
            }
        }
        Ok(())
    }

    /// Validated initial state.
    pub fn initial_state(&self) -> Result<FlowState> {
        let grid = self.grid()?;
        self.check_modes()?;
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::BadSafety(self.safety));
        }
        if self.monitor_interval == 0 {
            return Err(Error::Config("monitor_interval must be at least 1".into()));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::Config(format!("bad t_max {}", self.t_max)));
        }
        let m = self.mean_hessian()?;
        let v = grid.sample(|x| {
            self.modes
                .iter()
                .map(|md| {
                    let phase: f64 = md.k.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
                    md.amplitude * (phase + md.phase).cos()
                })
                .sum()
        });
        FlowState::new(m, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::from_json(r#"{"n": 2, "N": 16}"#).unwrap();
        assert_eq!(c.settings(), RunSettings::default());
        let s = c.initial_state().unwrap();
        assert_eq!(s.m, SymMat::zeros(2));
        assert_eq!(s.v.sup_norm(), 0.0);
    }

    #[test]
    fn modes_are_summed() {
        let c = RunConfig::from_json(
            r#"{"n": 1, "N": 16, "M": [0.5],
                "modes": [{"k": [1], "amplitude": 0.1}, {"k": [2], "amplitude": 0.2, "phase": 1.0}]}"#,
        )
        .unwrap();
        let s = c.initial_state().unwrap();
        let g = s.grid().clone();
        for (i, v) in s.v.values().iter().enumerate() {
            let x = g.coords(i)[0];
            assert!((v - (0.1 * x.cos() + 0.2 * (2.0 * x + 1.0).cos())).abs() < 1e-15);
        }
        assert_eq!(s.m.get(0, 0), 0.5);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            r#"{"n": 1, "N": 7}"#,
            r#"{"n": 5, "N": 8}"#,
            r#"{"n": 1, "N": 16, "modes": [{"k": [8], "amplitude": 1.0}]}"#,
            r#"{"n": 2, "N": 16, "modes": [{"k": [1], "amplitude": 1.0}]}"#,
            r#"{"n": 2, "N": 16, "M": [1.0, 2.0]}"#,
            r#"{"n": 1, "N": 16, "safety": 0.0}"#,
            r#"{"n": 1, "N": 16, "monitor_interval": 0}"#,
        ] {
            let c = RunConfig::from_json(bad).unwrap();
            assert!(c.initial_state().is_err(), "{bad}");
        }
        assert!(RunConfig::from_json(r#"{"n": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"n": 1, "N": 8, "typo": 1}"#).is_err());
    }
}
