//! Mean curvature flow of Lagrangian graphs over the flat torus `T^n`, run
//! through the scalar potential equation
//!
//! ```text
//! du/dt = sum_i arctan(lambda_i(D^2 u)),
//! ```
//!
//! together with the quantities the maximum principle controls along it and
//! the Lagrangian Grassmannian geometry behind those controls.
//!
//! * [`grid`]: periodic grids and spectral derivatives.
//! * [`angle`]: pointwise algebra of the Hessian (angle, metric, `*Omega`, S).
//! * [`flow`]: RK4 time stepping of the potential.
//! * [`monitors`]: per-snapshot diagnostics and monotonicity checks.
//! * [`grassmannian`]: invariant metric, geodesics, spectral Hessians.
//! * [`unitary`]: rotated S-tensors and the eigenvalue conditions they give.

#![allow(clippy::needless_range_loop)]

pub mod angle;
pub mod config;
pub mod error;
pub mod flow;
pub mod grassmannian;
pub mod grid;
pub mod monitors;
pub mod sym;
pub mod unitary;

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 4;

pub use error::{Error, Result};
pub use flow::{FlowState, RunOutcome, RunSettings, StopReason};
pub use grid::{Grid, PeriodicField};
pub use monitors::DiagnosticsRecord;
pub use sym::{sym_eigen, EigenDecomp, Mat, SymMat};
