//! Pointwise functions of a Hessian `A = D^2 u`: Lagrangian angle, induced
//! metric, `*Omega`, the restricted S-tensor, and the Jensen-midpoint probe of
//! operator concavity.

use crate::error::{Error, Result};
use crate::sym::{sym_eigen, SymMat};
use num_complex::Complex64;

/// `sum_i arctan(lambda_i)`, the right-hand side of the potential equation.
pub fn angle_of_eigenvalues(lambdas: &[f64]) -> f64 {
    lambdas.iter().map(|l| l.atan()).sum()
}

pub fn lagrangian_angle(a: &SymMat) -> f64 {
    angle_of_eigenvalues(sym_eigen(a).lambdas())
}

/// The angle as the argument of `det(I + iA) / sqrt(det(I + A^2))`, taken one
/// eigenvalue factor at a time so no global branch cut is crossed.
pub fn angle_complex_form(a: &SymMat) -> f64 {
    let e = sym_eigen(a);
    e.lambdas()
        .iter()
        .map(|&l| {
            let z = Complex64::new(1.0, l);
            // each factor has modulus sqrt(1 + l^2); unit-normalize first
            (z / z.norm()).arg()
        })
        .sum()
}

/// `g = I + A^2` and its inverse.
pub fn induced_metric(a: &SymMat) -> (SymMat, SymMat) {
    let e = sym_eigen(a);
    let g = SymMat::identity(a.dim()).add(&a.square());
    (g, e.map(|l| 1.0 / (1.0 + l * l)))
}

/// `sum_i ln(1 + lambda_i^2) = ln det(I + A^2)`.
pub fn log_det_metric(lambdas: &[f64]) -> f64 {
    lambdas.iter().map(|l| l.mul_add(*l, 1.0).ln()).sum()
}

/// `*Omega = 1 / sqrt(prod(1 + lambda_i^2))`.
pub fn star_omega(a: &SymMat) -> f64 {
    (-0.5 * log_det_metric(sym_eigen(a).lambdas())).exp()
}

#[inline]
pub fn s_value(l: f64) -> f64 {
    l / (1.0 + l * l)
}

/// Eigenvalues of `S|_{T Sigma}` relative to the induced metric,
/// `lambda_i / (1 + lambda_i^2)`, ascending.
pub fn s_eigenvalues(a: &SymMat) -> Vec<f64> {
    let mut s: Vec<f64> = sym_eigen(a).lambdas().iter().map(|&l| s_value(l)).collect();
    s.sort_by(f64::total_cmp);
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcavityProbe {
    pub holds: bool,
    /// `alpha(mid) - mean(alpha)`; non-negative under concavity.
    pub gap: f64,
}

pub const CONCAVITY_SLACK: f64 = 1e-12;

fn require_spd(a: &SymMat) -> Result<()> {
    let m = sym_eigen(a).min();
    if m > 0.0 {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite(m))
    }
}

/// Jensen gap of the angle at the midpoint of two positive definite matrices.
pub fn concavity_probe(a: &SymMat, b: &SymMat) -> Result<ConcavityProbe> {
    concavity_probe_along(a, b, &[0.5])
}

/// Worst Jensen gap over the points `(1-t) A + t B` for the given `t`s.
pub fn concavity_probe_along(a: &SymMat, b: &SymMat, ts: &[f64]) -> Result<ConcavityProbe> {
    if a.dim() != b.dim() {
        return Err(Error::SizeMismatch(a.dim(), b.dim()));
    }
    require_spd(a)?;
    require_spd(b)?;
    let (fa, fb) = (lagrangian_angle(a), lagrangian_angle(b));
    let gap = ts
        .iter()
        .map(|&t| {
            let mid = a.scale(1.0 - t).add(&b.scale(t));
            lagrangian_angle(&mid) - ((1.0 - t) * fa + t * fb)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(ConcavityProbe {
        holds: gap >= -CONCAVITY_SLACK,
        gap,
    })
}
