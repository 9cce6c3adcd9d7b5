//! Geometry of the Lagrangian Grassmannian in the chart of symmetric matrices
//! `Z` over a base plane: the invariant metric `Tr[((I + Z^2)^{-1} dZ)^2]`,
//! its geodesic equation `Z'' = 2 Z' Z (I + Z^2)^{-1} Z'`, and second
//! derivatives of spectral functions along geodesics.

use crate::error::{Error, Result};
use crate::sym::{sym_eigen, SymMat};
use crate::MAX_DIM;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Below this eigenvalue gap the divided difference of first derivatives is
/// replaced by its limit.
pub const DEGENERATE_GAP: f64 = 1e-8;

/// A symmetric function of the eigenvalues with its first two derivatives.
pub trait SpectralFn: Sync {
    fn value(&self, lambda: &[f64]) -> f64;
    fn grad(&self, lambda: &[f64]) -> Vec<f64>;
    fn hess(&self, lambda: &[f64]) -> Vec<Vec<f64>>;

    /// `phi` of the eigenvalues of `z`.
    fn of_matrix(&self, z: &SymMat) -> f64 {
        self.value(sym_eigen(z).lambdas())
    }
}

/// `phi_0 = -1/2 ln prod(1 + lambda_i^2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Phi0;

impl SpectralFn for Phi0 {
    fn value(&self, lambda: &[f64]) -> f64 {
        -0.5 * lambda.iter().map(|l| (1.0 + l * l).ln()).sum::<f64>()
    }

    fn grad(&self, lambda: &[f64]) -> Vec<f64> {
        lambda.iter().map(|l| -l / (1.0 + l * l)).collect()
    }

    fn hess(&self, lambda: &[f64]) -> Vec<Vec<f64>> {
        let n = lambda.len();
        let mut h = vec![vec![0.0; n]; n];
        for (k, &l) in lambda.iter().enumerate() {
            let q = 1.0 + l * l;
            h[k][k] = (l * l - 1.0) / (q * q);
        }
        h
    }
}

/// Polynomial in the power sums `p_e = sum_k lambda_k^e`:
/// `sum_terms coeff * prod_{e in exps} p_e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSumPoly {
    pub terms: Vec<(f64, Vec<u32>)>,
}

fn power_sum(lambda: &[f64], e: u32) -> f64 {
    lambda.iter().map(|l| l.powi(e as i32)).sum()
}

/// `d p_e / d lambda_k`.
fn d_power_sum(l: f64, e: u32) -> f64 {
    if e == 0 {
        0.0
    } else {
        e as f64 * l.powi(e as i32 - 1)
    }
}

fn d2_power_sum(l: f64, e: u32) -> f64 {
    if e < 2 {
        0.0
    } else {
        (e * (e - 1)) as f64 * l.powi(e as i32 - 2)
    }
}

impl PowerSumPoly {
    /// Random polynomial with up to four terms, each a product of one or two
    /// power sums of degree 1..=4, with standard normal coefficients.
    pub fn random(rng: &mut impl Rng) -> Self {
        let count = rng.random_range(1..=4);
        let terms = (0..count)
            .map(|_| {
                let factors = rng.random_range(1..=2);
                let exps = (0..factors).map(|_| rng.random_range(1..=4)).collect();
                (rng.sample(StandardNormal), exps)
            })
            .collect();
        Self { terms }
    }
}

impl SpectralFn for PowerSumPoly {
    fn value(&self, lambda: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, exps)| c * exps.iter().map(|&e| power_sum(lambda, e)).product::<f64>())
            .sum()
    }

    fn grad(&self, lambda: &[f64]) -> Vec<f64> {
        let n = lambda.len();
        let mut g = vec![0.0; n];
        for (c, exps) in &self.terms {
            let sums: Vec<f64> = exps.iter().map(|&e| power_sum(lambda, e)).collect();
            for (a, &ea) in exps.iter().enumerate() {
                let rest: f64 = sums
                    .iter()
                    .enumerate()
                    .filter(|&(b, _)| b != a)
                    .map(|(_, s)| s)
                    .product();
                for k in 0..n {
                    g[k] += c * d_power_sum(lambda[k], ea) * rest;
                }
            }
        }
        g
    }

    fn hess(&self, lambda: &[f64]) -> Vec<Vec<f64>> {
        let n = lambda.len();
        let mut h = vec![vec![0.0; n]; n];
        for (c, exps) in &self.terms {
            let sums: Vec<f64> = exps.iter().map(|&e| power_sum(lambda, e)).collect();
            let rest = |skip: &[usize]| -> f64 {
                sums.iter()
                    .enumerate()
                    .filter(|(b, _)| !skip.contains(b))
                    .map(|(_, s)| s)
                    .product()
            };
            for (a, &ea) in exps.iter().enumerate() {
                let r = rest(&[a]);
                for k in 0..n {
                    h[k][k] += c * d2_power_sum(lambda[k], ea) * r;
                }
                for (b, &eb) in exps.iter().enumerate() {
                    if b == a {
                        continue;
                    }
                    let r = rest(&[a, b]);
                    for k in 0..n {
                        for l in 0..n {
                            h[k][l] +=
                                c * d_power_sum(lambda[k], ea) * d_power_sum(lambda[l], eb) * r;
                        }
                    }
                }
            }
        }
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicState {
    pub z: SymMat,
    pub zdot: SymMat,
    pub s: f64,
}

fn resolvent(z: &SymMat) -> SymMat {
    sym_eigen(z).map(|l| 1.0 / (1.0 + l * l))
}

/// `Tr[((I + Z^2)^{-1} Z')^2]`.
pub fn metric_speed(z: &SymMat, zdot: &SymMat) -> f64 {
    let w = resolvent(z).as_mat().mul(&zdot.as_mat());
    w.mul(&w).trace()
}

/// `2 Z' Z (I + Z^2)^{-1} Z'`, symmetrized.
pub fn geodesic_rhs(z: &SymMat, zdot: &SymMat) -> SymMat {
    let zr = z.as_mat().mul(&resolvent(z).as_mat());
    zdot.as_mat()
        .mul(&zr)
        .mul(&zdot.as_mat())
        .scale(2.0)
        .symmetric_part()
}

/// `Z'` rescaled to unit metric speed at `Z`.
pub fn normalize_speed(z: &SymMat, zdot: &SymMat) -> SymMat {
    let sp = metric_speed(z, zdot);
    if sp > 0.0 {
        zdot.scale(1.0 / sp.sqrt())
    } else {
        *zdot
    }
}

fn rk4_geodesic(st: &GeodesicState, h: f64) -> GeodesicState {
    let f = |z: &SymMat, zd: &SymMat| (*zd, geodesic_rhs(z, zd));
    let (k1z, k1v) = f(&st.z, &st.zdot);
    let (k2z, k2v) = f(
        &st.z.add(&k1z.scale(0.5 * h)),
        &st.zdot.add(&k1v.scale(0.5 * h)),
    );
    let (k3z, k3v) = f(
        &st.z.add(&k2z.scale(0.5 * h)),
        &st.zdot.add(&k2v.scale(0.5 * h)),
    );
    let (k4z, k4v) = f(&st.z.add(&k3z.scale(h)), &st.zdot.add(&k3v.scale(h)));
    let comb = |a: SymMat, b: SymMat, c: SymMat, d: SymMat| {
        a.add(&b.scale(2.0))
            .add(&c.scale(2.0))
            .add(&d)
            .scale(h / 6.0)
    };
    GeodesicState {
        z: st.z.add(&comb(k1z, k2z, k3z, k4z)),
        zdot: st.zdot.add(&comb(k1v, k2v, k3v, k4v)),
        s: st.s + h,
    }
}

/// Entry size beyond which a geodesic is treated as having left the chart.
/// Fixed-step RK4 can jump over the pole where the chart coordinate diverges
/// without ever producing an infinity, so a finite bound is needed.
pub const CHART_LIMIT: f64 = 1e8;

/// Fixed-step RK4 from `s = 0` to `s_end`; the step is shrunk so that the
/// last state lands exactly on `s_end`. The returned trajectory includes the
/// initial state.
pub fn integrate_geodesic(
    z0: &SymMat,
    zdot0: &SymMat,
    s_end: f64,
    step: f64,
) -> Result<Vec<GeodesicState>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::BadStep(step));
    }
    if !(s_end >= 0.0 && s_end.is_finite()) {
        return Err(Error::BadStep(s_end));
    }
    if z0.dim() != zdot0.dim() {
        return Err(Error::SizeMismatch(z0.dim(), zdot0.dim()));
    }
    let steps = (s_end / step).ceil() as usize;
    let h = if steps == 0 {
        0.0
    } else {
        s_end / steps as f64
    };
    let mut traj = Vec::with_capacity(steps + 1);
    let mut st = GeodesicState {
        z: *z0,
        zdot: *zdot0,
        s: 0.0,
    };
    traj.push(st);
    for i in 0..steps {
        st = rk4_geodesic(&st, h);
        st.s = (i + 1) as f64 * h;
        if !(st.z.max_abs() <= CHART_LIMIT && st.zdot.max_abs() <= CHART_LIMIT) {
            return Err(Error::BlowUp {
                t: st.s,
                reason: "geodesic left the chart".into(),
            });
        }
        traj.push(st);
    }
    Ok(traj)
}

/// Endpoint of [`integrate_geodesic`].
pub fn geodesic_point(z0: &SymMat, zdot0: &SymMat, s: f64, step: f64) -> Result<SymMat> {
    // the equation is invariant under s -> -s, so negative s runs backwards
    let v0 = if s >= 0.0 { *zdot0 } else { zdot0.scale(-1.0) };
    let traj = integrate_geodesic(z0, &v0, s.abs(), step)?;
    Ok(traj.last().expect("trajectory holds the initial state").z)
}

fn check_lambda(lambda: &[f64], zdot: &SymMat) -> Result<()> {
    if lambda.is_empty() || lambda.len() > MAX_DIM {
        return Err(Error::DimensionOutOfRange(lambda.len()));
    }
    if lambda.len() != zdot.dim() {
        return Err(Error::SizeMismatch(lambda.len(), zdot.dim()));
    }
    Ok(())
}

/// `(phi_k - phi_l) / (lambda_k - lambda_l)`, or its limit
/// `phi_kk - phi_kl` when the gap is below [`DEGENERATE_GAP`].
fn divided_difference(lambda: &[f64], grad: &[f64], hess: &[Vec<f64>], k: usize, l: usize) -> f64 {
    let gap = lambda[k] - lambda[l];
    if gap.abs() < DEGENERATE_GAP {
        hess[k][k] - hess[k][l]
    } else {
        (grad[k] - grad[l]) / gap
    }
}

/// Flat-chart second derivative of `phi` at `diag(lambda)` in direction `Z'`:
/// `sum phi_kl z'_kk z'_ll + sum_{k != l} (phi_k - phi_l)/(lambda_k - lambda_l) z'_kl^2`.
pub fn chart_hessian_quadratic(phi: &dyn SpectralFn, lambda: &[f64], zdot: &SymMat) -> Result<f64> {
    check_lambda(lambda, zdot)?;
    let n = lambda.len();
    let g = phi.grad(lambda);
    let h = phi.hess(lambda);
    let mut acc = 0.0;
    for k in 0..n {
        for l in 0..n {
            acc += h[k][l] * zdot.get(k, k) * zdot.get(l, l);
            if k != l {
                acc += divided_difference(lambda, &g, &h, k, l) * zdot.get(k, l).powi(2);
            }
        }
    }
    Ok(acc)
}

/// Second derivative of `phi` along the geodesic through `diag(lambda)` with
/// velocity `Z'`: the chart Hessian plus the geodesic correction
/// `sum_{k,l} phi_l * 2 lambda_k / (1 + lambda_k^2) * z'_kl^2`.
pub fn spectral_hessian_quadratic(
    phi: &dyn SpectralFn,
    lambda: &[f64],
    zdot: &SymMat,
) -> Result<f64> {
    let chart = chart_hessian_quadratic(phi, lambda, zdot)?;
    let g = phi.grad(lambda);
    let n = lambda.len();
    let mut corr = 0.0;
    for k in 0..n {
        let w = 2.0 * lambda[k] / (1.0 + lambda[k] * lambda[k]);
        for l in 0..n {
            corr += g[l] * w * zdot.get(k, l).powi(2);
        }
    }
    Ok(chart + corr)
}

/// Closed form of the geodesic second derivative of `phi_0`:
/// `-sum_k z'_kk^2 / (1 + lambda_k^2)
///  - sum_{k != l} (lambda_k lambda_l + 1) / ((1 + lambda_k^2)(1 + lambda_l^2)) z'_kl^2`.
pub fn phi0_second_derivative(lambda: &[f64], zdot: &SymMat) -> Result<f64> {
    check_lambda(lambda, zdot)?;
    let n = lambda.len();
    let mut acc = 0.0;
    for k in 0..n {
        let qk = 1.0 + lambda[k] * lambda[k];
        acc -= zdot.get(k, k).powi(2) / qk;
        for l in 0..n {
            if l != k {
                let ql = 1.0 + lambda[l] * lambda[l];
                acc -= (lambda[k] * lambda[l] + 1.0) / (qk * ql) * zdot.get(k, l).powi(2);
            }
        }
    }
    Ok(acc)
}

/// Five-point second difference of `phi(Z(s))` at `s = 0` along the geodesic
/// from `diag(lambda)` with velocity `Z'`, spacing `h`, RK4 step `step`.
pub fn geodesic_second_difference(
    phi: &dyn SpectralFn,
    lambda: &[f64],
    zdot: &SymMat,
    h: f64,
    step: f64,
) -> Result<f64> {
    check_lambda(lambda, zdot)?;
    let z0 = SymMat::from_diag(lambda);
    let p = |s: f64| -> Result<f64> { Ok(phi.of_matrix(&geodesic_point(&z0, zdot, s, step)?)) };
    let (pm2, pm1, p0, p1, p2) = (p(-2.0 * h)?, p(-h)?, p(0.0)?, p(h)?, p(2.0 * h)?);
    Ok((-pm2 + 16.0 * pm1 - 30.0 * p0 + 16.0 * p1 - p2) / (12.0 * h * h))
}

/// Five-point second difference of `phi(diag(lambda) + e Z')` in the flat
/// chart, spacing `h`.
pub fn chart_second_difference(
    phi: &dyn SpectralFn,
    lambda: &[f64],
    zdot: &SymMat,
    h: f64,
) -> Result<f64> {
    check_lambda(lambda, zdot)?;
    let z0 = SymMat::from_diag(lambda);
    let p = |e: f64| phi.of_matrix(&z0.add(&zdot.scale(e)));
    Ok((-p(-2.0 * h) + 16.0 * p(-h) - 30.0 * p(0.0) + 16.0 * p(h) - p(2.0 * h)) / (12.0 * h * h))
}

/// Symmetric matrix with independent standard normal upper triangle.
pub fn random_symmetric(dim: usize, rng: &mut impl Rng) -> SymMat {
    let mut m = SymMat::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            m.set(i, j, rng.sample(StandardNormal));
        }
    }
    m
}

/// Per-sample generator derived from a run seed.
pub fn sample_rng(seed: u64, sample: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    rng
}

pub const CERT_PDDOT_TOL: f64 = 1e-10;
pub const CERT_FD_TOL: f64 = 1e-5;
const CERT_FD_SPACING: f64 = 1e-2;
const CERT_FD_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub lambda: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    /// Largest closed-form second derivative over the sampled directions.
    pub worst_pddot: f64,
    /// Largest gap between the closed form and the geodesic finite difference.
    pub worst_fd_gap: f64,
    pub pass: bool,
}

/// Rejects `lambda` unless `lambda_k lambda_l > -1` for all `k != l`.
pub fn check_concavity_region(lambda: &[f64]) -> Result<()> {
    for k in 0..lambda.len() {
        for l in (k + 1)..lambda.len() {
            let product = lambda[k] * lambda[l];
            if product <= -1.0 {
                return Err(Error::RegionViolated {
                    lambda: lambda.to_vec(),
                    product,
                });
            }
        }
    }
    Ok(())
}

/// Samples unit-speed directions at `diag(lambda)` and checks that `phi_0`
/// is concave along each geodesic, cross-checking the closed form against a
/// finite difference along the integrated geodesic.
pub fn concavity_certificate(
    lambda: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<CertificateReport> {
    if lambda.is_empty() || lambda.len() > MAX_DIM {
        return Err(Error::DimensionOutOfRange(lambda.len()));
    }
    check_concavity_region(lambda)?;
    let n = lambda.len();
    let z0 = SymMat::from_diag(lambda);
    let results = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let mut rng = sample_rng(seed, i as u64);
            let zdot = normalize_speed(&z0, &random_symmetric(n, &mut rng));
            let closed = phi0_second_derivative(lambda, &zdot)?;
            let fd =
                geodesic_second_difference(&Phi0, lambda, &zdot, CERT_FD_SPACING, CERT_FD_STEP)?;
            Ok((closed, (fd - closed).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_pddot = results
        .iter()
        .map(|r| r.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let worst_fd_gap = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(CertificateReport {
        lambda: lambda.to_vec(),
        n_samples,
        seed,
        worst_pddot,
        worst_fd_gap,
        pass: worst_pddot <= CERT_PDDOT_TOL && worst_fd_gap <= CERT_FD_TOL,
    })
}

/// Symmetric matrix with ones at `(k, l)` and `(l, k)`.
pub fn off_diagonal_unit(dim: usize, k: usize, l: usize) -> SymMat {
    let mut m = SymMat::zeros(dim);
    m.set(k, l, 1.0);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn speed_examples() {
        assert_eq!(
            metric_speed(&SymMat::zeros(2), &SymMat::from_diag(&[1.0, 0.0])),
            1.0
        );
        let v = metric_speed(&SymMat::from_diag(&[1.0, 1.0]), &SymMat::identity(2));
        assert!((v - 0.5).abs() < 1e-15);
        assert_eq!(
            metric_speed(&SymMat::from_diag(&[0.3, 2.0]), &SymMat::zeros(2)),
            0.0
        );
    }

    #[test]
    fn rhs_examples() {
        let zd = SymMat::from_rows(&[vec![0.3, 1.0], vec![1.0, -2.0]]).unwrap();
        assert_eq!(geodesic_rhs(&SymMat::zeros(2), &zd).max_abs(), 0.0);
        let r = geodesic_rhs(&SymMat::from_diag(&[1.0]), &SymMat::from_diag(&[1.0]));
        assert!((r.get(0, 0) - 1.0).abs() < 1e-15);
        for s in [0.1, 0.5, 1.0, 1.3] {
            let (t, sec2) = (f64::tan(s), 1.0 / s.cos().powi(2));
            let r = geodesic_rhs(&SymMat::from_diag(&[t]), &SymMat::from_diag(&[sec2]));
            assert!((r.get(0, 0) - 2.0 * sec2 * t).abs() <= 1e-12 * sec2 * sec2);
        }
    }

    #[test]
    fn tangent_geodesic() {
        let traj =
            integrate_geodesic(&SymMat::zeros(1), &SymMat::identity(1), FRAC_PI_4, 1e-3).unwrap();
        let end = traj.last().unwrap();
        assert!((end.s - FRAC_PI_4).abs() < 1e-15);
        assert!((end.z.get(0, 0) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn cubic_taylor_at_origin() {
        // Z(s) = s Z' + s^3 Z'^3 / 3 + O(s^5)
        let zd = SymMat::from_rows(&[
            vec![0.5, 0.2, 0.0],
            vec![0.2, -0.1, 0.4],
            vec![0.0, 0.4, 0.3],
        ])
        .unwrap();
        let cube = zd.as_mat().mul(&zd.as_mat()).mul(&zd.as_mat());
        for s in [0.05, 0.1] {
            let z = geodesic_point(&SymMat::zeros(3), &zd, s, 1e-4).unwrap();
            let taylor = zd.as_mat().scale(s).add(&cube.scale(s * s * s / 3.0));
            let err = z.as_mat().sub(&taylor).max_abs();
            assert!(err <= 2.0 * s.powi(5), "s={s} err={err}");
            // the linear approximation alone misses the cubic term
            let gap = z.as_mat().sub(&zd.as_mat().scale(s)).max_abs();
            assert!(
                gap > 0.5 * cube.max_abs() / 3.0 * s.powi(3),
                "s={s} gap={gap}"
            );
        }
    }

    #[test]
    fn reversal_returns_home() {
        let z0 = SymMat::from_rows(&[vec![0.4, -0.3], vec![-0.3, 1.1]]).unwrap();
        let zd = SymMat::from_rows(&[vec![0.2, 0.5], vec![0.5, -0.7]]).unwrap();
        let fwd = integrate_geodesic(&z0, &zd, 0.8, 1e-3).unwrap();
        let end = fwd.last().unwrap();
        let back = integrate_geodesic(&end.z, &end.zdot.scale(-1.0), 0.8, 1e-3).unwrap();
        assert!(back.last().unwrap().z.sub(&z0).max_abs() <= 1e-8);
    }

    #[test]
    fn leaving_the_chart_is_flagged() {
        let r = integrate_geodesic(&SymMat::zeros(1), &SymMat::identity(1), 2.0, 1e-2);
        assert!(matches!(r, Err(Error::BlowUp { .. })), "{r:?}");
    }

    #[test]
    fn phi0_closed_form_examples() {
        let v = phi0_second_derivative(&[0.0, 0.0], &SymMat::identity(2)).unwrap();
        assert!((v + 2.0).abs() < 1e-15);
        let v = spectral_hessian_quadratic(&Phi0, &[0.0, 0.0], &SymMat::identity(2)).unwrap();
        assert!((v + 2.0).abs() < 1e-15);
        let off = off_diagonal_unit(2, 0, 1);
        assert!((phi0_second_derivative(&[1.0, 1.0], &off).unwrap() + 1.0).abs() < 1e-15);
        assert!((phi0_second_derivative(&[2.0, -1.0], &off).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn linear_phi_only_sees_correction() {
        // phi = p_1: phi_kl = 0 and phi_k = 1, so only the geodesic term survives
        let phi = PowerSumPoly {
            terms: vec![(1.0, vec![1])],
        };
        let off = off_diagonal_unit(2, 0, 1);
        let lam = [1.0, 2.0];
        assert_eq!(chart_hessian_quadratic(&phi, &lam, &off).unwrap(), 0.0);
        let want = 2.0 * 1.0 / 2.0 + 2.0 * 2.0 / 5.0;
        let got = spectral_hessian_quadratic(&phi, &lam, &off).unwrap();
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn degenerate_divided_difference_uses_limit() {
        // phi = p_1^2 has phi_k = phi_l everywhere: the true chart Hessian in
        // an off-diagonal direction is zero even at a double eigenvalue
        let phi = PowerSumPoly {
            terms: vec![(1.0, vec![1, 1])],
        };
        let off = off_diagonal_unit(2, 0, 1);
        let v = chart_hessian_quadratic(&phi, &[0.7, 0.7], &off).unwrap();
        assert!(v.abs() < 1e-15);
        let fd = chart_second_difference(&phi, &[0.7, 0.7], &off, 1e-3).unwrap();
        assert!(fd.abs() < 1e-6);
    }

    #[test]
    fn certificate_examples() {
        let r = concavity_certificate(&[0.0, 0.0, 0.0], 20, 3).unwrap();
        assert!(r.pass && r.worst_pddot < 0.0);
        assert!(concavity_certificate(&[1.0, 1.0], 20, 7).unwrap().pass);
        assert!(matches!(
            concavity_certificate(&[2.0, -1.0], 10, 7),
            Err(Error::RegionViolated { .. })
        ));
        assert!(concavity_certificate(&[1.0, -1.0], 10, 7).is_err());
    }

    #[test]
    fn certificate_is_deterministic() {
        let a = concavity_certificate(&[0.5, 2.0], 16, 11).unwrap();
        let b = concavity_certificate(&[0.5, 2.0], 16, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn power_sum_derivatives_match_differences() {
        let mut rng = sample_rng(5, 0);
        for _ in 0..20 {
            let phi = PowerSumPoly::random(&mut rng);
            let lam = [0.3, -0.8, 1.1];
            let g = phi.grad(&lam);
            let h = phi.hess(&lam);
            let eps = 1e-5;
            for k in 0..3 {
                let mut p = lam;
                let mut m = lam;
                p[k] += eps;
                m[k] -= eps;
                let fd = (phi.value(&p) - phi.value(&m)) / (2.0 * eps);
                assert!((fd - g[k]).abs() < 1e-6 * (1.0 + g[k].abs()));
                let gp = phi.grad(&p);
                let gm = phi.grad(&m);
                for l in 0..3 {
                    let fd = (gp[l] - gm[l]) / (2.0 * eps);
                    assert!((fd - h[k][l]).abs() < 1e-6 * (1.0 + h[k][l].abs()));
                }
            }
        }
    }
}
