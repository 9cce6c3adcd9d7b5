//! Unitary rotations of the S-tensor.
//!
//! `C^n = R^n + J R^n` is modelled as `R^{2n}` with `J(x, y) = (-y, x)`,
//! `pi_1(x, y) = (x, 0)` and `pi_2(x, y) = (0, y)`, so that
//! `S(X, Y) = <J pi_1 X, pi_2 Y> = x_X . y_Y`. A unitary `U` is the real block
//! matrix `[[P, -Q], [Q, P]]` acting on the adapted frame `{e_i, J e_i}` of a
//! tangent plane.

use crate::angle::s_value;
use crate::error::{Error, Result};
use crate::flow::{hessian_field, FlowState};
use crate::sym::{sym_eigen, Mat, SymMat};

/// Constraint residual above which [`make_unitary`] rejects its input.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryBlock {
    p: Mat,
    q: Mat,
}

/// Validates `PP^T + QQ^T = I` and `QP^T - PQ^T = 0`.
pub fn make_unitary(p: Mat, q: Mat) -> Result<UnitaryBlock> {
    if p.dim() != q.dim() {
        return Err(Error::SizeMismatch(p.dim(), q.dim()));
    }
    let (orthogonality, symmetry) = residuals(&p, &q);
    if orthogonality > UNITARY_TOL || symmetry > UNITARY_TOL {
        return Err(Error::NotUnitary {
            orthogonality,
            symmetry,
        });
    }
    Ok(UnitaryBlock { p, q })
}

fn residuals(p: &Mat, q: &Mat) -> (f64, f64) {
    let n = p.dim();
    let (pt, qt) = (p.transpose(), q.transpose());
    let orth = p.mul(&pt).add(&q.mul(&qt)).sub(&Mat::identity(n)).max_abs();
    let sym = q.mul(&pt).sub(&p.mul(&qt)).max_abs();
    (orth, sym)
}

impl UnitaryBlock {
    pub fn identity(n: usize) -> Self {
        Self {
            p: Mat::identity(n),
            q: Mat::zeros(n),
        }
    }

    /// `P = Q = I / sqrt(2)`: every complex line turned by `pi/4`.
    pub fn quarter_turn(n: usize) -> Self {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            p: Mat::identity(n).scale(c),
            q: Mat::identity(n).scale(c),
        }
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn p(&self) -> &Mat {
        &self.p
    }

    pub fn q(&self) -> &Mat {
        &self.q
    }

    /// `(|PP^T + QQ^T - I|_max, |QP^T - PQ^T|_max)`.
    pub fn residuals(&self) -> (f64, f64) {
        residuals(&self.p, &self.q)
    }

    /// Row-major `[[P, -Q], [Q, P]]`.
    pub fn block(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut b = vec![vec![0.0; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                b[i][j] = self.p.get(i, j);
                b[i][j + n] = -self.q.get(i, j);
                b[i + n][j] = self.q.get(i, j);
                b[i + n][j + n] = self.p.get(i, j);
            }
        }
        b
    }

    /// Image of the adapted-frame vector `e_i` in adapted coordinates:
    /// `U e_i = sum_k P_ki e_k + sum_l Q_li J e_l`.
    pub fn image_of_tangent(&self, i: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        (
            (0..n).map(|k| self.p.get(k, i)).collect(),
            (0..n).map(|l| self.q.get(l, i)).collect(),
        )
    }
}

/// Block form of `J` on `R^{2n}`, `[[0, -I], [I, 0]]`.
pub fn complex_structure(n: usize) -> Vec<Vec<f64>> {
    let mut j = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        j[i][i + n] = -1.0;
        j[i + n][i] = 1.0;
    }
    j
}

/// `S(X, Y) = <J pi_1 X, pi_2 Y>` for `X, Y` in `R^{2n}`.
pub fn s_form(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() / 2;
    (0..n).map(|i| x[i] * y[i + n]).sum()
}

pub fn apply_j(x: &[f64]) -> Vec<f64> {
    let n = x.len() / 2;
    let mut out = vec![0.0; 2 * n];
    for i in 0..n {
        out[i] = -x[i + n];
        out[i + n] = x[i];
    }
    out
}

/// Adapted tangent frame `e_i = (a_i + lambda_i J a_i) / sqrt(1 + lambda_i^2)`
/// with `a_i` the standard basis, as vectors in `R^{2n}`.
pub fn adapted_frame(lambda: &[f64]) -> Vec<Vec<f64>> {
    let n = lambda.len();
    lambda
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let c = 1.0 / (1.0 + l * l).sqrt();
            let mut e = vec![0.0; 2 * n];
            e[i] = c;
            e[i + n] = l * c;
            e
        })
        .collect()
}

/// `S_U(e_i, e_i)` for each `i` at a point with Hessian eigenvalues `lambda`.
pub fn s_u_diagonal(u: &UnitaryBlock, lambda: &[f64]) -> Result<Vec<f64>> {
    let n = u.dim();
    if lambda.len() != n {
        return Err(Error::SizeMismatch(n, lambda.len()));
    }
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let (p, q) = (u.p.get(k, i), u.q.get(k, i));
                    let l2 = lambda[k] * lambda[k];
                    (p * p - q * q) * s_value(lambda[k]) + p * q * (1.0 - l2) / (1.0 + l2)
                })
                .sum()
        })
        .collect())
}

/// Anything that yields Hessian spectra: one matrix, or every grid point of
/// a flow state.
pub trait HessianSpectra {
    fn spectra(&self) -> Result<Vec<Vec<f64>>>;
}

impl HessianSpectra for SymMat {
    fn spectra(&self) -> Result<Vec<Vec<f64>>> {
        Ok(vec![sym_eigen(self).lambdas().to_vec()])
    }
}

impl HessianSpectra for FlowState {
    fn spectra(&self) -> Result<Vec<Vec<f64>>> {
        Ok(hessian_field(self)?
            .eigen()
            .iter()
            .map(|e| e.lambdas().to_vec())
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub holds: bool,
    pub margin: f64,
}

/// All eigenvalues strictly inside `(-1, 1)`; margin `1 - max |lambda|`.
pub fn corollary_b_condition(subject: &impl HessianSpectra) -> Result<Condition> {
    let worst = subject
        .spectra()?
        .iter()
        .flatten()
        .fold(0.0_f64, |m, l| m.max(l.abs()));
    let margin = 1.0 - worst;
    Ok(Condition {
        holds: margin > 0.0,
        margin,
    })
}

/// Convexity, i.e. positivity of `S` itself; margin `min lambda`.
pub fn convexity_as_orbit(subject: &impl HessianSpectra) -> Result<Condition> {
    let margin = subject
        .spectra()?
        .iter()
        .flatten()
        .fold(f64::INFINITY, |m, &l| m.min(l));
    Ok(Condition {
        holds: margin > 0.0,
        margin,
    })
}

/// Smallest `S_U(e_i, e_i)` over all points and indices.
pub fn min_s_u(u: &UnitaryBlock, subject: &impl HessianSpectra) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for l in subject.spectra()? {
        for v in s_u_diagonal(u, &l)? {
            worst = worst.min(v);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn construction() {
        assert!(make_unitary(Mat::identity(3), Mat::zeros(3)).is_ok());
        let c = Mat::identity(2).scale(FRAC_1_SQRT_2);
        assert!(make_unitary(c, c).is_ok());
        match make_unitary(Mat::identity(2), Mat::identity(2)) {
            Err(Error::NotUnitary { orthogonality, .. }) => {
                assert!((orthogonality - 1.0).abs() < 1e-15)
            }
            other => panic!("{other:?}"),
        }
        assert!(make_unitary(Mat::identity(2), Mat::zeros(3)).is_err());
    }

    #[test]
    fn s_u_examples() {
        let lam = [0.4, -2.0, 3.0];
        let id = s_u_diagonal(&UnitaryBlock::identity(3), &lam).unwrap();
        for (v, l) in id.iter().zip(lam) {
            assert_eq!(*v, l / (1.0 + l * l));
        }
        let qt = UnitaryBlock::quarter_turn(2);
        for v in s_u_diagonal(&qt, &[0.0, 0.0]).unwrap() {
            assert!((v - 0.5).abs() < 1e-15);
        }
        for v in s_u_diagonal(&qt, &[3.0, 3.0]).unwrap() {
            assert!((v + 0.4).abs() < 1e-15);
        }
        assert!(s_u_diagonal(&qt, &[1.0]).is_err());
    }

    #[test]
    fn conditions() {
        let c = corollary_b_condition(&SymMat::from_diag(&[0.5, -0.5])).unwrap();
        assert!(c.holds && (c.margin - 0.5).abs() < 1e-15);
        let c = corollary_b_condition(&SymMat::from_diag(&[1.2, 0.0])).unwrap();
        assert!(!c.holds && (c.margin + 0.2).abs() < 1e-15);

        let c = convexity_as_orbit(&SymMat::from_diag(&[0.3, 0.7])).unwrap();
        assert!(c.holds && c.margin == 0.3);
        let c = convexity_as_orbit(&SymMat::from_diag(&[0.0, 1.0])).unwrap();
        assert!(!c.holds && c.margin == 0.0);
        assert!(!convexity_as_orbit(&SymMat::zeros(2)).unwrap().holds);
    }

    #[test]
    fn frame_is_orthonormal_and_s_is_diagonal() {
        let lam = [0.3, -1.7];
        let e = adapted_frame(&lam);
        for i in 0..2 {
            for j in 0..2 {
                let dot: f64 = e[i].iter().zip(&e[j]).map(|(a, b)| a * b).sum();
                assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
                let s = s_form(&e[i], &e[j]);
                let want = if i == j { s_value(lam[i]) } else { 0.0 };
                assert!((s - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn block_commutes_with_j() {
        let c = Mat::identity(2).scale(FRAC_1_SQRT_2);
        let u = make_unitary(c, c).unwrap();
        let b = u.block();
        let j = complex_structure(2);
        let mul = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            (0..4)
                .map(|i| {
                    (0..4)
                        .map(|k| (0..4).map(|m| a[i][m] * b[m][k]).sum())
                        .collect()
                })
                .collect()
        };
        let (ju, uj) = (mul(&j, &b), mul(&b, &j));
        for i in 0..4 {
            for k in 0..4 {
                assert!((ju[i][k] - uj[i][k]).abs() < 1e-15);
            }
        }
    }
}
