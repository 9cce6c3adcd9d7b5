//! Small dense matrices (dimension at most [`MAX_DIM`]) stored inline.
//!
//! Everything here is allocation-free so that per-grid-point work in the
//! flow does not touch the heap.

use crate::error::{Error, Result};
use crate::MAX_DIM;
use std::fmt;

type Block = [[f64; MAX_DIM]; MAX_DIM];

/// Real symmetric `dim x dim` matrix. Symmetry is enforced on construction.
#[derive(Clone, Copy, PartialEq)]
pub struct SymMat {
    dim: usize,
    a: Block,
}

/// General real square matrix, used for products and the unitary blocks.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat {
    dim: usize,
    a: Block,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        Err(Error::DimensionOutOfRange(dim))
    } else {
        Ok(())
    }
}

impl SymMat {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self {
            dim,
            a: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![1.0; dim])
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.a[i][i] = v;
        }
        m
    }

    /// Builds `(f(i,j) + f(j,i)) / 2`, so the result is exactly symmetric.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.a[i][i] = f(i, i);
            for j in (i + 1)..dim {
                let v = 0.5 * (f(i, j) + f(j, i));
                m.a[i][j] = v;
                m.a[j][i] = v;
            }
        }
        m
    }

    /// Square row list, symmetrized.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::SizeMismatch(dim, r.len()));
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    /// Row-major upper triangle `a00, a01, .., a0n, a11, ..`.
    pub fn from_upper(dim: usize, upper: &[f64]) -> Result<Self> {
        check_dim(dim)?;
        let want = dim * (dim + 1) / 2;
        if upper.len() != want {
            return Err(Error::SizeMismatch(want, upper.len()));
        }
        let mut m = Self::zeros(dim);
        let mut it = upper.iter();
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, *it.next().unwrap());
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    /// Sets both `(i,j)` and `(j,i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i][j] = v;
        self.a[j][i] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.a[i][..self.dim].to_vec())
            .collect()
    }

    pub fn as_mat(&self) -> Mat {
        Mat {
            dim: self.dim,
            a: self.a,
        }
    }

    pub fn add(&self, other: &SymMat) -> SymMat {
        assert_eq!(self.dim, other.dim);
        SymMat::from_fn(self.dim, |i, j| self.a[i][j] + other.a[i][j])
    }

    pub fn sub(&self, other: &SymMat) -> SymMat {
        assert_eq!(self.dim, other.dim);
        SymMat::from_fn(self.dim, |i, j| self.a[i][j] - other.a[i][j])
    }

    pub fn scale(&self, s: f64) -> SymMat {
        SymMat::from_fn(self.dim, |i, j| s * self.a[i][j])
    }

    /// `A^2`, symmetrized.
    pub fn square(&self) -> SymMat {
        self.as_mat().mul(&self.as_mat()).symmetric_part()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.a[i][i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.as_mat().max_abs()
    }

    pub fn frobenius(&self) -> f64 {
        self.as_mat().frobenius()
    }
}

impl Mat {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self {
            dim,
            a: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.a[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::SizeMismatch(dim, r.len()));
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i][j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.a[i][..self.dim].to_vec())
            .collect()
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        Mat::from_fn(n, |i, j| (0..n).map(|k| self.a[i][k] * other.a[k][j]).sum())
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.dim, |i, j| self.a[j][i])
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(self.dim, other.dim);
        Mat::from_fn(self.dim, |i, j| self.a[i][j] + other.a[i][j])
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!(self.dim, other.dim);
        Mat::from_fn(self.dim, |i, j| self.a[i][j] - other.a[i][j])
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat::from_fn(self.dim, |i, j| s * self.a[i][j])
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.a[i][i]).sum()
    }

    /// `(A + A^T) / 2`.
    pub fn symmetric_part(&self) -> SymMat {
        SymMat::from_fn(self.dim, |i, j| self.a[i][j])
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim;
        self.a[..n]
            .iter()
            .flat_map(|r| r[..n].iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        let n = self.dim;
        self.a[..n]
            .iter()
            .flat_map(|r| r[..n].iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> f64 {
        let n = self.dim;
        let mut a = self.a;
        let mut det = 1.0;
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
                .unwrap();
            if a[p][c] == 0.0 {
                return 0.0;
            }
            if p != c {
                a.swap(p, c);
                det = -det;
            }
            det *= a[c][c];
            for r in (c + 1)..n {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
        det
    }
}

impl fmt::Debug for SymMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMat{:?}", self.to_rows())
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat{:?}", self.to_rows())
    }
}

/// Ascending eigenvalues with the matching orthonormal eigenvectors stored
/// as the columns of `frame`.
#[derive(Debug, Clone, Copy)]
pub struct EigenDecomp {
    dim: usize,
    lambdas: [f64; MAX_DIM],
    pub frame: Mat,
}

impl EigenDecomp {
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas[..self.dim]
    }

    pub fn min(&self) -> f64 {
        self.lambdas[0]
    }

    pub fn max(&self) -> f64 {
        self.lambdas[self.dim - 1]
    }

    /// `frame * diag(f(lambda)) * frame^T`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymMat {
        let n = self.dim;
        let fl: Vec<f64> = self.lambdas().iter().map(|&l| f(l)).collect();
        SymMat::from_fn(n, |i, j| {
            (0..n)
                .map(|k| self.frame.get(i, k) * fl[k] * self.frame.get(j, k))
                .sum()
        })
    }

    pub fn reconstruct(&self) -> SymMat {
        self.map(|l| l)
    }
}

const MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
///
/// Eigenvalues come back ascending; ties keep the order in which Jacobi left
/// them on the diagonal.
pub fn sym_eigen(m: &SymMat) -> EigenDecomp {
    let n = m.dim;
    let mut a = m.a;
    let mut v = Mat::identity(n).a;

    for sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                let g = 100.0 * apq.abs();
                // after a few sweeps, drop elements that are below roundoff
                // relative to both diagonal entries
                if sweep > 3
                    && a[p][p].abs() + g == a[p][p].abs()
                    && a[q][q].abs() + g == a[q][q].abs()
                {
                    a[p][q] = 0.0;
                    a[q][p] = 0.0;
                    continue;
                }
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p][p] -= t * apq;
                a[q][q] += t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[r][p];
                        let arq = a[r][q];
                        let np = arp - s * (arq + tau * arp);
                        let nq = arq + s * (arp - tau * arq);
                        a[r][p] = np;
                        a[p][r] = np;
                        a[r][q] = nq;
                        a[q][r] = nq;
                    }
                }
                for row in v.iter_mut().take(n) {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = vp - s * (vq + tau * vp);
                    row[q] = vq + s * (vp - tau * vq);
                }
            }
        }
    }

    let mut order: [usize; MAX_DIM] = [0, 1, 2, 3];
    order[..n].sort_by(|&x, &y| a[x][x].total_cmp(&a[y][y]));
    let mut lambdas = [0.0; MAX_DIM];
    let mut frame = Mat::zeros(n);
    for (k, &src) in order[..n].iter().enumerate() {
        lambdas[k] = a[src][src];
        for r in 0..n {
            frame.a[r][k] = v[r][src];
        }
    }
    EigenDecomp {
        dim: n,
        lambdas,
        frame,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input() {
        let e = sym_eigen(&SymMat::from_diag(&[2.0, -1.0]));
        assert_eq!(e.lambdas(), &[-1.0, 2.0]);
    }

    #[test]
    fn swap_matrix() {
        let m = SymMat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = sym_eigen(&m);
        assert!((e.lambdas()[0] + 1.0).abs() < 1e-15);
        assert!((e.lambdas()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_is_degenerate_but_fine() {
        let e = sym_eigen(&SymMat::identity(3));
        assert_eq!(e.lambdas(), &[1.0, 1.0, 1.0]);
        let ftf = e.frame.transpose().mul(&e.frame);
        assert!(ftf.sub(&Mat::identity(3)).max_abs() < 1e-15);
    }

    #[test]
    fn ties_keep_diagonal_order() {
        let e = sym_eigen(&SymMat::from_diag(&[1.0, 0.0, 1.0]));
        assert_eq!(e.lambdas(), &[0.0, 1.0, 1.0]);
        // the two unit eigenvalues keep axes 0 then 2
        assert_eq!(e.frame.get(0, 1), 1.0);
        assert_eq!(e.frame.get(2, 2), 1.0);
    }

    #[test]
    fn from_upper_layout() {
        let m = SymMat::from_upper(3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(
            m.to_rows(),
            vec![
                vec![1.0, 2.0, 3.0],
                vec![2.0, 4.0, 5.0],
                vec![3.0, 5.0, 6.0]
            ]
        );
        assert!(SymMat::from_upper(2, &[1.0]).is_err());
        assert!(SymMat::from_upper(5, &[0.0; 15]).is_err());
    }

    #[test]
    fn determinant_by_elimination() {
        let m = Mat::from_rows(&[vec![0.0, 2.0], vec![3.0, 1.0]]).unwrap();
        assert!((m.det() + 6.0).abs() < 1e-15);
        assert_eq!(Mat::zeros(3).det(), 0.0);
    }
}
