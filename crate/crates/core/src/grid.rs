//! Uniform periodic tensor grids on `[0, 2pi)^n` and trigonometric-spectral
//! differentiation.
//!
//! Sample layout is row-major: axis 0 varies slowest, axis `n-1` fastest, so
//! the flat index of `(i_0, .., i_{n-1})` is `sum_k i_k * N^(n-1-k)`.

use crate::error::{Error, Result};
use crate::MAX_DIM;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Optional spectral truncation applied inside [`Grid::diff`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralFilter {
    #[default]
    None,
    /// Zero every mode with some `|k_j| > N/3`.
    TwoThirds,
}

#[derive(Clone)]
pub struct Grid {
    n: usize,
    points: usize,
    h: f64,
    filter: SpectralFilter,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("N", &self.points)
            .field("h", &self.h)
            .field("filter", &self.filter)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.points == other.points && self.filter == other.filter
    }
}

/// Spatial dimension `n` in `1..=4`, `points` per axis a power of two `>= 8`.
pub fn make_grid(n: usize, points: usize) -> Result<Grid> {
    Grid::new(n, points)
}

impl Grid {
    pub fn new(n: usize, points: usize) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::DimensionOutOfRange(n));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::BadResolution(points));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            points,
            h: 2.0 * PI / points as f64,
            filter: SpectralFilter::None,
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
        })
    }

    pub fn with_filter(mut self, filter: SpectralFilter) -> Self {
        self.filter = filter;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Points per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn filter(&self) -> SpectralFilter {
        self.filter
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer grid indices of flat sample `idx`.
    pub fn index(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for k in (0..self.n).rev() {
            out[k] = idx % self.points;
            idx /= self.points;
        }
        out
    }

    /// Coordinates `x_k = i_k * h` of flat sample `idx`.
    pub fn coords(&self, idx: usize) -> [f64; MAX_DIM] {
        let ix = self.index(idx);
        let mut x = [0.0; MAX_DIM];
        for k in 0..self.n {
            x[k] = ix[k] as f64 * self.h;
        }
        x
    }

    /// Signed wavenumber of FFT bin `m`; the Nyquist bin maps to `+N/2`.
    pub fn wavenumber(&self, m: usize) -> i64 {
        if m <= self.points / 2 {
            m as i64
        } else {
            m as i64 - self.points as i64
        }
    }

    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> PeriodicField {
        let values = (0..self.len())
            .map(|i| f(&self.coords(i)[..self.n]))
            .collect();
        PeriodicField {
            grid: self.clone(),
            values,
        }
    }

    pub fn zeros(&self) -> PeriodicField {
        PeriodicField {
            grid: self.clone(),
            values: vec![0.0; self.len()],
        }
    }

    pub fn constant(&self, c: f64) -> PeriodicField {
        PeriodicField {
            grid: self.clone(),
            values: vec![c; self.len()],
        }
    }

    pub fn field(&self, values: Vec<f64>) -> Result<PeriodicField> {
        if values.len() != self.len() {
            return Err(Error::FieldLength {
                got: values.len(),
                want: self.len(),
            });
        }
        Ok(PeriodicField {
            grid: self.clone(),
            values,
        })
    }

    fn check(&self, f: &PeriodicField) -> Result<()> {
        if f.grid.n != self.n || f.grid.points != self.points {
            return Err(Error::GridMismatch {
                want_n: self.n,
                want_pts: self.points,
                found_n: f.grid.n,
                found_pts: f.grid.points,
            });
        }
        Ok(())
    }

    /// Applies a 1-D transform along every axis in turn (unnormalized).
    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let np = self.points;
        let mut line = vec![Complex64::new(0.0, 0.0); np];
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for axis in 0..self.n {
            let stride = np.pow((self.n - 1 - axis) as u32);
            let outer = self.len() / (np * stride);
            for o in 0..outer {
                for s in 0..stride {
                    let base = o * np * stride + s;
                    for (m, c) in line.iter_mut().enumerate() {
                        *c = data[base + m * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (m, c) in line.iter().enumerate() {
                        data[base + m * stride] = *c;
                    }
                }
            }
        }
    }

    /// Normalized discrete Fourier coefficients of `f`.
    pub fn spectrum(&self, f: &PeriodicField) -> Result<Spectrum> {
        self.check(f)?;
        let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        let norm = 1.0 / self.len() as f64;
        for c in data.iter_mut() {
            *c *= norm;
        }
        Ok(Spectrum { coeffs: data })
    }

    /// Real field whose coefficients are `spec`, differentiated by `order`.
    pub fn synthesize(&self, spec: &Spectrum, order: &[usize]) -> Result<PeriodicField> {
        if order.len() != self.n {
            return Err(Error::OrderLength {
                got: order.len(),
                want: self.n,
            });
        }
        let total: usize = order.iter().sum();
        if total > 3 {
            return Err(Error::OrderTooHigh(total));
        }
        let np = self.points;
        let cutoff = (np / 3) as i64;
        let mut data = spec.coeffs.clone();
        // per-axis multipliers (i k)^o
        let factors: Vec<Vec<Complex64>> = order
            .iter()
            .map(|&o| {
                (0..np)
                    .map(|m| {
                        let k = self.wavenumber(m);
                        let filtered = self.filter == SpectralFilter::TwoThirds && k.abs() > cutoff;
                        if filtered || (o % 2 == 1 && 2 * m == np) {
                            Complex64::new(0.0, 0.0)
                        } else {
                            Complex64::new(0.0, k as f64).powu(o as u32)
                        }
                    })
                    .collect()
            })
            .collect();
        if total > 0 || self.filter != SpectralFilter::None {
            for (idx, c) in data.iter_mut().enumerate() {
                let ix = self.index(idx);
                let mut mult = Complex64::new(1.0, 0.0);
                for axis in 0..self.n {
                    mult *= factors[axis][ix[axis]];
                }
                *c *= mult;
            }
        }
        self.transform(&mut data, &self.inverse);
        Ok(PeriodicField {
            grid: self.clone(),
            values: data.into_iter().map(|c| c.re).collect(),
        })
    }

    /// Partial derivative of `f` with multi-index `order` (`|order| <= 3`).
    pub fn diff(&self, f: &PeriodicField, order: &[usize]) -> Result<PeriodicField> {
        let spec = self.spectrum(f)?;
        self.synthesize(&spec, order)
    }
}

/// Normalized Fourier coefficients in the same row-major layout as the
/// samples.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub coeffs: Vec<Complex64>,
}

/// Real samples of a scalar on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    grid: Grid,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub sup: f64,
}

impl PeriodicField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> PeriodicField {
        PeriodicField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `a * self + b * other`.
    pub fn axpby(&self, a: f64, other: &PeriodicField, b: f64) -> Result<PeriodicField> {
        self.grid.check(other)?;
        Ok(PeriodicField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn stats(&self) -> FieldStats {
        field_stats(self)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn to_snapshot(&self) -> Snapshot {
        Snapshot {
            n: self.grid.n,
            points: self.grid.points,
            values: self.values.clone(),
        }
    }
}

/// Min, max, mean and sup-norm over the samples, in sample order.
pub fn field_stats(f: &PeriodicField) -> FieldStats {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &v in &f.values {
        min = min.min(v);
        max = max.max(v);
        sum += v;
    }
    FieldStats {
        min,
        max,
        mean: sum / f.values.len() as f64,
        sup: min.abs().max(max.abs()),
    }
}

/// Field dump: `{"n": .., "N": .., "values": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn into_field(self) -> Result<PeriodicField> {
        let grid = Grid::new(self.n, self.points)?;
        let f = grid.field(self.values)?;
        if !f.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(f)
    }
}
