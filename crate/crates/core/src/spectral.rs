//! Periodic one-dimensional Fourier representation of scalar fields.
//!
//! Fields live on the torus `[0, L)` sampled at `x_j = j L / n`. Spectral
//! coefficients are normalized so that `coeff(0)` is the sample mean.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("grid size {0} must be even and at least 8")]
    BadSize(usize),
    #[error("domain length {0} must be finite and positive")]
    BadLength(f64),
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("sample {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("symbol is not finite at wavenumber {xi}")]
    NonFiniteSymbol { xi: f64 },
}

/// Uniform periodic grid with `n` points on a period of length `length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    length: f64,
}

impl Grid1D {
    pub fn new(n: usize, length: f64) -> Result<Self, SpectralError> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(SpectralError::BadSize(n));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SpectralError::BadLength(length));
        }
        Ok(Self { n, length })
    }

    /// Grid on the standard `2π` torus.
    pub fn periodic(n: usize) -> Result<Self, SpectralError> {
        Self::new(n, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Signed mode number of FFT slot `j`, in `{-n/2+1, ..., n/2}`.
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    /// FFT slot holding signed mode `k`.
    pub fn slot(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Wavenumber `2πk/L` stored in FFT slot `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI * self.mode(j) as f64 / self.length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.wavenumber(j)).collect()
    }

    pub fn nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n).map(|j| j as f64 * dx).collect()
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.n / 2
    }

    /// Largest retained mode number under the two-thirds rule.
    pub fn dealias_cutoff(&self) -> i64 {
        self.n as i64 / 3
    }
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// Forward transform in place, scaled by `1/n`.
pub(crate) fn forward_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    plans(n).forward.process(buf);
    let s = 1.0 / n as f64;
    for c in buf.iter_mut() {
        *c *= s;
    }
}

/// Unscaled inverse transform in place (inverse of [`forward_in_place`]).
pub(crate) fn inverse_in_place(buf: &mut [Complex64]) {
    plans(buf.len()).inverse.process(buf);
}

/// Real samples of a periodic field.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid1D,
    samples: Vec<f64>,
}

/// Fourier coefficients of a real periodic field, in FFT slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid1D,
    coeffs: Vec<Complex64>,
}

impl RealField {
    pub fn new(grid: Grid1D, samples: Vec<f64>) -> Result<Self, SpectralError> {
        if samples.len() != grid.n {
            return Err(SpectralError::LengthMismatch {
                expected: grid.n,
                got: samples.len(),
            });
        }
        if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(SpectralError::NonFinite { index, value });
        }
        Ok(Self { grid, samples })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let samples = grid.nodes().into_iter().map(f).collect();
        Self { grid, samples }
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid1D, c: f64) -> Self {
        Self {
            grid,
            samples: vec![c; grid.n],
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    pub fn to_spectral(&self) -> SpectralField {
        let mut coeffs: Vec<Complex64> =
            self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        forward_in_place(&mut coeffs);
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }

    /// `order`-th derivative; odd orders drop the Nyquist mode.
    pub fn derivative(&self, order: u32) -> RealField {
        let mut s = self.to_spectral();
        let odd = order % 2 == 1;
        for j in 0..self.grid.n {
            if odd && self.grid.is_nyquist(j) {
                s.coeffs[j] = Complex64::new(0.0, 0.0);
                continue;
            }
            let ik = Complex64::new(0.0, self.grid.wavenumber(j));
            s.coeffs[j] *= ik.powu(order);
        }
        s.to_real()
    }

    /// Applies the Fourier multiplier `symbol(|ξ|)`.
    pub fn apply_multiplier(&self, symbol: impl Fn(f64) -> f64) -> Result<RealField, SpectralError> {
        let mut table = Vec::with_capacity(self.grid.n);
        for j in 0..self.grid.n {
            let xi = self.grid.wavenumber(j).abs();
            let v = symbol(xi);
            if !v.is_finite() {
                return Err(SpectralError::NonFiniteSymbol { xi });
            }
            table.push(v);
        }
        Ok(self.apply_table(&table))
    }

    /// Applies a multiplier already tabulated per FFT slot.
    pub fn apply_table(&self, table: &[f64]) -> RealField {
        assert_eq!(table.len(), self.grid.n, "symbol table length");
        let mut s = self.to_spectral();
        for (c, &m) in s.coeffs.iter_mut().zip(table) {
            *c *= m;
        }
        s.to_real()
    }

    pub fn dealias(&self) -> RealField {
        self.to_spectral().dealias().to_real()
    }

    /// `∫ f dx` over one period.
    pub fn integrate(&self) -> f64 {
        self.grid.length * self.mean()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.grid.n as f64
    }

    /// `∫ f g dx` over one period.
    pub fn dot(&self, other: &RealField) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.dx()
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealField {
        RealField {
            grid: self.grid,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> RealField {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        RealField {
            grid: self.grid,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, a: f64) -> RealField {
        self.map(|v| a * v)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &RealField) -> RealField {
        self.zip_map(other, |x, y| x + a * y)
    }

    /// Circular shift by `cells` grid points.
    pub fn shifted(&self, cells: usize) -> RealField {
        let mut samples = self.samples.clone();
        samples.rotate_right(cells % self.grid.n);
        RealField {
            grid: self.grid,
            samples,
        }
    }
}

impl SpectralField {
    pub fn from_coeffs(grid: Grid1D, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.n {
            return Err(SpectralError::LengthMismatch {
                expected: grid.n,
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of signed mode `k`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs[self.grid.slot(k)]
    }

    pub fn to_real(&self) -> RealField {
        let mut buf = self.coeffs.clone();
        inverse_in_place(&mut buf);
        RealField {
            grid: self.grid,
            samples: buf.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Two-thirds rule: zero every mode with `|k| > n/3`.
    pub fn dealias(mut self) -> SpectralField {
        let cut = self.grid.dealias_cutoff();
        for j in 0..self.grid.n {
            if self.grid.mode(j).abs() > cut {
                self.coeffs[j] = Complex64::new(0.0, 0.0);
            }
        }
        self
    }

    /// Trigonometric interpolant at an arbitrary `x`; the Nyquist mode enters as a cosine.
    pub fn eval_at(&self, x: f64) -> f64 {
        let mut sum = 0.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            let xi = self.grid.wavenumber(j);
            if self.grid.is_nyquist(j) {
                sum += c.re * (xi * x).cos();
            } else {
                sum += c.re * (xi * x).cos() - c.im * (xi * x).sin();
            }
        }
        sum
    }

    /// `Σ |coeff(k)|²`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

impl Add for &RealField {
    type Output = RealField;
    fn add(self, rhs: &RealField) -> RealField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &RealField {
    type Output = RealField;
    fn sub(self, rhs: &RealField) -> RealField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul for &RealField {
    type Output = RealField;
    fn mul(self, rhs: &RealField) -> RealField {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl Mul<&RealField> for f64 {
    type Output = RealField;
    fn mul(self, rhs: &RealField) -> RealField {
        rhs.scale(self)
    }
}

impl Neg for &RealField {
    type Output = RealField;
    fn neg(self) -> RealField {
        self.scale(-1.0)
    }
}
