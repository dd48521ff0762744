//! FFT-based differentiation, filtering and interpolation on the torus.
//!
//! Wavenumbers follow the usual layout `k_j = (2π/L)·j` for `j < N/2` and
//! `(2π/L)·(j − N)` above. The Nyquist coefficient is dropped by every odd
//! derivative and by the inverse gradient.

use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::Grid;

static PLANNER: LazyLock<Mutex<FftPlanner<f64>>> = LazyLock::new(|| Mutex::new(FftPlanner::new()));

#[derive(Clone)]
pub struct Spectral {
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: &Grid) -> Result<Self> {
        let Grid::Torus { length, points } = *grid else {
            return Err(Error::NotTorus);
        };
        let (forward, inverse) = {
            let mut planner = PLANNER.lock().expect("fft planner poisoned");
            (planner.plan_fft_forward(points), planner.plan_fft_inverse(points))
        };
        let base = 2.0 * std::f64::consts::PI / length;
        let wavenumbers = (0..points)
            .map(|j| {
                if 2 * j < points {
                    base * j as f64
                } else {
                    base * (j as f64 - points as f64)
                }
            })
            .collect();
        Ok(Self {
            n: points,
            length,
            forward,
            inverse,
            wavenumbers,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn wavenumber(&self, j: usize) -> f64 {
        self.wavenumbers[j]
    }

    fn is_nyquist(&self, j: usize) -> bool {
        self.n.is_multiple_of(2) && j == self.n / 2
    }

    /// Modes kept by the 2/3 rule: `|j| <= N/3`.
    pub fn in_band(&self, j: usize) -> bool {
        let m = if 2 * j < self.n { j } else { self.n - j };
        3 * m <= self.n && !self.is_nyquist(j)
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform including the 1/N normalisation; returns the real part.
    pub fn inverse(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut coeffs);
        let scale = 1.0 / self.n as f64;
        coeffs.into_iter().map(|c| c.re * scale).collect()
    }

    fn apply(&self, values: &[f64], symbol: impl Fn(usize, f64) -> Complex64) -> Vec<f64> {
        let mut c = self.forward(values);
        for (j, cj) in c.iter_mut().enumerate() {
            *cj *= symbol(j, self.wavenumbers[j]);
        }
        self.inverse(c)
    }

    /// `order`-th derivative.
    pub fn derivative(&self, values: &[f64], order: u32) -> Vec<f64> {
        if order == 0 {
            return values.to_vec();
        }
        self.apply(values, |j, k| {
            if self.is_nyquist(j) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k).powu(order)
            }
        })
    }

    /// First derivative restricted to the 2/3-rule band.
    pub fn derivative_dealiased(&self, values: &[f64]) -> Vec<f64> {
        self.apply(values, |j, k| {
            if self.in_band(j) {
                Complex64::new(0.0, k)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Orthogonal projection onto the 2/3-rule band.
    pub fn dealias(&self, values: &[f64]) -> Vec<f64> {
        self.apply(values, |j, _| {
            if self.in_band(j) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Zero-mean periodic antiderivative: the unique `g` with `g' = f − mean(f)`
    /// and `mean(g) = 0`. Also returns the removed mean.
    pub fn antiderivative(&self, values: &[f64]) -> (Vec<f64>, f64) {
        let mut c = self.forward(values);
        let removed = c[0].re / self.n as f64;
        for (j, cj) in c.iter_mut().enumerate() {
            if j == 0 || self.is_nyquist(j) {
                *cj = Complex64::new(0.0, 0.0);
            } else {
                *cj /= Complex64::new(0.0, self.wavenumbers[j]);
            }
        }
        (self.inverse(c), removed)
    }

    /// Evaluates the trigonometric interpolant of `coeffs` (from [`Spectral::forward`]) at `x`.
    /// The Nyquist mode is split symmetrically so the interpolant is real.
    pub fn interpolate(&self, coeffs: &[Complex64], x: f64) -> f64 {
        let base = 2.0 * std::f64::consts::PI / self.length;
        let step = Complex64::from_polar(1.0, base * x);
        let mut phase = Complex64::new(1.0, 0.0);
        let mut sum = coeffs[0].re;
        let half = self.n / 2;
        for cj in coeffs.iter().take(half).skip(1) {
            phase *= step;
            sum += 2.0 * (cj * phase).re;
        }
        if self.n.is_multiple_of(2) {
            phase *= step;
            sum += coeffs[half].re * phase.re;
        } else {
            phase *= step;
            sum += 2.0 * (coeffs[half] * phase).re;
        }
        sum / self.n as f64
    }
}
