//! Periodic 1D grid in droplet-natural units and its spectral transform.
//!
//! Positions are x̄ = q_c·x and wavenumbers are measured in units of q_c, so a
//! field with one critical wavelength per 2π has its spectral weight at q̄ = ±1.
//! The transform pair is unitary (1/√N on both legs), which makes Parseval's
//! identity hold without extra factors.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

/// Smallest grid that still samples one critical wavelength (2π) with a few points.
pub const MIN_POINTS: usize = 16;

/// Default window: sixteen critical wavelengths.
pub const DEFAULT_LENGTH: f64 = 16.0 * 2.0 * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least {MIN_POINTS} points, got {0}")]
    TooFewPoints(usize),
    #[error("grid length must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("array length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Uniform periodic grid with paired real-space points and wavenumbers.
#[derive(Clone)]
pub struct SpectralGrid {
    n_points: usize,
    length: f64,
    dx: f64,
    x_values: Vec<f64>,
    q_values: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n_points", &self.n_points)
            .field("length", &self.length)
            .field("dx", &self.dx)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n_points == other.n_points && self.length == other.length
    }
}

impl SpectralGrid {
    /// Builds a grid of `n_points` samples spanning `length` (in units of 1/q_c).
    ///
    /// Points run from −L/2 inclusive to L/2 exclusive, so x̄ = 0 is always a
    /// grid point when `n_points` is even.
    pub fn new(n_points: usize, length: f64) -> Result<Self, GridError> {
        if n_points < MIN_POINTS {
            return Err(GridError::TooFewPoints(n_points));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(GridError::BadLength(length));
        }
        let dx = length / n_points as f64;
        let x_values = (0..n_points)
            .map(|j| -0.5 * length + j as f64 * dx)
            .collect();
        let q_values = (0..n_points)
            .map(|k| 2.0 * PI * signed_index(k, n_points) as f64 / length)
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_points);
        let inverse = planner.plan_fft_inverse(n_points);
        Ok(Self {
            n_points,
            length,
            dx,
            x_values,
            q_values,
            forward,
            inverse,
            scale: 1.0 / (n_points as f64).sqrt(),
        })
    }

    /// The default production grid: 1024 points over sixteen critical wavelengths.
    pub fn reference() -> Self {
        Self::new(1024, DEFAULT_LENGTH).expect("reference grid is valid")
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x_values(&self) -> &[f64] {
        &self.x_values
    }

    /// Wavenumbers in FFT order: 0, 1, …, N/2−1, −N/2, …, −1 (times 2π/L).
    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    /// Largest resolvable |q̄|, equal to π/dx.
    pub fn q_max(&self) -> f64 {
        PI / self.dx
    }

    /// Index of the spectral bin holding wavenumber `q`, if `q` sits on the grid.
    pub fn bin_of(&self, q: f64) -> Option<usize> {
        let k = q * self.length / (2.0 * PI);
        let kr = k.round();
        if (k - kr).abs() > 1e-9 {
            return None;
        }
        let kr = kr as i64;
        let n = self.n_points as i64;
        if kr < -(n / 2) || kr >= n - n / 2 {
            return None;
        }
        Some(kr.rem_euclid(n) as usize)
    }

    fn check_len(&self, len: usize) -> Result<(), GridError> {
        if len != self.n_points {
            return Err(GridError::LengthMismatch {
                expected: self.n_points,
                got: len,
            });
        }
        Ok(())
    }

    pub fn to_spectrum(&self, field: &[Complex64]) -> Result<Vec<Complex64>, GridError> {
        self.check_len(field.len())?;
        let mut out = field.to_vec();
        self.forward_in_place(&mut out);
        Ok(out)
    }

    pub fn from_spectrum(&self, spectrum: &[Complex64]) -> Result<Vec<Complex64>, GridError> {
        self.check_len(spectrum.len())?;
        let mut out = spectrum.to_vec();
        self.inverse_in_place(&mut out);
        Ok(out)
    }

    /// Unitary forward transform in place. Panics on a length mismatch.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
        for v in buf.iter_mut() {
            *v *= self.scale;
        }
    }

    /// Unitary inverse transform in place. Panics on a length mismatch.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        for v in buf.iter_mut() {
            *v *= self.scale;
        }
    }

    /// Forward transform without the 1/√N factor, for callers that fold the
    /// normalisation into a multiplier they apply anyway.
    pub(crate) fn forward_raw(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
    }

    pub(crate) fn inverse_raw(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, scratch);
    }

    pub(crate) fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    /// ∑|f_j|²·dx.
    pub fn norm_sqr(&self, field: &[Complex64]) -> f64 {
        field.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx
    }

    /// Integral of a real profile over the window.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.dx
    }

    /// Maps `x` into the window [−L/2, L/2).
    pub fn wrap(&self, x: f64) -> f64 {
        (x + 0.5 * self.length).rem_euclid(self.length) - 0.5 * self.length
    }
}

fn signed_index(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}
