//! Periodic complex-valued functions on a sampled contour.
//!
//! Functions live in parameter space: a [`SampledFunction`] holds node values
//! `f_j = f(t_j)`, a [`FourierRep`] the centered trigonometric coefficients
//! `c_n`, `n = -N/2 .. N/2 - 1`. Interpolation is always trigonometric, so
//! band-limited data is handled exactly.

use crate::error::{Error, Result};
use crate::fft;
use crate::geometry::{GridSampling, ShiftMap};
use num_complex::Complex64;
use std::sync::Arc;

/// Pointwise divisions fail when the denominator magnitude drops below this.
pub const TOL_DIV: f64 = 1e-8;
/// Relative tail mass below which a function counts as band-limited.
pub const TOL_BAND: f64 = 1e-10;

/// Node values of a function on a grid.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    pub grid: Arc<GridSampling>,
    pub values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(grid: Arc<GridSampling>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::GridMismatch);
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::NonFinite {
                context: "sampled function values".into(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Sample a function of the contour point `t`.
    pub fn from_fn(grid: &Arc<GridSampling>, f: impl Fn(Complex64) -> Complex64) -> Self {
        let values = grid.nodes.iter().map(|&t| f(t)).collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn constant(grid: &Arc<GridSampling>, value: Complex64) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![value; grid.n],
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a * b)
    }

    /// Pointwise quotient; fails loudly near a vanishing denominator.
    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        if !GridSampling::same_grid(&self.grid, &rhs.grid) {
            return Err(Error::GridMismatch);
        }
        let scale = rhs.max_abs().max(f64::MIN_POSITIVE);
        if let Some(v) = rhs.values.iter().find(|v| v.norm() < TOL_DIV * scale) {
            return Err(Error::DivisionByZero {
                magnitude: v.norm(),
            });
        }
        self.zip_with(rhs, |a, b| a / b)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| s * v).collect(),
        }
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if !GridSampling::same_grid(&self.grid, &rhs.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Discrete 2-norm `sqrt(sum |f_j|^2 w)`.
    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.weight).sqrt()
    }
}

/// Centered trigonometric coefficients of a sampled function.
#[derive(Debug, Clone)]
pub struct FourierRep {
    pub grid: Arc<GridSampling>,
    /// Entry `k` is the coefficient of `e^{i n theta}`, `n = k - N/2`.
    pub coeffs: Vec<Complex64>,
    /// Relative l1 mass of the modes `|n| >= N/4`.
    pub tail_mass: f64,
    pub band_limited: bool,
}

/// Forward transform of a sampled function.
pub fn to_fourier(f: &SampledFunction) -> FourierRep {
    let coeffs = fft::to_centered_coeffs(&f.values);
    let n = coeffs.len() as i64;
    let total: f64 = coeffs.iter().map(|c| c.norm()).sum();
    let tail: f64 = coeffs
        .iter()
        .enumerate()
        .filter(|(k, _)| (*k as i64 - n / 2).abs() >= n / 4)
        .map(|(_, c)| c.norm())
        .sum();
    let tail_mass = if total > 0.0 { tail / total } else { 0.0 };
    FourierRep {
        grid: Arc::clone(&f.grid),
        coeffs,
        tail_mass,
        band_limited: tail_mass < TOL_BAND,
    }
}

/// Reconstruct node values from coefficients.
pub fn from_fourier(f: &FourierRep) -> SampledFunction {
    SampledFunction {
        grid: Arc::clone(&f.grid),
        values: fft::from_centered_coeffs(&f.coeffs),
    }
}

/// Spectral differentiation: multiply mode `n` by `i n`.
///
/// The asymmetric `n = -N/2` mode is zeroed so that differentiation maps real
/// data to real data.
pub fn differentiate(f: &FourierRep) -> FourierRep {
    let n = f.coeffs.len() as i64;
    let coeffs: Vec<Complex64> = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let mode = k as i64 - n / 2;
            if mode == -n / 2 {
                Complex64::default()
            } else {
                c * Complex64::new(0.0, mode as f64)
            }
        })
        .collect();
    FourierRep {
        grid: Arc::clone(&f.grid),
        coeffs,
        tail_mass: f.tail_mass,
        band_limited: f.band_limited,
    }
}

/// Evaluate the trigonometric interpolant at arbitrary parameters.
pub fn resample(f: &FourierRep, points: &[f64]) -> Vec<Complex64> {
    points
        .iter()
        .map(|&theta| fft::eval_centered(&f.coeffs, theta))
        .collect()
}

/// Samples of `f(alpha(t))` on the grid.
///
/// When the parameter map permutes the grid the composition is an exact
/// permutation; otherwise the band-limited interpolant is evaluated at the
/// shifted parameters.
pub fn compose_shift(f: &SampledFunction, shift: &ShiftMap) -> Result<SampledFunction> {
    if !GridSampling::same_grid(&f.grid, &shift.grid) {
        return Err(Error::GridMismatch);
    }
    let values = match &shift.permutation {
        Some(perm) => perm.iter().map(|&k| f.values[k]).collect(),
        None => {
            let rep = to_fourier(f);
            resample(&rep, &shift.sigma)
        }
    };
    SampledFunction::new(Arc::clone(&f.grid), values)
}

/// Largest `|n|` with a coefficient above `rel_tol` times the peak.
pub fn numerical_degree(f: &FourierRep, rel_tol: f64) -> usize {
    let peak = f.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0;
    }
    let n = f.coeffs.len() as i64;
    f.coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > rel_tol * peak)
        .map(|(k, _)| (k as i64 - n / 2).unsigned_abs() as usize)
        .max()
        .unwrap_or(0)
}
