//! Discrete Fourier transforms on the uniform parameter grid.
//!
//! Radix-2 Cooley-Tukey when the grid size is a power of two, direct
//! summation otherwise. Grid sizes here stay in the hundreds, so the
//! direct path is an acceptable fallback for any even size.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// Unnormalized DFT bins: `X_k = sum_j x_j e^{-2 pi i j k / n}`.
pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    if n.is_power_of_two() {
        let mut buf = x.to_vec();
        radix2(&mut buf, -1.0);
        buf
    } else {
        direct(x, -1.0)
    }
}

/// Unnormalized inverse bins: `x_j = sum_k X_k e^{+2 pi i j k / n}` (no 1/n).
pub fn idft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    if n.is_power_of_two() {
        let mut buf = x.to_vec();
        radix2(&mut buf, 1.0);
        buf
    } else {
        direct(x, 1.0)
    }
}

fn direct(x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            (0..n)
                .map(|j| {
                    let angle = sign * TAU * (j as f64) * (k as f64) / (n as f64);
                    x[j] * Complex64::new(angle.cos(), angle.sin())
                })
                .sum()
        })
        .collect()
}

fn radix2(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    let levels = n.trailing_zeros();

    // Bit-reversal permutation.
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - levels);
        if j > i {
            buf.swap(i, j);
        }
    }

    let mut size = 2;
    while size <= n {
        let half = size / 2;
        let step = TAU / size as f64;
        for start in (0..n).step_by(size) {
            for k in 0..half {
                let angle = sign * step * k as f64;
                let w = Complex64::new(angle.cos(), angle.sin());
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        size *= 2;
    }
}

/// Forward transform to centered coefficients: entry `k` is the coefficient
/// of `e^{i n theta}` with `n = k - n_len/2`, normalized by `1/n_len`.
pub fn to_centered_coeffs(samples: &[Complex64]) -> Vec<Complex64> {
    let n = samples.len();
    debug_assert!(n % 2 == 0, "grid size must be even");
    let bins = dft(samples);
    let scale = 1.0 / n as f64;
    (0..n).map(|k| bins[(k + n / 2) % n] * scale).collect()
}

/// Inverse of [`to_centered_coeffs`]: reconstruct samples on the grid.
pub fn from_centered_coeffs(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    debug_assert!(n % 2 == 0, "grid size must be even");
    let bins: Vec<Complex64> = (0..n).map(|k| coeffs[(k + n / 2) % n]).collect();
    idft(&bins)
}

/// Evaluate the trigonometric polynomial with centered coefficients at an
/// arbitrary parameter value.
pub fn eval_centered(coeffs: &[Complex64], theta: f64) -> Complex64 {
    let n = coeffs.len() as i64;
    coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let mode = k as i64 - n / 2;
            let angle = mode as f64 * theta;
            c * Complex64::new(angle.cos(), angle.sin())
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::c64;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|j| TAU * j as f64 / n as f64).collect()
    }

    #[test]
    fn single_mode_roundtrip() {
        for &n in &[8usize, 64, 6, 10] {
            let thetas = grid(n);
            let samples: Vec<Complex64> = thetas
                .iter()
                .map(|&t| Complex64::new((2.0 * t).cos(), (2.0 * t).sin()))
                .collect();
            let coeffs = to_centered_coeffs(&samples);
            // e^{2 i theta} has a single centered coefficient at n = 2.
            for (k, &c) in coeffs.iter().enumerate() {
                let mode = k as i64 - n as i64 / 2;
                let expect = if mode == 2 { 1.0 } else { 0.0 };
                assert!((c - c64(expect, 0.0)).norm() < 1e-12, "mode {mode}: {c}");
            }
            let back = from_centered_coeffs(&coeffs);
            for (a, b) in back.iter().zip(&samples) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn matches_direct_on_power_of_two() {
        let n = 16;
        let x: Vec<Complex64> = (0..n)
            .map(|j| c64((j as f64).sin(), (j as f64 * 0.7).cos()))
            .collect();
        let fast = dft(&x);
        let slow = direct(&x, -1.0);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn eval_matches_grid() {
        let n = 32;
        let thetas = grid(n);
        let samples: Vec<Complex64> = thetas
            .iter()
            .map(|&t| c64(t.cos() + (3.0 * t).cos(), (2.0 * t).sin()))
            .collect();
        let coeffs = to_centered_coeffs(&samples);
        for (j, &t) in thetas.iter().enumerate() {
            assert!((eval_centered(&coeffs, t) - samples[j]).norm() < 1e-11);
        }
    }
}
