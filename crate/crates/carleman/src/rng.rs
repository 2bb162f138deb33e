//! Deterministic pseudo-random draws for verification suites and tests.
//!
//! SplitMix64: tiny, portable, and reproducible across platforms, which keeps
//! report output stable for a fixed problem and seed.

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `[-1, 1)`.
    pub fn next_signed(&mut self) -> f64 {
        2.0 * self.next_f64() - 1.0
    }

    pub fn next_complex(&mut self) -> Complex64 {
        Complex64::new(self.next_signed(), self.next_signed())
    }

    /// Centered coefficients of a random trigonometric polynomial of the
    /// given degree on an `n`-point grid.
    pub fn band_limited_coeffs(&mut self, n: usize, degree: usize) -> Vec<Complex64> {
        let half = n as i64 / 2;
        (0..n)
            .map(|k| {
                let mode = k as i64 - half;
                if mode.unsigned_abs() as usize <= degree {
                    self.next_complex()
                } else {
                    Complex64::default()
                }
            })
            .collect()
    }
}
