//! Closed contours and Carleman shifts.
//!
//! Contours are smooth closed curves given by a finite Fourier series
//! `z(theta) = sum_n z_n e^{i n theta}` on `[0, 2 pi)`. A Carleman shift is a
//! homeomorphism `alpha` of the contour onto itself with `alpha(alpha(t)) = t`,
//! represented by its parameter map `sigma`, so that
//! `alpha(z(theta)) = z(sigma(theta))`.
//!
//! Contours built from finite Fourier series are infinitely smooth, so the
//! Lyapunov regularity required by the underlying theory holds automatically;
//! it is not checked numerically.

use crate::error::{Error, Result};
use crate::fft;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

/// Relative tolerance (times contour diameter) for the shift involution check.
pub const TOL_SHIFT: f64 = 1e-10;
/// Tolerance for degenerate tangents and coinciding nodes.
pub const TOL_GEOM: f64 = 1e-12;

/// A smooth closed curve parametrized over `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Contour {
    UnitCircle,
    /// Finite Fourier series; entry `k` of `coeffs` is the coefficient of
    /// `e^{i n theta}` with `n = k - floor(len/2)`.
    Fourier {
        coeffs: Vec<Complex64>,
    },
}

impl Contour {
    /// Ellipse `z(theta) = a cos(theta) + i b sin(theta)`.
    pub fn ellipse(a: f64, b: f64) -> Self {
        let plus = Complex64::new((a + b) / 2.0, 0.0);
        let minus = Complex64::new((a - b) / 2.0, 0.0);
        Contour::Fourier {
            coeffs: vec![minus, Complex64::default(), plus],
        }
    }

    pub fn is_unit_circle(&self) -> bool {
        matches!(self, Contour::UnitCircle)
    }

    fn modes(&self) -> Vec<(i64, Complex64)> {
        match self {
            Contour::UnitCircle => vec![(1, Complex64::new(1.0, 0.0))],
            Contour::Fourier { coeffs } => {
                let offset = (coeffs.len() / 2) as i64;
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| (k as i64 - offset, c))
                    .collect()
            }
        }
    }

    /// Point `z(theta)`.
    pub fn point(&self, theta: f64) -> Complex64 {
        self.modes()
            .iter()
            .map(|&(n, c)| c * rotor(n as f64 * theta))
            .sum()
    }

    /// Parameter derivative `z'(theta)`.
    pub fn tangent(&self, theta: f64) -> Complex64 {
        self.modes()
            .iter()
            .map(|&(n, c)| c * Complex64::new(0.0, n as f64) * rotor(n as f64 * theta))
            .sum()
    }

    pub fn coeffs_finite(&self) -> bool {
        self.modes()
            .iter()
            .all(|(_, c)| c.re.is_finite() && c.im.is_finite())
    }
}

#[inline]
fn rotor(angle: f64) -> Complex64 {
    Complex64::new(angle.cos(), angle.sin())
}

/// Equispaced sampling of a contour: nodes, tangents and trapezoid weights.
#[derive(Debug, Clone)]
pub struct GridSampling {
    pub contour: Contour,
    /// Node count; even, at least 8.
    pub n: usize,
    /// Parameters `theta_j = 2 pi j / n`.
    pub thetas: Vec<f64>,
    /// Node values `t_j = z(theta_j)`.
    pub nodes: Vec<Complex64>,
    /// Tangents `z'(theta_j)`.
    pub tangents: Vec<Complex64>,
    /// Common quadrature weight `2 pi / n`.
    pub weight: f64,
    /// Largest pairwise node distance.
    pub diameter: f64,
}

impl GridSampling {
    pub fn same_grid(a: &Arc<GridSampling>, b: &Arc<GridSampling>) -> bool {
        Arc::ptr_eq(a, b) || (a.n == b.n && a.nodes == b.nodes)
    }
}

/// Sample a contour at `n` equispaced parameters.
pub fn contour_sample(contour: &Contour, n: usize) -> Result<Arc<GridSampling>> {
    if n < 8 || n % 2 != 0 {
        return Err(Error::Resolution {
            detail: format!("grid size must be even and at least 8, got {n}"),
        });
    }
    if !contour.coeffs_finite() {
        return Err(Error::NonFinite {
            context: "contour coefficients".into(),
        });
    }
    let thetas: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
    let nodes: Vec<Complex64> = thetas.iter().map(|&t| contour.point(t)).collect();
    let tangents: Vec<Complex64> = thetas.iter().map(|&t| contour.tangent(t)).collect();

    for (j, tau) in tangents.iter().enumerate() {
        if tau.norm() < TOL_GEOM {
            return Err(Error::DegenerateParametrization {
                index: j,
                magnitude: tau.norm(),
                tol: TOL_GEOM,
            });
        }
    }

    let mut diameter: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (nodes[i] - nodes[j]).norm();
            if d < TOL_GEOM {
                return Err(Error::SelfIntersection {
                    i,
                    j,
                    tol: TOL_GEOM,
                });
            }
            diameter = diameter.max(d);
        }
    }

    Ok(Arc::new(GridSampling {
        contour: contour.clone(),
        n,
        thetas,
        nodes,
        tangents,
        weight: TAU / n as f64,
        diameter,
    }))
}

/// Orientation behaviour of a shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Preserving,
    Reversing,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Preserving => 1.0,
            Orientation::Reversing => -1.0,
        }
    }

    pub fn gamma(self) -> i8 {
        match self {
            Orientation::Preserving => 1,
            Orientation::Reversing => -1,
        }
    }
}

/// How a shift is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum ShiftKind {
    /// `sigma(theta) = theta`.
    Identity,
    /// `sigma(theta) = theta + pi`.
    Antipodal,
    /// `sigma(theta) = c - theta`.
    Reflection { c: f64 },
    /// Arbitrary parameter-map samples `sigma(theta_j)`, one per grid node.
    Custom { sigma_samples: Vec<f64> },
}

enum SigmaFn {
    Identity,
    Antipodal,
    Reflection {
        c: f64,
    },
    /// Periodic part of the lift, as centered Fourier coefficients, plus the
    /// winding slope: `sigma(theta) = gamma * theta + p(theta)`.
    Sampled {
        periodic: Vec<Complex64>,
        gamma: f64,
    },
}

impl SigmaFn {
    fn at(&self, theta: f64) -> f64 {
        match self {
            SigmaFn::Identity => theta,
            SigmaFn::Antipodal => theta + PI,
            SigmaFn::Reflection { c } => c - theta,
            SigmaFn::Sampled { periodic, gamma } => {
                gamma * theta + fft::eval_centered(periodic, theta).re
            }
        }
    }

    fn slope_at(&self, theta: f64, deriv: &[Complex64]) -> f64 {
        match self {
            SigmaFn::Identity | SigmaFn::Antipodal => 1.0,
            SigmaFn::Reflection { .. } => -1.0,
            SigmaFn::Sampled { gamma, .. } => gamma + fft::eval_centered(deriv, theta).re,
        }
    }
}

/// A validated Carleman shift sampled on a grid.
pub struct ShiftMap {
    pub grid: Arc<GridSampling>,
    pub kind: ShiftKind,
    pub orientation: Orientation,
    /// `sigma(theta_j)` reduced to `[0, 2 pi)`.
    pub sigma: Vec<f64>,
    /// `alpha(t_j) = z(sigma(theta_j))`.
    pub alpha_nodes: Vec<Complex64>,
    /// `alpha'(t_j) = z'(sigma(theta_j)) sigma'(theta_j) / z'(theta_j)`.
    pub alpha_deriv: Vec<Complex64>,
    /// When `sigma` maps the grid onto itself: `sigma(theta_j) = theta_{perm[j]}`.
    pub permutation: Option<Vec<usize>>,
    sigma_fn: SigmaFn,
}

impl std::fmt::Debug for ShiftMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ShiftMap")
            .field("kind", &self.kind)
            .field("orientation", &self.orientation)
            .field("grid_aligned", &self.permutation.is_some())
            .finish()
    }
}

impl ShiftMap {
    pub fn gamma(&self) -> f64 {
        self.orientation.sign()
    }

    /// Evaluate the parameter map at arbitrary parameters.
    pub fn sigma_at(&self, theta: f64) -> f64 {
        self.sigma_fn.at(theta).rem_euclid(TAU)
    }
}

fn wrap_to_pi(x: f64) -> f64 {
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

/// Build and validate a shift on a grid.
///
/// Built-in kinds are exact; custom parameter maps are checked for the
/// involution property, strict monotonicity and a nonvanishing derivative,
/// and any failure is an error.
pub fn induce_shift(grid: &Arc<GridSampling>, kind: &ShiftKind) -> Result<ShiftMap> {
    let n = grid.n;
    let h = TAU / n as f64;

    let sigma_raw: Vec<f64> = match kind {
        ShiftKind::Identity => grid.thetas.clone(),
        ShiftKind::Antipodal => grid.thetas.iter().map(|&t| t + PI).collect(),
        ShiftKind::Reflection { c } => grid.thetas.iter().map(|&t| c - t).collect(),
        ShiftKind::Custom { sigma_samples } => {
            if sigma_samples.len() != n {
                return Err(Error::Schema {
                    pointer: "/shift/sigma_samples".into(),
                    detail: format!("expected {n} samples, got {}", sigma_samples.len()),
                });
            }
            if sigma_samples.iter().any(|s| !s.is_finite()) {
                return Err(Error::NonFinite {
                    context: "shift samples".into(),
                });
            }
            sigma_samples.clone()
        }
    };
    let sigma: Vec<f64> = sigma_raw.iter().map(|s| s.rem_euclid(TAU)).collect();

    // Orientation from the winding of the lift; monotonicity from its steps.
    let mut increments = Vec::with_capacity(n);
    for j in 0..n {
        increments.push(wrap_to_pi(sigma[(j + 1) % n] - sigma[j]));
    }
    let total: f64 = increments.iter().sum();
    let winding = (total / TAU).round();
    if (total / TAU - winding).abs() > 1e-8 || winding.abs() != 1.0 {
        return Err(Error::NonMonotoneShift);
    }
    let orientation = if winding > 0.0 {
        Orientation::Preserving
    } else {
        Orientation::Reversing
    };
    let gamma = orientation.sign();
    if increments.iter().any(|&d| d * gamma <= 0.0) {
        return Err(Error::NonMonotoneShift);
    }

    // Grid alignment: sigma(theta_j) lands on a node for every j.
    let align_tol = 1e-9;
    let mut permutation = Some(Vec::with_capacity(n));
    for &s in &sigma {
        let k = (s / h).round();
        if (s - k * h).abs() < align_tol {
            if let Some(p) = permutation.as_mut() {
                p.push((k as usize) % n);
            }
        } else {
            permutation = None;
            break;
        }
    }

    // Periodic part of the lift, for off-grid evaluation of custom maps.
    let sigma_fn = match kind {
        ShiftKind::Identity => SigmaFn::Identity,
        ShiftKind::Antipodal => SigmaFn::Antipodal,
        ShiftKind::Reflection { c } => SigmaFn::Reflection { c: *c },
        ShiftKind::Custom { .. } => {
            let mut lift = Vec::with_capacity(n);
            let mut acc = sigma[0];
            lift.push(acc);
            for j in 0..n - 1 {
                acc += increments[j];
                lift.push(acc);
            }
            let periodic_samples: Vec<Complex64> = lift
                .iter()
                .zip(&grid.thetas)
                .map(|(&l, &t)| Complex64::new(l - gamma * t, 0.0))
                .collect();
            SigmaFn::Sampled {
                periodic: fft::to_centered_coeffs(&periodic_samples),
                gamma,
            }
        }
    };
    let sigma_slope_coeffs = match &sigma_fn {
        SigmaFn::Sampled { periodic, .. } => differentiate_coeffs(periodic),
        _ => Vec::new(),
    };

    // Involution: alpha(alpha(t_j)) must return to t_j.
    let tol = TOL_SHIFT * grid.diameter.max(f64::MIN_POSITIVE);
    let mut max_deviation: f64 = 0.0;
    for j in 0..n {
        let twice = match &permutation {
            Some(p) => grid.thetas[p[p[j]]],
            None => sigma_fn.at(sigma_fn.at(grid.thetas[j])),
        };
        let deviation = (grid.contour.point(twice) - grid.nodes[j]).norm();
        max_deviation = max_deviation.max(deviation);
    }
    if max_deviation > tol {
        return Err(Error::InvolutionViolation { max_deviation, tol });
    }

    // Sampled alpha and its derivative along the contour.
    let mut alpha_nodes = Vec::with_capacity(n);
    let mut alpha_deriv = Vec::with_capacity(n);
    for j in 0..n {
        let s = sigma[j];
        alpha_nodes.push(grid.contour.point(s));
        let slope = sigma_fn.slope_at(grid.thetas[j], &sigma_slope_coeffs);
        let deriv = grid.contour.tangent(s) * slope / grid.tangents[j];
        alpha_deriv.push(deriv);
    }
    for (j, d) in alpha_deriv.iter().enumerate() {
        if d.norm() < TOL_GEOM {
            return Err(Error::ZeroShiftDerivative {
                index: j,
                magnitude: d.norm(),
            });
        }
    }

    Ok(ShiftMap {
        grid: Arc::clone(grid),
        kind: kind.clone(),
        orientation,
        sigma,
        alpha_nodes,
        alpha_deriv,
        permutation,
        sigma_fn,
    })
}

fn differentiate_coeffs(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() as i64;
    coeffs
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
        .collect()
}
