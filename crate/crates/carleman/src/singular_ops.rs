//! Discretizations of the Cauchy singular operator and its companions.
//!
//! Operators come in two shapes. A [`SampleOperator`] maps node values to
//! node values (an `N x N` matrix); these compose, so assembled equations are
//! products and sums of them. An [`OperatorMatrix`] is the rectangular
//! trial-to-collocation discretization used for rank analysis: columns are
//! parameter-space Laurent modes `e^{i n theta}`, `n = -m .. m`, rows are the
//! `N` grid nodes, and tall shapes (`N >= 4 m`) keep kernel and cokernel
//! detection meaningful.
//!
//! The principal-value integral is discretized by the subtraction trick: for
//! a smooth closed contour, `(1/(pi i)) PV int 1/(tau - t) dtau = 1`, so
//!
//! ```text
//! (S f)(t) = (1/(pi i)) int (f(tau) - f(t)) / (tau - t) dtau + f(t)
//! ```
//!
//! with a smooth integrand whose diagonal value is the contour derivative of
//! `f`. Trapezoid quadrature then converges spectrally, and the diagonal uses
//! the trigonometric differentiation matrix rather than a finite-difference
//! stencil.

use crate::error::{Error, Result};
use crate::funcspace::SampledFunction;
use crate::geometry::{GridSampling, ShiftMap};
use crate::matrix::{c64, CMatrix};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Discretization flavour of the Cauchy operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CauchyMode {
    /// Exact Laurent-mode multiplier; unit circle only.
    SpectralCircle,
    /// Subtracted trapezoid quadrature; any smooth contour.
    Nystrom,
}

/// A node-values-to-node-values operator on one grid.
#[derive(Debug, Clone)]
pub struct SampleOperator {
    pub grid: Arc<GridSampling>,
    pub matrix: CMatrix,
}

impl SampleOperator {
    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        if !GridSampling::same_grid(&self.grid, &f.grid) {
            return Err(Error::GridMismatch);
        }
        SampledFunction::new(Arc::clone(&self.grid), self.matrix.matvec(&f.values))
    }

    pub fn compose(&self, rhs: &SampleOperator) -> SampleOperator {
        SampleOperator {
            grid: Arc::clone(&self.grid),
            matrix: self.matrix.mul(&rhs.matrix),
        }
    }
}

/// Column basis of a rectangular discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialBasis {
    /// Laurent modes `n = -m .. m` in the parameter; `2 m + 1` columns
    /// (doubled for 2x2 systems).
    Laurent { m: usize },
    /// Node values; used for operators that act on collocation data.
    Nodal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockStructure {
    Scalar,
    System,
}

/// Rectangular trial-to-collocation discretization.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub grid: Arc<GridSampling>,
    pub matrix: CMatrix,
    pub trial: TrialBasis,
    pub block: BlockStructure,
}

impl OperatorMatrix {
    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }
}

/// Trial evaluation matrix `E[j, c] = e^{i n theta_j}`, `n = c - m`.
pub fn evaluation_matrix(grid: &GridSampling, m: usize) -> CMatrix {
    CMatrix::from_fn(grid.n, 2 * m + 1, |j, c| {
        let n = c as i64 - m as i64;
        let angle = n as f64 * grid.thetas[j];
        c64(angle.cos(), angle.sin())
    })
}

fn check_resolution(grid: &GridSampling, m: usize) -> Result<()> {
    if grid.n < 4 * m {
        return Err(Error::Resolution {
            detail: format!(
                "collocation count {} is below 4 x {} trial modes",
                grid.n, m
            ),
        });
    }
    Ok(())
}

/// Trigonometric differentiation matrix on the uniform grid (even `N`).
fn differentiation_matrix(grid: &GridSampling) -> CMatrix {
    let n = grid.n;
    let h = grid.weight;
    CMatrix::from_fn(n, n, |j, k| {
        if j == k {
            Complex64::default()
        } else {
            let sign = if (j + n - k) % 2 == 0 { 1.0 } else { -1.0 };
            let arg = (j as f64 - k as f64) * h / 2.0;
            c64(0.5 * sign / arg.tan(), 0.0)
        }
    })
}

/// Shared core of the Cauchy-type quadratures.
///
/// Discretizes `f -> (1/(pi i)) int w(tau) f(tau) / (beta(tau) - beta(t)) dtau`
/// by subtraction, where `beta` maps the contour onto itself and `pv` is the
/// value of `(1/(pi i)) int w(tau) / (beta(tau) - beta(t)) dtau`.
fn singular_quadrature(
    grid: &Arc<GridSampling>,
    beta: &[Complex64],
    weight_fn: &[Complex64],
    pv: Complex64,
) -> SampleOperator {
    let n = grid.n;
    let h = grid.weight;
    let inv_pi_i = 1.0 / c64(0.0, PI);
    let diff = differentiation_matrix(grid);

    let mut m = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut row_sum = Complex64::default();
        for k in 0..n {
            if k == j {
                continue;
            }
            let coeff = inv_pi_i * h * grid.tangents[k] * weight_fn[k] / (beta[k] - beta[j]);
            m[(j, k)] = coeff;
            row_sum += coeff;
        }
        // Subtracted diagonal: quadrature of the smooth integrand picks up
        // the parameter derivative at the node, and the principal value adds
        // `pv * f(t_j)`.
        m[(j, j)] = pv - row_sum;
        for k in 0..n {
            m[(j, k)] += inv_pi_i * h * diff[(j, k)];
        }
    }
    SampleOperator {
        grid: Arc::clone(grid),
        matrix: m,
    }
}

/// The Cauchy singular operator `S` on node values.
pub fn cauchy_sample(grid: &Arc<GridSampling>, mode: CauchyMode) -> Result<SampleOperator> {
    match mode {
        CauchyMode::Nystrom => {
            let ones = vec![c64(1.0, 0.0); grid.n];
            Ok(singular_quadrature(grid, &grid.nodes, &ones, c64(1.0, 0.0)))
        }
        CauchyMode::SpectralCircle => {
            if !grid.contour.is_unit_circle() {
                return Err(Error::ModeMismatch);
            }
            // S multiplies mode n by +1 (n >= 0) and -1 (n < 0); in sample
            // space the matrix depends only on the node offset.
            let n = grid.n;
            let half = n as i64 / 2;
            let mut kernel = Vec::with_capacity(n);
            for d in 0..n {
                let x = d as f64 * grid.weight;
                let mut acc = Complex64::default();
                for mode in -half..half {
                    let sign = if mode >= 0 { 1.0 } else { -1.0 };
                    let angle = mode as f64 * x;
                    acc += c64(sign * angle.cos(), sign * angle.sin());
                }
                kernel.push(acc / n as f64);
            }
            let matrix = CMatrix::from_fn(n, n, |j, k| kernel[(j + n - k) % n]);
            Ok(SampleOperator {
                grid: Arc::clone(grid),
                matrix,
            })
        }
    }
}

/// The shift-conjugated singular operator
/// `f -> (1/(pi i)) int alpha'(tau) f(tau) / (alpha(tau) - alpha(t)) dtau`.
///
/// Substituting `s = alpha(tau)` shows this equals `gamma W S W` with `W` the
/// shift composition, which is how the principal value `gamma` arises.
pub fn shifted_cauchy_sample(grid: &Arc<GridSampling>, shift: &ShiftMap) -> Result<SampleOperator> {
    if !GridSampling::same_grid(grid, &shift.grid) {
        return Err(Error::GridMismatch);
    }
    Ok(singular_quadrature(
        grid,
        &shift.alpha_nodes,
        &shift.alpha_deriv,
        c64(shift.gamma(), 0.0),
    ))
}

/// The composition operator `(W f)(t) = f(alpha(t))` on node values.
pub fn composition_sample(shift: &ShiftMap) -> SampleOperator {
    let grid = &shift.grid;
    let n = grid.n;
    let matrix = match &shift.permutation {
        Some(perm) => CMatrix::from_fn(n, n, |j, k| {
            if perm[j] == k {
                c64(1.0, 0.0)
            } else {
                Complex64::default()
            }
        }),
        None => CMatrix::from_fn(n, n, |j, k| {
            dirichlet_kernel(n, shift.sigma[j] - grid.thetas[k])
        }),
    };
    SampleOperator {
        grid: Arc::clone(grid),
        matrix,
    }
}

/// Cardinal interpolation weight `(1/N) sum_{n=-N/2}^{N/2-1} e^{i n x}`.
fn dirichlet_kernel(n: usize, x: f64) -> Complex64 {
    let tau = std::f64::consts::TAU;
    let wrapped = x.rem_euclid(tau);
    let dist = wrapped.min(tau - wrapped);
    if dist < 1e-13 {
        return c64(1.0, 0.0);
    }
    let nf = n as f64;
    let num = c64((nf * x).cos(), (nf * x).sin()) - 1.0;
    let den = c64(x.cos(), x.sin()) - 1.0;
    let phase = c64((-nf / 2.0 * x).cos(), (-nf / 2.0 * x).sin());
    phase * num / den / nf
}

/// Quadrature matrix of a regular kernel: entries `k(j, i) z'(theta_i) w`.
pub fn kernel_matrix(
    grid: &Arc<GridSampling>,
    mut k: impl FnMut(usize, usize) -> Result<Complex64>,
) -> Result<SampleOperator> {
    let n = grid.n;
    let h = grid.weight;
    let mut m = CMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let value = k(j, i).map_err(|e| Error::KernelEvaluation {
                row: j,
                col: i,
                source: Box::new(e),
            })?;
            if !value.re.is_finite() || !value.im.is_finite() {
                return Err(Error::KernelEvaluation {
                    row: j,
                    col: i,
                    source: Box::new(Error::NonFinite {
                        context: "kernel value".into(),
                    }),
                });
            }
            m[(j, i)] = value * grid.tangents[i] * h;
        }
    }
    Ok(SampleOperator {
        grid: Arc::clone(grid),
        matrix: m,
    })
}

/// Smooth-kernel integral operator `f -> int K(t, tau) f(tau) dtau`.
pub fn integral_sample(
    kernel: &crate::exprparse::Expr,
    grid: &Arc<GridSampling>,
) -> Result<SampleOperator> {
    kernel_matrix(grid, |j, i| {
        kernel.evaluate(grid.nodes[j], Some(grid.nodes[i]))
    })
}

/// Identity on node values.
pub fn identity_sample(grid: &Arc<GridSampling>) -> SampleOperator {
    SampleOperator {
        grid: Arc::clone(grid),
        matrix: CMatrix::identity(grid.n),
    }
}

/// Pointwise multiplication by a sampled function.
pub fn multiplication_sample(f: &SampledFunction) -> SampleOperator {
    let n = f.grid.n;
    let mut m = CMatrix::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = f.values[j];
    }
    SampleOperator {
        grid: Arc::clone(&f.grid),
        matrix: m,
    }
}

/// Plemelj projections `P1 = (I + S)/2` and `Q1 = (I - S)/2`.
pub fn plemelj_projections(s: &SampleOperator) -> (SampleOperator, SampleOperator) {
    let n = s.grid.n;
    let id = CMatrix::identity(n);
    let p = id.add(&s.matrix).scale(c64(0.5, 0.0));
    let q = id.sub(&s.matrix).scale(c64(0.5, 0.0));
    (
        SampleOperator {
            grid: Arc::clone(&s.grid),
            matrix: p,
        },
        SampleOperator {
            grid: Arc::clone(&s.grid),
            matrix: q,
        },
    )
}

/// Boundary values of the piecewise analytic function with jump `phi`:
/// `Phi+ = (phi + S phi)/2`, `Phi- = (S phi - phi)/2`, so that
/// `Phi+ - Phi- = phi` identically.
pub fn cauchy_projections(
    phi: &SampledFunction,
    s: &SampleOperator,
) -> Result<(SampledFunction, SampledFunction)> {
    let s_phi = s.apply(phi)?;
    let plus = s_phi.add(phi)?.scale(c64(0.5, 0.0));
    let minus = s_phi.sub(phi)?.scale(c64(0.5, 0.0));
    Ok((plus, minus))
}

/// Rectangular discretization of `S` on `2 m + 1` Laurent trial modes.
pub fn build_s(grid: &Arc<GridSampling>, mode: CauchyMode, m: usize) -> Result<OperatorMatrix> {
    check_resolution(grid, m)?;
    let sample = cauchy_sample(grid, mode)?;
    let e = evaluation_matrix(grid, m);
    Ok(OperatorMatrix {
        grid: Arc::clone(grid),
        matrix: sample.matrix.mul(&e),
        trial: TrialBasis::Laurent { m },
        block: BlockStructure::Scalar,
    })
}

/// Rectangular discretization of a smooth-kernel integral operator.
pub fn build_integral_op(
    kernel: &crate::exprparse::Expr,
    grid: &Arc<GridSampling>,
    m: usize,
) -> Result<OperatorMatrix> {
    check_resolution(grid, m)?;
    let sample = integral_sample(kernel, grid)?;
    let e = evaluation_matrix(grid, m);
    Ok(OperatorMatrix {
        grid: Arc::clone(grid),
        matrix: sample.matrix.mul(&e),
        trial: TrialBasis::Laurent { m },
        block: BlockStructure::Scalar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprparse::parse;
    use crate::geometry::{contour_sample, induce_shift, Contour, ShiftKind};

    fn circle(n: usize) -> Arc<GridSampling> {
        contour_sample(&Contour::UnitCircle, n).unwrap()
    }

    fn monomial(grid: &Arc<GridSampling>, p: i64) -> SampledFunction {
        SampledFunction::from_fn(grid, |t| t.powi(p as i32))
    }

    fn max_dev(a: &SampledFunction, b: &SampledFunction) -> f64 {
        a.values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn spectral_circle_on_monomials() {
        let grid = circle(32);
        let s = cauchy_sample(&grid, CauchyMode::SpectralCircle).unwrap();
        // t^2 is analytic inside: S t^2 = t^2.
        let f = monomial(&grid, 2);
        assert!(max_dev(&s.apply(&f).unwrap(), &f) < 1e-12);
        // t^{-3} is analytic outside and vanishes at infinity: S t^{-3} = -t^{-3}.
        let g = monomial(&grid, -3);
        let sg = s.apply(&g).unwrap();
        assert!(max_dev(&sg, &g.scale(c64(-1.0, 0.0))) < 1e-12);
    }

    #[test]
    fn nystrom_matches_spectral_on_circle() {
        let grid = circle(64);
        let spec = cauchy_sample(&grid, CauchyMode::SpectralCircle).unwrap();
        let nys = cauchy_sample(&grid, CauchyMode::Nystrom).unwrap();
        for p in [-5i64, -1, 0, 1, 4, 10] {
            let f = monomial(&grid, p);
            let a = spec.apply(&f).unwrap();
            let b = nys.apply(&f).unwrap();
            assert!(max_dev(&a, &b) < 1e-10, "mode {p}");
        }
    }

    #[test]
    fn spectral_mode_rejects_other_contours() {
        let grid = contour_sample(&Contour::ellipse(2.0, 1.0), 32).unwrap();
        match cauchy_sample(&grid, CauchyMode::SpectralCircle) {
            Err(Error::ModeMismatch) => {}
            other => panic!("expected mode mismatch, got {other:?}"),
        }
    }

    #[test]
    fn s_squares_to_identity() {
        // Spectral mode: exact on the whole sample space. Nystrom mode:
        // exact on band-limited inputs, so square against the trial panel.
        let grid = circle(64);
        let s = cauchy_sample(&grid, CauchyMode::SpectralCircle).unwrap();
        let dev = s
            .compose(&s)
            .matrix
            .sub(&CMatrix::identity(grid.n))
            .max_abs();
        assert!(dev < 1e-10, "spectral: {dev}");

        let grid = circle(256);
        let s = cauchy_sample(&grid, CauchyMode::Nystrom).unwrap();
        let e = evaluation_matrix(&grid, 64);
        let residual = s.compose(&s).matrix.mul(&e).sub(&e).max_abs();
        assert!(residual < 1e-8, "nystrom on band-limited panel: {residual}");
    }

    #[test]
    fn projection_algebra() {
        let grid = circle(64);
        let s = cauchy_sample(&grid, CauchyMode::SpectralCircle).unwrap();
        let (p1, q1) = plemelj_projections(&s);
        let id = CMatrix::identity(grid.n);
        assert!(p1.matrix.mul(&p1.matrix).sub(&p1.matrix).max_abs() < 1e-10);
        assert!(q1.matrix.mul(&q1.matrix).sub(&q1.matrix).max_abs() < 1e-10);
        assert!(p1.matrix.mul(&q1.matrix).max_abs() < 1e-10);
        assert!(p1.matrix.add(&q1.matrix).sub(&id).max_abs() < 1e-12);
    }

    #[test]
    fn plemelj_split_examples() {
        let grid = circle(32);
        let s = cauchy_sample(&grid, CauchyMode::SpectralCircle).unwrap();

        // phi = t + 1/t splits into Phi+ = t and Phi- = -1/t.
        let phi = SampledFunction::from_fn(&grid, |t| t + 1.0 / t);
        let (plus, minus) = cauchy_projections(&phi, &s).unwrap();
        assert!(max_dev(&plus, &monomial(&grid, 1)) < 1e-12);
        assert!(max_dev(&minus, &monomial(&grid, -1).scale(c64(-1.0, 0.0))) < 1e-12);
        // Jump relation is algebraic.
        assert!(max_dev(&plus.sub(&minus).unwrap(), &phi) < 1e-12);

        let one = SampledFunction::constant(&grid, c64(1.0, 0.0));
        let (plus, minus) = cauchy_projections(&one, &s).unwrap();
        assert!(max_dev(&plus, &one) < 1e-12);
        assert!(minus.max_abs() < 1e-12);

        let f = monomial(&grid, -2);
        let (plus, minus) = cauchy_projections(&f, &s).unwrap();
        assert!(plus.max_abs() < 1e-12);
        assert!(max_dev(&minus, &f.scale(c64(-1.0, 0.0))) < 1e-12);
    }

    #[test]
    fn nystrom_self_convergence_on_ellipse() {
        // Fixed degree-10 trigonometric polynomial; values at shared nodes of
        // the 128- and 256-point discretizations must agree.
        let contour = Contour::ellipse(2.0, 1.0);
        let coarse = contour_sample(&contour, 128).unwrap();
        let fine = contour_sample(&contour, 256).unwrap();
        let poly = |theta: f64| -> Complex64 {
            let mut acc = Complex64::default();
            for n in -10i64..=10 {
                let amp = 1.0 / (1.0 + (n as f64).abs());
                let phase = 0.7 * n as f64;
                let angle = n as f64 * theta + phase;
                acc += c64(amp * angle.cos(), amp * angle.sin());
            }
            acc
        };
        let fc = SampledFunction::new(
            Arc::clone(&coarse),
            coarse.thetas.iter().map(|&t| poly(t)).collect(),
        )
        .unwrap();
        let ff = SampledFunction::new(
            Arc::clone(&fine),
            fine.thetas.iter().map(|&t| poly(t)).collect(),
        )
        .unwrap();
        let sc = cauchy_sample(&coarse, CauchyMode::Nystrom).unwrap();
        let sf = cauchy_sample(&fine, CauchyMode::Nystrom).unwrap();
        let vc = sc.apply(&fc).unwrap();
        let vf = sf.apply(&ff).unwrap();
        let dev: f64 = (0..coarse.n)
            .map(|j| (vc.values[j] - vf.values[2 * j]).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-10, "self-convergence deviation {dev}");
    }

    #[test]
    fn shifted_cauchy_equals_conjugated_cauchy() {
        // The alpha-substituted operator is gamma W S W.
        let grid = circle(64);
        for kind in [ShiftKind::Antipodal, ShiftKind::Reflection { c: 0.0 }] {
            let shift = induce_shift(&grid, &kind).unwrap();
            let v = shifted_cauchy_sample(&grid, &shift).unwrap();
            let s = cauchy_sample(&grid, CauchyMode::Nystrom).unwrap();
            let w = composition_sample(&shift);
            let wsw = w.compose(&s).compose(&w);
            let dev = v
                .matrix
                .sub(&wsw.matrix.scale(c64(shift.gamma(), 0.0)))
                .max_abs();
            assert!(dev < 1e-9, "{kind:?}: {dev}");
        }
    }

    #[test]
    fn kernel_quadrature_examples() {
        let grid = circle(32);

        let zero = parse("0").unwrap();
        let kz = integral_sample(&zero, &grid).unwrap();
        assert!(kz.matrix.max_abs() < 1e-15);

        // K = 1 applied to phi = tau integrates tau dtau around a closed
        // contour: zero.
        let one = parse("1").unwrap();
        let k1 = integral_sample(&one, &grid).unwrap();
        let out = k1.apply(&monomial(&grid, 1)).unwrap();
        assert!(out.max_abs() < 1e-12);

        // K = t tau on phi = tau^{-2} leaves the residue 2 pi i t.
        let ktt = parse("t*tau").unwrap();
        let k = integral_sample(&ktt, &grid).unwrap();
        let out = k.apply(&monomial(&grid, -2)).unwrap();
        let expect = SampledFunction::from_fn(&grid, |t| c64(0.0, 2.0 * PI) * t);
        assert!(max_dev(&out, &expect) < 1e-12);
    }

    #[test]
    fn kernel_singularity_reported() {
        let grid = circle(16);
        let singular = parse("1/(t-tau)").unwrap();
        match integral_sample(&singular, &grid) {
            Err(Error::KernelEvaluation { .. }) => {}
            other => panic!("expected kernel evaluation error, got {other:?}"),
        }
    }

    #[test]
    fn resolution_guard() {
        let grid = circle(32);
        match build_s(&grid, CauchyMode::SpectralCircle, 16) {
            Err(Error::Resolution { .. }) => {}
            other => panic!("expected resolution error, got {other:?}"),
        }
        assert!(build_s(&grid, CauchyMode::SpectralCircle, 8).is_ok());
    }

    #[test]
    fn composition_sample_interpolates_off_grid() {
        let grid = circle(32);
        let c = 0.4321;
        let sigma: Vec<f64> = grid.thetas.iter().map(|&t| c - t).collect();
        let shift = induce_shift(
            &grid,
            &ShiftKind::Custom {
                sigma_samples: sigma,
            },
        )
        .unwrap();
        let w = composition_sample(&shift);
        let f = SampledFunction::from_fn(&grid, |t| t * t * t + 2.0 / t);
        let composed = w.apply(&f).unwrap();
        let direct = crate::funcspace::compose_shift(&f, &shift).unwrap();
        assert!(max_dev(&composed, &direct) < 1e-11);
    }
}
