//! Everything built from the coefficients and the shift: derived
//! coefficients, the 2x2 multiplier fields and their determinants, and the
//! seven operator assemblies.
//!
//! The underlying equation, with unknown `phi` on a closed contour, is
//!
//! ```text
//! M phi = a phi + b (phi o alpha) + c S phi + d (S phi) o alpha
//!         + integral K(t, tau) phi(tau) dtau = g,
//! ```
//!
//! where `alpha` is a Carleman shift. Substituting `t -> alpha(t)` and
//! stacking `rho_1 = phi`, `rho_2 = phi o alpha` removes the shift at the
//! cost of a 2x2 system; the accompanying operator `K` (sign-flipped shift
//! terms) and the transposed operators with respect to the contour pairing
//! `int phi psi dt` complete the family. Kernel counts of the members are
//! what the verification suites compare.
//!
//! The shifted singular term is discretized by direct quadrature of
//! `alpha'(tau) / (alpha(tau) - alpha(t))` with the same subtraction trick as
//! the plain Cauchy operator; algebraically it equals the shift-conjugated
//! operator `gamma W S W`, which the property tests exercise.

use crate::error::{Error, Result};
use crate::exprparse::Expr;
use crate::funcspace::{compose_shift, to_fourier, FourierRep, SampledFunction};
use crate::geometry::{GridSampling, Orientation, ShiftMap};
use crate::matrix::{c64, CMatrix};
use crate::singular_ops::{
    cauchy_sample, composition_sample, evaluation_matrix, kernel_matrix, multiplication_sample,
    shifted_cauchy_sample, BlockStructure, CauchyMode, OperatorMatrix, SampleOperator, TrialBasis,
};
use num_complex::Complex64;
use std::sync::Arc;

/// The data of one singular integral equation with shift.
#[derive(Debug)]
pub struct CoefficientSet {
    pub grid: Arc<GridSampling>,
    pub shift: ShiftMap,
    pub a: SampledFunction,
    pub b: SampledFunction,
    pub c: SampledFunction,
    pub d: SampledFunction,
    pub g: SampledFunction,
    pub kernel: Option<Expr>,
    /// Spectral representations, kept for band-limit diagnostics.
    pub fourier: [FourierRep; 5],
}

impl CoefficientSet {
    pub fn new(
        grid: Arc<GridSampling>,
        shift: ShiftMap,
        a: SampledFunction,
        b: SampledFunction,
        c: SampledFunction,
        d: SampledFunction,
        g: SampledFunction,
        kernel: Option<Expr>,
    ) -> Result<Self> {
        for f in [&a, &b, &c, &d, &g] {
            if !GridSampling::same_grid(&grid, &f.grid) {
                return Err(Error::GridMismatch);
            }
        }
        if !GridSampling::same_grid(&grid, &shift.grid) {
            return Err(Error::GridMismatch);
        }
        let fourier = [
            to_fourier(&a),
            to_fourier(&b),
            to_fourier(&c),
            to_fourier(&d),
            to_fourier(&g),
        ];
        Ok(Self {
            grid,
            shift,
            a,
            b,
            c,
            d,
            g,
            kernel,
            fourier,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.shift.gamma()
    }

    /// Largest numerical trigonometric degree across `a`, `b`, `c`, `d`.
    pub fn coefficient_degree(&self) -> usize {
        self.fourier[..4]
            .iter()
            .map(|f| crate::funcspace::numerical_degree(f, 1e-10))
            .max()
            .unwrap_or(0)
    }
}

/// Sums and differences of the coefficients that drive the determinant
/// fields: `a1 = a + c`, `c1 = c - a`, `b1 = b + d`, `d1 = d - b`.
pub struct DerivedCoefficients {
    pub a1: SampledFunction,
    pub c1: SampledFunction,
    pub b1: SampledFunction,
    pub d1: SampledFunction,
}

pub fn derive_coefficients(coeffs: &CoefficientSet) -> DerivedCoefficients {
    let a1 = coeffs.a.add(&coeffs.c).expect("shared grid");
    let c1 = coeffs.c.sub(&coeffs.a).expect("shared grid");
    let b1 = coeffs.b.add(&coeffs.d).expect("shared grid");
    let d1 = coeffs.d.sub(&coeffs.b).expect("shared grid");
    DerivedCoefficients { a1, c1, b1, d1 }
}

/// A 2x2 matrix of sampled functions.
#[derive(Debug, Clone)]
pub struct Matrix2Field {
    pub e11: SampledFunction,
    pub e12: SampledFunction,
    pub e21: SampledFunction,
    pub e22: SampledFunction,
}

impl Matrix2Field {
    pub fn det(&self) -> SampledFunction {
        let prod1 = self.e11.mul(&self.e22).expect("shared grid");
        let prod2 = self.e12.mul(&self.e21).expect("shared grid");
        prod1.sub(&prod2).expect("shared grid")
    }

    fn combine(&self, rhs: &Self, sign: f64) -> Self {
        let op = |x: &SampledFunction, y: &SampledFunction| {
            if sign > 0.0 {
                x.add(y).expect("shared grid")
            } else {
                x.sub(y).expect("shared grid")
            }
        };
        Self {
            e11: op(&self.e11, &rhs.e11),
            e12: op(&self.e12, &rhs.e12),
            e21: op(&self.e21, &rhs.e21),
            e22: op(&self.e22, &rhs.e22),
        }
    }

    /// Nodewise matrix at node `j`.
    pub fn at(&self, j: usize) -> [[Complex64; 2]; 2] {
        [
            [self.e11.values[j], self.e12.values[j]],
            [self.e21.values[j], self.e22.values[j]],
        ]
    }

    /// Nodewise inverses; fails on ill-conditioned nodes.
    pub fn inverse(&self, cond_max: f64) -> Result<Matrix2Field> {
        let grid = &self.e11.grid;
        let n = grid.n;
        let mut inv = [
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        ];
        for j in 0..n {
            let m = self.at(j);
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let frob_sq: f64 = m.iter().flatten().map(|v| v.norm_sqr()).sum();
            // cond_2(A) <= frob(A) * frob(A^{-1}) = frob(A)^2 / |det| for 2x2.
            let cond = frob_sq / det.norm().max(f64::MIN_POSITIVE);
            if !cond.is_finite() || cond > cond_max {
                return Err(Error::SingularNode { index: j, cond });
            }
            inv[0].push(m[1][1] / det);
            inv[1].push(-m[0][1] / det);
            inv[2].push(-m[1][0] / det);
            inv[3].push(m[0][0] / det);
        }
        let mk = |v: Vec<Complex64>| SampledFunction {
            grid: Arc::clone(grid),
            values: v,
        };
        let [i11, i12, i21, i22] = inv;
        Ok(Matrix2Field {
            e11: mk(i11),
            e12: mk(i12),
            e21: mk(i21),
            e22: mk(i22),
        })
    }
}

/// Named determinant fields, split by orientation.
#[derive(Debug, Clone)]
pub enum DeterminantFields {
    /// Orientation-preserving shift: `delta1 = c1 (c1 o alpha) - d1 (d1 o alpha)`
    /// and `delta2 = a1 (a1 o alpha) - b1 (b1 o alpha)`.
    Preserving {
        delta1: SampledFunction,
        delta2: SampledFunction,
    },
    /// Orientation-reversing shift: one field `delta = det D`, with
    /// `det C = delta o alpha`.
    Reversing { delta: SampledFunction },
}

/// Per-node multiplier matrices of the shift-free system and their
/// determinant fields.
pub struct SystemFields {
    pub orientation: Orientation,
    pub grid: Arc<GridSampling>,
    pub p: Matrix2Field,
    pub q: Matrix2Field,
    /// `C = P + Q`.
    pub c: Matrix2Field,
    /// `D = P - Q`.
    pub d: Matrix2Field,
    pub det_c: SampledFunction,
    pub det_d: SampledFunction,
    pub delta: DeterminantFields,
}

/// Build the multiplier fields
/// `P = [[a, b], [b o alpha, a o alpha]]`,
/// `Q = [[c, gamma d], [d o alpha, gamma (c o alpha)]]`
/// and their determinants.
pub fn build_system_fields(coeffs: &CoefficientSet) -> Result<SystemFields> {
    let shift = &coeffs.shift;
    let gamma = c64(shift.gamma(), 0.0);
    let a_shift = compose_shift(&coeffs.a, shift)?;
    let b_shift = compose_shift(&coeffs.b, shift)?;
    let c_shift = compose_shift(&coeffs.c, shift)?;
    let d_shift = compose_shift(&coeffs.d, shift)?;

    let p = Matrix2Field {
        e11: coeffs.a.clone(),
        e12: coeffs.b.clone(),
        e21: b_shift.clone(),
        e22: a_shift.clone(),
    };
    let q = Matrix2Field {
        e11: coeffs.c.clone(),
        e12: coeffs.d.scale(gamma),
        e21: d_shift.clone(),
        e22: c_shift.scale(gamma),
    };
    let c = p.combine(&q, 1.0);
    let d = p.combine(&q, -1.0);
    let det_c = c.det();
    let det_d = d.det();

    let delta = match shift.orientation {
        Orientation::Preserving => {
            let derived = derive_coefficients(coeffs);
            let a1s = compose_shift(&derived.a1, shift)?;
            let b1s = compose_shift(&derived.b1, shift)?;
            let c1s = compose_shift(&derived.c1, shift)?;
            let d1s = compose_shift(&derived.d1, shift)?;
            let delta1 = derived.c1.mul(&c1s)?.sub(&derived.d1.mul(&d1s)?)?;
            let delta2 = derived.a1.mul(&a1s)?.sub(&derived.b1.mul(&b1s)?)?;
            DeterminantFields::Preserving { delta1, delta2 }
        }
        Orientation::Reversing => DeterminantFields::Reversing {
            delta: det_d.clone(),
        },
    };

    Ok(SystemFields {
        orientation: shift.orientation,
        grid: Arc::clone(&coeffs.grid),
        p,
        q,
        c,
        d,
        det_c,
        det_d,
        delta,
    })
}

/// The seven assemblies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// The equation itself.
    M,
    /// Accompanying equation: shift terms sign-flipped.
    KAccomp,
    /// Transpose of `M` under the contour pairing.
    MUnion,
    /// Transpose of the accompanying equation.
    KUnion,
    /// Shift-free 2x2 system, assembled as multiplier blocks plus the
    /// diagonal Cauchy block plus the compact remainder.
    LSystem,
    /// The same operator assembled as `C P1 + D Q1 + T` through the Plemelj
    /// projections; agrees with [`OperatorKind::LSystem`] entrywise.
    LSystemCd,
    /// Transpose of the 2x2 system under the pairing.
    LUnionSystem,
}

impl OperatorKind {
    pub fn is_system(self) -> bool {
        matches!(
            self,
            OperatorKind::LSystem | OperatorKind::LSystemCd | OperatorKind::LUnionSystem
        )
    }
}

/// Caches the grid-level operators shared by all assemblies of one problem.
pub struct Assembler<'a> {
    pub coeffs: &'a CoefficientSet,
    s: SampleOperator,
    w: SampleOperator,
    v: SampleOperator,
    a_shift: SampledFunction,
    b_shift: SampledFunction,
    c_shift: SampledFunction,
    d_shift: SampledFunction,
    alpha_deriv: SampledFunction,
}

impl<'a> Assembler<'a> {
    pub fn new(coeffs: &'a CoefficientSet) -> Result<Self> {
        let grid = &coeffs.grid;
        let mode = if grid.contour.is_unit_circle() {
            CauchyMode::SpectralCircle
        } else {
            CauchyMode::Nystrom
        };
        let s = cauchy_sample(grid, mode)?;
        let w = composition_sample(&coeffs.shift);
        let v = shifted_cauchy_sample(grid, &coeffs.shift)?;
        let shift = &coeffs.shift;
        Ok(Self {
            coeffs,
            s,
            w,
            v,
            a_shift: compose_shift(&coeffs.a, shift)?,
            b_shift: compose_shift(&coeffs.b, shift)?,
            c_shift: compose_shift(&coeffs.c, shift)?,
            d_shift: compose_shift(&coeffs.d, shift)?,
            alpha_deriv: SampledFunction {
                grid: Arc::clone(grid),
                values: shift.alpha_deriv.clone(),
            },
        })
    }

    pub fn cauchy(&self) -> &SampleOperator {
        &self.s
    }

    pub fn composition(&self) -> &SampleOperator {
        &self.w
    }

    fn gamma(&self) -> f64 {
        self.coeffs.gamma()
    }

    fn grid(&self) -> &Arc<GridSampling> {
        &self.coeffs.grid
    }

    fn mult(&self, f: &SampledFunction) -> CMatrix {
        multiplication_sample(f).matrix
    }

    /// `f -> int K(t, tau) f(tau) dtau`, zero when no kernel is given.
    fn kernel_op(&self) -> Result<CMatrix> {
        let grid = self.grid();
        match &self.coeffs.kernel {
            None => Ok(CMatrix::zeros(grid.n, grid.n)),
            Some(expr) => Ok(kernel_matrix(grid, |j, i| {
                expr.evaluate(grid.nodes[j], Some(grid.nodes[i]))
            })?
            .matrix),
        }
    }

    /// Transposed kernel `f -> int K(tau, t) f(tau) dtau`.
    fn kernel_op_transposed(&self) -> Result<CMatrix> {
        let grid = self.grid();
        match &self.coeffs.kernel {
            None => Ok(CMatrix::zeros(grid.n, grid.n)),
            Some(expr) => Ok(kernel_matrix(grid, |j, i| {
                expr.evaluate(grid.nodes[i], Some(grid.nodes[j]))
            })?
            .matrix),
        }
    }

    /// Second-row compact term of the shift-free system, exactly as the
    /// substitution produces it: `gamma K(alpha(t), alpha(tau)) alpha'(tau)`.
    fn kernel_op_substituted(&self) -> Result<CMatrix> {
        let grid = self.grid();
        let gamma = c64(self.gamma(), 0.0);
        let shift = &self.coeffs.shift;
        match &self.coeffs.kernel {
            None => Ok(CMatrix::zeros(grid.n, grid.n)),
            Some(expr) => Ok(kernel_matrix(grid, |j, i| {
                Ok(gamma
                    * expr.evaluate(shift.alpha_nodes[j], Some(shift.alpha_nodes[i]))?
                    * shift.alpha_deriv[i])
            })?
            .matrix),
        }
    }

    /// Second-row compact term of the transposed system:
    /// `gamma alpha'(t) K(alpha(tau), alpha(t))`.
    fn kernel_op_transposed_substituted(&self) -> Result<CMatrix> {
        let grid = self.grid();
        let gamma = c64(self.gamma(), 0.0);
        let shift = &self.coeffs.shift;
        match &self.coeffs.kernel {
            None => Ok(CMatrix::zeros(grid.n, grid.n)),
            Some(expr) => Ok(kernel_matrix(grid, |j, i| {
                Ok(gamma
                    * shift.alpha_deriv[j]
                    * expr.evaluate(shift.alpha_nodes[i], Some(shift.alpha_nodes[j]))?)
            })?
            .matrix),
        }
    }

    /// Node-values-to-node-values matrix of one operator kind
    /// (`N x N` scalar, `2N x 2N` system).
    pub fn sample_matrix(&self, kind: OperatorKind) -> Result<CMatrix> {
        let coeffs = self.coeffs;
        let gamma = c64(self.gamma(), 0.0);
        let s = &self.s.matrix;
        let w = &self.w.matrix;
        match kind {
            OperatorKind::M | OperatorKind::KAccomp => {
                // a I +- b W + c S +- d W S + K.
                let sign = if kind == OperatorKind::M { 1.0 } else { -1.0 };
                let ws = w.mul(s);
                let mut m = self.mult(&coeffs.a);
                m = m.add(&self.mult(&coeffs.b).mul(w).scale(c64(sign, 0.0)));
                m = m.add(&self.mult(&coeffs.c).mul(s));
                m = m.add(&self.mult(&coeffs.d).mul(&ws).scale(c64(sign, 0.0)));
                Ok(m.add(&self.kernel_op()?))
            }
            OperatorKind::MUnion | OperatorKind::KUnion => {
                // a I +- gamma alpha' (b o alpha) W - S Mult(c)
                // -+ gamma S Mult((d o alpha) alpha') W + K^T.
                //
                // The transpose of the accompanying operator flips the signs
                // of both shift terms relative to the transpose of the
                // equation; anything else breaks the pairing identity
                // `int (K chi) omega dt = int chi (K' omega) dt`, which the
                // tests enforce.
                let sign = if kind == OperatorKind::MUnion {
                    1.0
                } else {
                    -1.0
                };
                let shifted_mult = self
                    .mult(&self.b_shift.mul(&self.alpha_deriv)?)
                    .mul(w)
                    .scale(gamma * c64(sign, 0.0));
                let d_weight = self.d_shift.mul(&self.alpha_deriv)?;
                let shifted_singular = s.mul(&self.mult(&d_weight).mul(w)).scale(gamma);
                let mut m = self.mult(&coeffs.a);
                m = m.add(&shifted_mult);
                m = m.sub(&s.mul(&self.mult(&coeffs.c)));
                m = m.sub(&shifted_singular.scale(c64(sign, 0.0)));
                Ok(m.add(&self.kernel_op_transposed()?))
            }
            OperatorKind::LSystem => {
                // Multiplier blocks plus diagonal Cauchy blocks plus the
                // compact remainder gathered from the shifted singular term.
                let v_minus_s = self.v.matrix.sub(s);
                let b11 = self
                    .mult(&coeffs.a)
                    .add(&self.mult(&coeffs.c).mul(s))
                    .add(&self.kernel_op()?);
                let b12 = self
                    .mult(&coeffs.b)
                    .add(&self.mult(&coeffs.d).mul(s).scale(gamma))
                    .add(&self.mult(&coeffs.d).mul(&v_minus_s).scale(gamma));
                let b21 = self
                    .mult(&self.b_shift)
                    .add(&self.mult(&self.d_shift).mul(s));
                let b22 = self
                    .mult(&self.a_shift)
                    .add(&self.mult(&self.c_shift).mul(s).scale(gamma))
                    .add(&self.mult(&self.c_shift).mul(&v_minus_s).scale(gamma))
                    .add(&self.kernel_op_substituted()?);
                Ok(CMatrix::from_blocks(&b11, &b12, &b21, &b22))
            }
            OperatorKind::LSystemCd => {
                // C P1 + D Q1 + T with C = P + Q, D = P - Q and the same
                // compact remainder T as the direct assembly.
                let fields = build_system_fields(coeffs)?;
                let n = self.grid().n;
                let id = CMatrix::identity(n);
                let p1 = id.add(s).scale(c64(0.5, 0.0));
                let q1 = id.sub(s).scale(c64(0.5, 0.0));
                let block_mult = |f: &Matrix2Field, proj: &CMatrix| {
                    CMatrix::from_blocks(
                        &self.mult(&f.e11).mul(proj),
                        &self.mult(&f.e12).mul(proj),
                        &self.mult(&f.e21).mul(proj),
                        &self.mult(&f.e22).mul(proj),
                    )
                };
                let cp1 = block_mult(&fields.c, &p1);
                let dq1 = block_mult(&fields.d, &q1);

                let v_minus_s = self.v.matrix.sub(s);
                let zero = CMatrix::zeros(n, n);
                let t12 = self.mult(&coeffs.d).mul(&v_minus_s).scale(gamma);
                let t22 = self
                    .mult(&self.c_shift)
                    .mul(&v_minus_s)
                    .scale(gamma)
                    .add(&self.kernel_op_substituted()?);
                let t = CMatrix::from_blocks(&self.kernel_op()?, &t12, &zero, &t22);
                Ok(cp1.add(&dq1).add(&t))
            }
            OperatorKind::LUnionSystem => {
                // Transposed system: S composes after multiplication, and the
                // shifted singular term carries 1/alpha'(tau) inside and
                // alpha'(t) outside.
                let v = &self.v.matrix;
                let inv_alpha = SampledFunction {
                    grid: Arc::clone(self.grid()),
                    values: self.alpha_deriv.values.iter().map(|&x| 1.0 / x).collect(),
                };
                let u = v.mul(&self.mult(&inv_alpha));
                let alpha_mult = self.mult(&self.alpha_deriv);

                let b11 = self
                    .mult(&coeffs.a)
                    .sub(&s.mul(&self.mult(&coeffs.c)))
                    .add(&self.kernel_op_transposed()?);
                let b12 = self
                    .mult(&self.b_shift)
                    .sub(&s.mul(&self.mult(&self.d_shift)));
                let b21 = self
                    .mult(&coeffs.b)
                    .sub(&alpha_mult.mul(&u.mul(&self.mult(&coeffs.d))).scale(gamma));
                let b22 = self
                    .mult(&self.a_shift)
                    .sub(
                        &alpha_mult
                            .mul(&u.mul(&self.mult(&self.c_shift)))
                            .scale(gamma),
                    )
                    .add(&self.kernel_op_transposed_substituted()?);
                Ok(CMatrix::from_blocks(&b11, &b12, &b21, &b22))
            }
        }
    }

    /// Rectangular trial-to-collocation discretization of one kind.
    pub fn operator(&self, kind: OperatorKind, m: usize) -> Result<OperatorMatrix> {
        let grid = self.grid();
        if grid.n < 4 * m {
            return Err(Error::Resolution {
                detail: format!(
                    "collocation count {} is below 4 x {} trial modes",
                    grid.n, m
                ),
            });
        }
        let sample = self.sample_matrix(kind)?;
        let e = evaluation_matrix(grid, m);
        let (matrix, block) = if kind.is_system() {
            let zero = CMatrix::zeros(grid.n, 2 * m + 1);
            let e2 = CMatrix::from_blocks(&e, &zero, &zero, &e);
            (sample.mul(&e2), BlockStructure::System)
        } else {
            (sample.mul(&e), BlockStructure::Scalar)
        };
        Ok(OperatorMatrix {
            grid: Arc::clone(grid),
            matrix,
            trial: TrialBasis::Laurent { m },
            block,
        })
    }
}

/// One-shot assembly of a single operator kind.
pub fn assemble_operator(
    coeffs: &CoefficientSet,
    kind: OperatorKind,
    m: usize,
) -> Result<OperatorMatrix> {
    Assembler::new(coeffs)?.operator(kind, m)
}

/// One-shot sample-space matrix of a single operator kind.
pub fn assemble_sample(coeffs: &CoefficientSet, kind: OperatorKind) -> Result<CMatrix> {
    Assembler::new(coeffs)?.sample_matrix(kind)
}

/// The multiplier `u(t) = alpha(t) - t` from the compactness relation of the
/// orientation-preserving case.
pub fn shift_minus_identity(shift: &ShiftMap) -> SampledFunction {
    SampledFunction {
        grid: Arc::clone(&shift.grid),
        values: shift
            .alpha_nodes
            .iter()
            .zip(&shift.grid.nodes)
            .map(|(&alpha, &t)| alpha - t)
            .collect(),
    }
}
