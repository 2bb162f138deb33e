//! Rank-revealing linear algebra for discretized operators.
//!
//! Kernel and cokernel dimensions, least-squares solves and compactness
//! diagnostics all run through one decomposition: a one-sided Jacobi SVD.
//! Jacobi iteration is slower than blocked bidiagonalization but is simple,
//! deterministic, and resolves small singular values to high relative
//! accuracy, which is exactly what threshold-based rank decisions need at
//! these matrix sizes.
//!
//! The index of a discretized operator is never inferred from a single
//! square matrix: a square collocation forces equal kernel dimensions on
//! both sides. It is always the difference of kernel counts of two
//! independently assembled tall rectangles.

use crate::error::{Error, Result};
use crate::funcspace::SampledFunction;
use crate::matrix::CMatrix;
use crate::singular_ops::{evaluation_matrix, BlockStructure, OperatorMatrix, TrialBasis};
use num_complex::Complex64;

/// Singular value decomposition `A = U diag(sigma) V^H`.
///
/// `sigma` is sorted descending with `cols(A)` entries (the input must not
/// have more columns than rows); `u` is `rows x cols`, `v` is `cols x cols`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub sigma: Vec<f64>,
    pub u: CMatrix,
    pub v: CMatrix,
}

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 60;

/// One-sided Jacobi SVD of a tall or square matrix.
pub fn svd(a: &CMatrix) -> Svd {
    assert!(
        a.rows() >= a.cols(),
        "svd expects rows >= cols; transpose first"
    );
    let rows = a.rows();
    let cols = a.cols();
    let mut b = a.clone();
    let mut v = CMatrix::identity(cols);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols.saturating_sub(1) {
            for q in (p + 1)..cols {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = Complex64::default();
                for i in 0..rows {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    app += bp.norm_sqr();
                    aqq += bq.norm_sqr();
                    apq += bp.conj() * bq;
                }
                let g = apq.norm();
                if g <= JACOBI_TOL * (app * aqq).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                // Diagonalize the Hermitian 2x2 Gram block: peel the phase
                // off the off-diagonal entry, then rotate as in the real case.
                let phase = apq / g;
                let tau = (aqq - app) / (2.0 * g);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let bp = b[(i, p)] * phase;
                    let bq = b[(i, q)];
                    b[(i, p)] = c * bp - s * bq;
                    b[(i, q)] = s * bp + c * bq;
                }
                for i in 0..cols {
                    let vp = v[(i, p)] * phase;
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|i| b[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let u = CMatrix::from_fn(rows, cols, |i, j| {
        let src = order[j];
        if norms[src] > 0.0 {
            b[(i, src)] / norms[src]
        } else {
            Complex64::default()
        }
    });
    let v_sorted = CMatrix::from_fn(cols, cols, |i, j| v[(i, order[j])]);
    Svd {
        sigma,
        u,
        v: v_sorted,
    }
}

/// Singular values only, accepting any shape.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.rows() >= a.cols() {
        svd(a).sigma
    } else {
        svd(&a.adjoint()).sigma
    }
}

/// Thresholds for rank decisions.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdPolicy {
    /// Rank cut at `rel_factor * sigma_max`.
    pub rel_factor: f64,
    /// Absolute floor below which singular values always count as zero.
    pub abs_floor: f64,
    /// Minimum ratio across the cut for a reliable count.
    pub gap_min: f64,
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        Self {
            rel_factor: 1e-8,
            abs_floor: 1e-12,
            gap_min: 1e3,
        }
    }
}

/// Outcome of numerical kernel counting.
#[derive(Debug, Clone)]
pub struct NullspaceReport {
    pub dimension: usize,
    /// All singular values, descending.
    pub singular_values: Vec<f64>,
    /// Ratio across the rank cut (`None` when every value is on one side
    /// and no meaningful ratio exists).
    pub gap_ratio: Option<f64>,
    /// False when the gap ratio falls below the policy minimum.
    pub reliable: bool,
    /// Unit-norm kernel vectors in trial coefficients, one per dimension.
    pub basis: Vec<Vec<Complex64>>,
}

/// Count the numerical kernel of a tall rectangular discretization.
pub fn null_count(a: &OperatorMatrix, policy: &ThresholdPolicy) -> Result<NullspaceReport> {
    if a.rows() < a.cols() {
        return Err(Error::Resolution {
            detail: format!(
                "kernel counting needs rows >= cols, got {} x {}",
                a.rows(),
                a.cols()
            ),
        });
    }
    let decomposition = svd(&a.matrix);
    let sigma = &decomposition.sigma;
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let cut = policy.abs_floor.max(policy.rel_factor * sigma_max);
    let dimension = sigma.iter().filter(|&&s| s < cut).count();
    let rank = sigma.len() - dimension;

    let gap_ratio = if dimension == 0 {
        // Nothing below the cut; measure clearance of the smallest value.
        sigma.last().map(|&s| s / cut)
    } else if rank == 0 {
        None
    } else {
        let below = sigma[rank];
        Some(if below > 0.0 {
            sigma[rank - 1] / below
        } else {
            f64::INFINITY
        })
    };
    let reliable = gap_ratio.map_or(true, |g| g >= policy.gap_min);

    let basis: Vec<Vec<Complex64>> = (rank..sigma.len())
        .map(|j| decomposition.v.col(j))
        .collect();

    Ok(NullspaceReport {
        dimension,
        singular_values: sigma.clone(),
        gap_ratio,
        reliable,
        basis,
    })
}

/// Kernel-count difference of an operator and its transposed counterpart.
pub fn numerical_index(
    a: &OperatorMatrix,
    a_union: &OperatorMatrix,
    policy: &ThresholdPolicy,
) -> Result<i64> {
    let ker = null_count(a, policy)?;
    let coker = null_count(a_union, policy)?;
    if !ker.reliable || !coker.reliable {
        return Err(Error::InconclusiveIndex {
            detail: format!(
                "gap ratios {:?} / {:?} below the reliability minimum",
                ker.gap_ratio, coker.gap_ratio
            ),
        });
    }
    Ok(ker.dimension as i64 - coker.dimension as i64)
}

/// Minimum-norm least-squares outcome with solvability classification.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// Trial coefficients of the minimum-norm solution.
    pub solution: Vec<Complex64>,
    pub relative_residual: f64,
    /// Raw pairing values against each basis element of the transposed
    /// operator's kernel.
    pub conditions: Vec<Complex64>,
    /// The same values normalized by the norms of the factors.
    pub normalized_conditions: Vec<f64>,
    pub solvable: bool,
}

/// Solve `A x = rhs` in the least-squares sense and evaluate the
/// orthogonality conditions against the transposed operator's kernel.
///
/// `rhs` is collocation data: `N` values for scalar operators, `2 N` stacked
/// values for 2x2 systems. Solvable means the relative residual and every
/// normalized condition stay below `tol_solve`.
pub fn solve(
    a: &OperatorMatrix,
    rhs: &[Complex64],
    union_kernel: &NullspaceReport,
    policy: &ThresholdPolicy,
    tol_solve: f64,
) -> Result<SolveOutcome> {
    if rhs.len() != a.rows() || union_kernel.basis.iter().any(|v| v.len() != a.cols()) {
        return Err(Error::GridMismatch);
    }
    let decomposition = svd(&a.matrix);
    let sigma_max = decomposition.sigma.first().copied().unwrap_or(0.0);
    let cut = policy.abs_floor.max(policy.rel_factor * sigma_max);

    let mut solution = vec![Complex64::default(); a.cols()];
    for (j, &s) in decomposition.sigma.iter().enumerate() {
        if s < cut {
            continue;
        }
        let mut proj = Complex64::default();
        for i in 0..a.rows() {
            proj += decomposition.u[(i, j)].conj() * rhs[i];
        }
        let scale = proj / s;
        for i in 0..a.cols() {
            solution[i] += scale * decomposition.v[(i, j)];
        }
    }

    let fitted = a.matrix.matvec(&solution);
    let residual_norm: f64 = fitted
        .iter()
        .zip(rhs)
        .map(|(f, b)| (f - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let rhs_norm: f64 = rhs.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
    let relative_residual = if rhs_norm > 0.0 {
        residual_norm / rhs_norm
    } else {
        residual_norm
    };

    let (conditions, normalized_conditions) = pairing_conditions(a, rhs, union_kernel);
    let solvable =
        relative_residual < tol_solve && normalized_conditions.iter().all(|&c| c < tol_solve);

    Ok(SolveOutcome {
        solution,
        relative_residual,
        conditions,
        normalized_conditions,
        solvable,
    })
}

/// Contour pairings `int rhs psi_k dt` for each kernel basis element of the
/// transposed operator, by trapezoid quadrature with the tangent weight.
fn pairing_conditions(
    a: &OperatorMatrix,
    rhs: &[Complex64],
    union_kernel: &NullspaceReport,
) -> (Vec<Complex64>, Vec<f64>) {
    let grid = &a.grid;
    let n = grid.n;
    let m = match a.trial {
        TrialBasis::Laurent { m } => m,
        TrialBasis::Nodal => 0,
    };
    let e = evaluation_matrix(grid, m);
    let components = match a.block {
        BlockStructure::Scalar => 1,
        BlockStructure::System => 2,
    };

    let mut raw = Vec::new();
    let mut normalized = Vec::new();
    for basis_vec in &union_kernel.basis {
        let mut pairing = Complex64::default();
        let mut rhs_sq = 0.0;
        let mut psi_sq = 0.0;
        for comp in 0..components {
            let coeffs = &basis_vec[comp * (2 * m + 1)..(comp + 1) * (2 * m + 1)];
            let psi = e.matvec(coeffs);
            for j in 0..n {
                let weight = grid.tangents[j] * grid.weight;
                pairing += rhs[comp * n + j] * psi[j] * weight;
                let arc = grid.tangents[j].norm() * grid.weight;
                rhs_sq += rhs[comp * n + j].norm_sqr() * arc;
                psi_sq += psi[j].norm_sqr() * arc;
            }
        }
        let scale = (rhs_sq * psi_sq).sqrt();
        raw.push(pairing);
        normalized.push(if scale > 0.0 {
            pairing.norm() / scale
        } else {
            0.0
        });
    }
    (raw, normalized)
}

/// Convenience wrapper for scalar right-hand sides.
pub fn solve_scalar(
    a: &OperatorMatrix,
    g: &SampledFunction,
    union_kernel: &NullspaceReport,
    policy: &ThresholdPolicy,
    tol_solve: f64,
) -> Result<SolveOutcome> {
    solve(a, &g.values, union_kernel, policy, tol_solve)
}

/// Spectral decay diagnostics of a discretized operator.
#[derive(Debug, Clone)]
pub struct CompactnessScore {
    pub sigma_max: f64,
    /// Smallest 1-based index with `sigma_j < eps * sigma_max`, per epsilon.
    pub j0_coarse: usize,
    pub j0_fine: usize,
    /// Set when even the finest threshold is never reached.
    pub non_compact: bool,
    pub singular_values: Vec<f64>,
}

pub const COMPACTNESS_EPS_COARSE: f64 = 1e-4;
pub const COMPACTNESS_EPS_FINE: f64 = 1e-8;
/// Singular values below this count as reached regardless of `sigma_max`;
/// a defect that is zero up to rounding is fully decayed, not full-rank.
pub const COMPACTNESS_ABS_FLOOR: f64 = 1e-12;

/// Measure singular-value decay. Numerically compact discretizations reach
/// `eps * sigma_max` at an index that stays bounded under grid refinement.
pub fn compactness_score(a: &CMatrix) -> CompactnessScore {
    let sigma = singular_values(a);
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let j0 = |eps: f64| -> (usize, bool) {
        let cut = (eps * sigma_max).max(COMPACTNESS_ABS_FLOOR);
        match sigma.iter().position(|&s| s < cut) {
            Some(idx) => (idx + 1, false),
            None => (sigma.len(), true),
        }
    };
    let (j0_coarse, _) = j0(COMPACTNESS_EPS_COARSE);
    let (j0_fine, non_compact) = j0(COMPACTNESS_EPS_FINE);
    CompactnessScore {
        sigma_max,
        j0_coarse,
        j0_fine,
        non_compact,
        singular_values: sigma,
    }
}

/// Growth factor of the fine decay index under grid doubling.
pub fn compactness_growth(coarse: &CompactnessScore, fine: &CompactnessScore) -> f64 {
    fine.j0_fine as f64 / coarse.j0_fine.max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::c64;

    fn tall_from_diag(diag: &[f64], rows: usize) -> CMatrix {
        CMatrix::from_fn(rows, diag.len(), |i, j| {
            if i == j {
                c64(diag[j], 0.0)
            } else {
                Complex64::default()
            }
        })
    }

    #[test]
    fn svd_of_diagonal() {
        let a = tall_from_diag(&[3.0, 1.0, 2.0], 5);
        let d = svd(&a);
        assert!((d.sigma[0] - 3.0).abs() < 1e-14);
        assert!((d.sigma[1] - 2.0).abs() < 1e-14);
        assert!((d.sigma[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn svd_reconstructs_complex_matrix() {
        // Deterministic complex test matrix.
        let rows = 12;
        let cols = 5;
        let a = CMatrix::from_fn(rows, cols, |i, j| {
            let x = ((i * 7 + j * 13) as f64).sin();
            let y = ((i * 3 + j * 11) as f64).cos();
            c64(x, 0.5 * y)
        });
        let d = svd(&a);

        // Columns of V orthonormal.
        for p in 0..cols {
            for q in 0..cols {
                let dot: Complex64 = (0..cols).map(|i| d.v[(i, p)].conj() * d.v[(i, q)]).sum();
                let expect = if p == q { 1.0 } else { 0.0 };
                assert!(
                    (dot - c64(expect, 0.0)).norm() < 1e-12,
                    "V^H V at ({p},{q})"
                );
            }
        }

        // A v_j = sigma_j u_j.
        for j in 0..cols {
            let av = a.matvec(&d.v.col(j));
            for i in 0..rows {
                let expect = d.u[(i, j)] * d.sigma[j];
                assert!((av[i] - expect).norm() < 1e-11);
            }
        }

        // Frobenius norm matches.
        let frob_a: f64 = a.data().iter().map(|v| v.norm_sqr()).sum();
        let frob_s: f64 = d.sigma.iter().map(|s| s * s).sum();
        assert!((frob_a - frob_s).abs() < 1e-10 * frob_a);
    }

    #[test]
    fn svd_resolves_tiny_values() {
        let a = tall_from_diag(&[1.0, 1e-1, 1e-14], 6);
        let d = svd(&a);
        assert!((d.sigma[2] - 1e-14).abs() < 1e-20);
    }

    #[test]
    fn compactness_of_zero_and_identity() {
        let zero = CMatrix::zeros(8, 4);
        let score = compactness_score(&zero);
        assert_eq!(score.j0_fine, 1);

        let id = CMatrix::identity(6);
        let score = compactness_score(&id);
        assert_eq!(score.j0_fine, 6);
        assert!(score.non_compact);
    }

    mod operator_level {
        use super::super::*;
        use crate::exprparse::parse;
        use crate::funcspace::SampledFunction;
        use crate::geometry::{contour_sample, induce_shift, Contour, GridSampling, ShiftKind};
        use crate::matrix::c64;
        use crate::shift_system::{assemble_operator, CoefficientSet, OperatorKind};
        use std::sync::Arc;

        fn riemann_problem(symbol_num: &str, symbol_den: &str, n: usize) -> CoefficientSet {
            // Coefficients with b = d = 0 and (a - c)/(a + c) given by the
            // quotient of the two expressions: a = (den + num)/2,
            // c = (den - num)/2 after normalizing a + c = den.
            let grid = contour_sample(&Contour::UnitCircle, n).unwrap();
            let shift = induce_shift(&grid, &ShiftKind::Antipodal).unwrap();
            let num = parse(symbol_num).unwrap();
            let den = parse(symbol_den).unwrap();
            let a = SampledFunction::from_fn(&grid, |t| {
                (den.evaluate(t, None).unwrap() + num.evaluate(t, None).unwrap()) / 2.0
            });
            let c = SampledFunction::from_fn(&grid, |t| {
                (den.evaluate(t, None).unwrap() - num.evaluate(t, None).unwrap()) / 2.0
            });
            let zero = SampledFunction::constant(&grid, c64(0.0, 0.0));
            CoefficientSet::new(
                Arc::clone(&grid),
                shift,
                a,
                zero.clone(),
                c,
                zero.clone(),
                zero,
                None,
            )
            .unwrap()
        }

        #[test]
        fn kernel_count_of_winding_one_problem() {
            // (a - c)/(a + c) = t: one homogeneous solution, empty cokernel.
            let coeffs = riemann_problem("t", "1", 128);
            let policy = ThresholdPolicy::default();
            let m_op = assemble_operator(&coeffs, OperatorKind::M, 16).unwrap();
            let m_union = assemble_operator(&coeffs, OperatorKind::MUnion, 16).unwrap();
            let ker = null_count(&m_op, &policy).unwrap();
            let coker = null_count(&m_union, &policy).unwrap();
            assert_eq!(
                ker.dimension,
                1,
                "sigma tail: {:?}",
                &ker.singular_values[28..]
            );
            assert!(ker.reliable);
            assert_eq!(coker.dimension, 0);
            assert_eq!(numerical_index(&m_op, &m_union, &policy).unwrap(), 1);

            // The detected kernel element is proportional to 1 - 1/t.
            let basis = &ker.basis[0];
            let grid = &coeffs.grid;
            let e = evaluation_matrix(grid, 16);
            let values = e.matvec(basis);
            let ratio = values[3] / (1.0 - 1.0 / grid.nodes[3]);
            for j in 0..grid.n {
                let expect = ratio * (1.0 - 1.0 / grid.nodes[j]);
                assert!((values[j] - expect).norm() < 1e-6);
            }
        }

        #[test]
        fn kernel_count_of_winding_minus_one_problem() {
            let coeffs = riemann_problem("1/t", "1", 128);
            let policy = ThresholdPolicy::default();
            let m_op = assemble_operator(&coeffs, OperatorKind::M, 16).unwrap();
            let m_union = assemble_operator(&coeffs, OperatorKind::MUnion, 16).unwrap();
            assert_eq!(null_count(&m_op, &policy).unwrap().dimension, 0);
            assert_eq!(null_count(&m_union, &policy).unwrap().dimension, 1);
            assert_eq!(numerical_index(&m_op, &m_union, &policy).unwrap(), -1);
        }

        #[test]
        fn identity_solve_reproduces_rhs() {
            let grid = contour_sample(&Contour::UnitCircle, 64).unwrap();
            let shift = induce_shift(&grid, &ShiftKind::Antipodal).unwrap();
            let zero = SampledFunction::constant(&grid, c64(0.0, 0.0));
            let one = SampledFunction::constant(&grid, c64(1.0, 0.0));
            let g = SampledFunction::from_fn(&grid, |t| t * t - 2.0 / t + c64(0.0, 0.5));
            let coeffs = CoefficientSet::new(
                Arc::clone(&grid),
                shift,
                one,
                zero.clone(),
                zero.clone(),
                zero.clone(),
                g.clone(),
                None,
            )
            .unwrap();
            let policy = ThresholdPolicy::default();
            let m_op = assemble_operator(&coeffs, OperatorKind::M, 8).unwrap();
            let m_union = assemble_operator(&coeffs, OperatorKind::MUnion, 8).unwrap();
            let coker = null_count(&m_union, &policy).unwrap();
            let outcome = solve_scalar(&m_op, &g, &coker, &policy, 1e-8).unwrap();
            assert!(outcome.solvable);
            assert!(outcome.relative_residual < 1e-12);
            // Solution coefficients evaluate back to g.
            let e = evaluation_matrix(&grid, 8);
            let back = e.matvec(&outcome.solution);
            for j in 0..grid.n {
                assert!((back[j] - g.values[j]).norm() < 1e-10);
            }
        }

        #[test]
        fn surjective_problem_solves_generic_rhs() {
            // Index +1 means empty cokernel: any band-limited rhs is in range.
            let coeffs = riemann_problem("t", "1", 128);
            let policy = ThresholdPolicy::default();
            let m_op = assemble_operator(&coeffs, OperatorKind::M, 16).unwrap();
            let m_union = assemble_operator(&coeffs, OperatorKind::MUnion, 16).unwrap();
            let coker = null_count(&m_union, &policy).unwrap();
            let g = SampledFunction::from_fn(&coeffs.grid, |t| t * t + c64(0.3, 0.1) / t + 1.0);
            let outcome = solve_scalar(&m_op, &g, &coker, &policy, 1e-8).unwrap();
            assert!(outcome.solvable, "residual {}", outcome.relative_residual);
            assert!(outcome.relative_residual < 1e-8);
        }

        #[test]
        fn deficient_problem_classifications_agree() {
            // Index -1: one solvability condition. The residual route and the
            // orthogonality route must agree on both a generic and an
            // in-range right-hand side.
            let coeffs = riemann_problem("1/t", "1", 128);
            let policy = ThresholdPolicy::default();
            let m_op = assemble_operator(&coeffs, OperatorKind::M, 16).unwrap();
            let m_union = assemble_operator(&coeffs, OperatorKind::MUnion, 16).unwrap();
            let coker = null_count(&m_union, &policy).unwrap();
            assert_eq!(coker.dimension, 1);

            let generic = SampledFunction::constant(&coeffs.grid, c64(1.0, 0.0));
            let outcome = solve_scalar(&m_op, &generic, &coker, &policy, 1e-8).unwrap();
            let residual_says = outcome.relative_residual < 1e-8;
            let conditions_say = outcome.normalized_conditions.iter().all(|&c| c < 1e-8);
            assert_eq!(residual_says, conditions_say);
            assert_eq!(outcome.solvable, residual_says && conditions_say);

            // In-range rhs: push a band-limited function through the operator.
            let e = evaluation_matrix(&coeffs.grid, 16);
            let mut phi = vec![Complex64::default(); 33];
            phi[16 + 2] = c64(1.0, 0.0);
            phi[16 - 3] = c64(0.5, -0.5);
            let rhs = m_op.matrix.matvec(&phi);
            let outcome = solve(&m_op, &rhs, &coker, &policy, 1e-8).unwrap();
            assert!(outcome.solvable, "residual {}", outcome.relative_residual);
            let _ = e;
        }

        #[test]
        fn solution_validates_at_higher_resolution() {
            // A least-squares solution found at one resolution, pushed
            // through an independently assembled operator on a doubled grid,
            // still fits the right-hand side.
            let coarse = riemann_problem("t", "1", 128);
            let policy = ThresholdPolicy::default();
            let m_coarse = assemble_operator(&coarse, OperatorKind::M, 16).unwrap();
            let mu_coarse = assemble_operator(&coarse, OperatorKind::MUnion, 16).unwrap();
            let coker = null_count(&mu_coarse, &policy).unwrap();
            let g_expr = |t: Complex64| t * t + c64(0.3, 0.1) / t + 1.0;
            let g = SampledFunction::from_fn(&coarse.grid, g_expr);
            let outcome = solve_scalar(&m_coarse, &g, &coker, &policy, 1e-8).unwrap();
            assert!(outcome.solvable);

            let fine = riemann_problem("t", "1", 256);
            let m_fine = assemble_operator(&fine, OperatorKind::M, 16).unwrap();
            let fitted = m_fine.matrix.matvec(&outcome.solution);
            let g_fine = SampledFunction::from_fn(&fine.grid, g_expr);
            let err: f64 = fitted
                .iter()
                .zip(&g_fine.values)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let scale: f64 = g_fine
                .values
                .iter()
                .map(|v| v.norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err / scale < 1e-6, "cross-resolution residual {}", err / scale);
        }

        #[test]
        fn smooth_kernel_operator_is_numerically_compact() {
            let grid = contour_sample(&Contour::UnitCircle, 128).unwrap();
            let kernel = parse("t*tau + 0.5*t^2/tau").unwrap();
            let op = crate::singular_ops::build_integral_op(&kernel, &grid, 16).unwrap();
            let score = compactness_score(&op.matrix);
            // Trig degree of the kernel is 2: the bound is 4 * 2 + 10.
            assert!(score.j0_fine <= 18, "j0 = {}", score.j0_fine);
            assert!(!score.non_compact);
        }
    }
}
