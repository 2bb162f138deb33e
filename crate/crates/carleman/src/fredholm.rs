//! Noether conditions, winding numbers and the analytic index.
//!
//! Whether the equation is Noetherian, and what its index is, reduces to
//! determinant fields of the 2x2 multiplier matrices: nonvanishing decides
//! solvability, and winding numbers around the contour give the index.
//! The index of the shift-free system is the winding of `det D / det C`;
//! for the single equation with shift it is half the winding of
//! `delta1 / delta2` (orientation-preserving) or the winding of `delta`
//! (orientation-reversing), so the system index is always twice the
//! equation index.
//!
//! Phase unwrapping is deliberately brittle: when two consecutive samples
//! disagree by nearly pi the branch is ambiguous, and the routine fails with
//! a resolution error rather than guess. A wrong integer would silently
//! corrupt every downstream verdict; a failed unwrap is fixed by raising N.

use crate::error::{Error, Result};
use crate::funcspace::SampledFunction;
use crate::geometry::Orientation;
use crate::matrix::{c64, CMatrix};
use crate::shift_system::{DeterminantFields, Matrix2Field, SystemFields};
use crate::singular_ops::SampleOperator;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Default relative tolerance for determinant nonvanishing.
pub const TOL_DET: f64 = 1e-8;
/// Hard failure margin for phase unwrapping, in radians below pi.
pub const PHASE_MARGIN: f64 = 0.2;
/// Condition bound for the nodewise inversions of the regularizer.
pub const COND_MAX: f64 = 1e12;

/// Winding number of a nonvanishing sample loop.
///
/// Returns the integer winding and the largest inter-node phase jump.
/// `tol_zero` is the absolute magnitude below which a sample counts as a
/// zero crossing.
pub fn winding_number(samples: &[Complex64], tol_zero: f64) -> Result<(i64, f64)> {
    let n = samples.len();
    for (j, v) in samples.iter().enumerate() {
        if v.norm() <= tol_zero {
            return Err(Error::ZeroCrossing {
                index: j,
                magnitude: v.norm(),
                tol: tol_zero,
            });
        }
    }
    let mut total = 0.0;
    let mut max_jump: f64 = 0.0;
    for j in 0..n {
        let next = (j + 1) % n;
        let jump = (samples[next] / samples[j]).arg();
        if jump.abs() >= PI - PHASE_MARGIN {
            return Err(Error::PhaseJump {
                index: j,
                next,
                jump,
            });
        }
        max_jump = max_jump.max(jump.abs());
        total += jump;
    }
    let winding = (total / TAU).round();
    if (total / TAU - winding).abs() > 1e-6 {
        return Err(Error::Resolution {
            detail: format!(
                "phase increments sum to {:.6} turns, not an integer",
                total / TAU
            ),
        });
    }
    Ok((winding as i64, max_jump))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Noetherian,
    Violated,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Noetherian => "noetherian",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Minimum of one named determinant field.
#[derive(Debug, Clone)]
pub struct FieldMinimum {
    pub name: &'static str,
    pub min_abs: f64,
    pub argmin_node: usize,
}

/// Outcome of the nonvanishing check.
#[derive(Debug, Clone)]
pub struct NoetherReport {
    pub orientation: Orientation,
    pub minima: Vec<FieldMinimum>,
    pub verdict: Verdict,
    /// Relative tolerance that was applied.
    pub tol_det: f64,
    /// Absolute threshold: `tol_det` times the common field scale.
    pub threshold: f64,
}

fn field_min(name: &'static str, f: &SampledFunction) -> FieldMinimum {
    let mut min_abs = f64::INFINITY;
    let mut argmin_node = 0;
    for (j, v) in f.values.iter().enumerate() {
        if v.norm() < min_abs {
            min_abs = v.norm();
            argmin_node = j;
        }
    }
    FieldMinimum {
        name,
        min_abs,
        argmin_node,
    }
}

/// Check the determinant fields against zero.
///
/// The verdict is `Violated` when any minimum falls below a tenth of the
/// threshold, `Inconclusive` inside the one-decade gray band, and
/// `Noetherian` otherwise.
pub fn noether_check(fields: &SystemFields, tol_det: f64) -> NoetherReport {
    let named: Vec<FieldMinimum> = match &fields.delta {
        DeterminantFields::Preserving { delta1, delta2 } => {
            vec![field_min("delta1", delta1), field_min("delta2", delta2)]
        }
        DeterminantFields::Reversing { delta } => vec![field_min("delta", delta)],
    };
    let scale = match &fields.delta {
        DeterminantFields::Preserving { delta1, delta2 } => delta1.max_abs().max(delta2.max_abs()),
        DeterminantFields::Reversing { delta } => delta.max_abs(),
    }
    .max(f64::MIN_POSITIVE);
    let threshold = tol_det * scale;

    let worst = named
        .iter()
        .map(|m| m.min_abs)
        .fold(f64::INFINITY, f64::min);
    let verdict = if worst < threshold / 10.0 {
        Verdict::Violated
    } else if worst < threshold {
        Verdict::Inconclusive
    } else {
        Verdict::Noetherian
    };

    NoetherReport {
        orientation: fields.orientation,
        minima: named,
        verdict,
        tol_det,
        threshold,
    }
}

/// Analytic index data computed from winding numbers.
#[derive(Debug, Clone)]
pub struct IndexReport {
    pub orientation: Orientation,
    /// Index of the single equation with shift.
    pub ind_m: i64,
    /// Index of the shift-free 2x2 system; always `2 ind_m`.
    pub ind_l: i64,
    pub winding_det_d: i64,
    pub winding_det_c: i64,
    /// Winding of the named field quotient: `delta1/delta2` when the shift
    /// preserves orientation, `delta` otherwise.
    pub winding_named: i64,
    /// For the orientation-preserving case: the named winding was even.
    pub even: Option<bool>,
    pub max_phase_jump: f64,
}

/// Compute the analytic index. Requires a Noetherian problem; vanishing
/// determinants surface as zero-crossing errors.
pub fn index_report(fields: &SystemFields, tol_det: f64) -> Result<IndexReport> {
    let scale = fields
        .det_c
        .max_abs()
        .max(fields.det_d.max_abs())
        .max(f64::MIN_POSITIVE);
    let tol_abs = tol_det * scale;

    let quotient_dc: Vec<Complex64> = fields
        .det_d
        .values
        .iter()
        .zip(&fields.det_c.values)
        .map(|(&d, &c)| d / c)
        .collect();
    let q_scale = quotient_dc
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let (ind_l, jump_dc) = winding_number(&quotient_dc, tol_det * q_scale)?;
    let (winding_det_d, _) = winding_number(&fields.det_d.values, tol_abs)?;
    let (winding_det_c, _) = winding_number(&fields.det_c.values, tol_abs)?;

    let (ind_m, winding_named, even, jump_named) = match &fields.delta {
        DeterminantFields::Preserving { delta1, delta2 } => {
            let quotient: Vec<Complex64> = delta1
                .values
                .iter()
                .zip(&delta2.values)
                .map(|(&x, &y)| x / y)
                .collect();
            let named_scale = quotient
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE);
            let (w, jump) = winding_number(&quotient, tol_det * named_scale)?;
            if w.rem_euclid(2) != 0 {
                return Err(Error::ParityViolation { winding: w });
            }
            (w / 2, w, Some(true), jump)
        }
        DeterminantFields::Reversing { delta } => {
            let named_scale = delta.max_abs().max(f64::MIN_POSITIVE);
            let (w, jump) = winding_number(&delta.values, tol_det * named_scale)?;
            (w, w, None, jump)
        }
    };

    Ok(IndexReport {
        orientation: fields.orientation,
        ind_m,
        ind_l,
        winding_det_d,
        winding_det_c,
        winding_named,
        even,
        max_phase_jump: jump_dc.max(jump_named),
    })
}

/// The two-sided regularizer `R = C^{-1} P1 + D^{-1} Q1` on the 2x2 system,
/// as a `2N x 2N` sample-space matrix.
pub fn build_regularizer(fields: &SystemFields, s: &SampleOperator) -> Result<CMatrix> {
    let n = fields.grid.n;
    let id = CMatrix::identity(n);
    let p1 = id.add(&s.matrix).scale(c64(0.5, 0.0));
    let q1 = id.sub(&s.matrix).scale(c64(0.5, 0.0));

    let block_mult = |f: &Matrix2Field, proj: &CMatrix| -> CMatrix {
        let diag = |g: &SampledFunction| {
            let mut m = CMatrix::zeros(n, n);
            for j in 0..n {
                m[(j, j)] = g.values[j];
            }
            m
        };
        CMatrix::from_blocks(
            &diag(&f.e11).mul(proj),
            &diag(&f.e12).mul(proj),
            &diag(&f.e21).mul(proj),
            &diag(&f.e22).mul(proj),
        )
    };

    let c_inv = fields.c.inverse(COND_MAX)?;
    let d_inv = fields.d.inverse(COND_MAX)?;
    Ok(block_mult(&c_inv, &p1).add(&block_mult(&d_inv, &q1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprparse::parse;
    use crate::funcspace::SampledFunction;
    use crate::geometry::{contour_sample, induce_shift, Contour, GridSampling, ShiftKind};
    use crate::shift_system::{build_system_fields, CoefficientSet};
    use std::sync::Arc;

    fn circle(n: usize) -> Arc<GridSampling> {
        contour_sample(&Contour::UnitCircle, n).unwrap()
    }

    fn sample(grid: &Arc<GridSampling>, f: impl Fn(Complex64) -> Complex64) -> Vec<Complex64> {
        grid.nodes.iter().map(|&t| f(t)).collect()
    }

    fn problem(grid: &Arc<GridSampling>, kind: &ShiftKind, exprs: [&str; 4]) -> CoefficientSet {
        let shift = induce_shift(grid, kind).unwrap();
        let mk = |src: &str| {
            let e = parse(src).unwrap();
            SampledFunction::from_fn(grid, |t| e.evaluate(t, None).unwrap())
        };
        CoefficientSet::new(
            Arc::clone(grid),
            shift,
            mk(exprs[0]),
            mk(exprs[1]),
            mk(exprs[2]),
            mk(exprs[3]),
            SampledFunction::constant(grid, c64(0.0, 0.0)),
            None,
        )
        .unwrap()
    }

    #[test]
    fn winding_examples() {
        let grid = circle(64);
        let (w, _) = winding_number(&sample(&grid, |t| t), 1e-12).unwrap();
        assert_eq!(w, 1);

        let (w, jump) = winding_number(&sample(&grid, |_| c64(2.0, 0.0)), 1e-12).unwrap();
        assert_eq!(w, 0);
        assert!(jump < 1e-12);

        // e^{3 i theta} (2 + e^{i theta}): three zeros inside, no poles.
        let (w, _) = winding_number(&sample(&grid, |t| t * t * t * (t + 2.0)), 1e-12).unwrap();
        assert_eq!(w, 3);
    }

    #[test]
    fn winding_additivity() {
        let grid = circle(128);
        let cases: Vec<(Vec<Complex64>, i64)> = vec![
            (sample(&grid, |t| t), 1),
            (sample(&grid, |t| 1.0 / (t * t)), -2),
            (sample(&grid, |t| (t - 0.3) * (t + 2.0)), 1),
            (sample(&grid, |t| c64(0.0, 5.0) * t * t), 2),
        ];
        for (f, wf) in &cases {
            for (g, wg) in &cases {
                let product: Vec<Complex64> = f.iter().zip(g).map(|(&x, &y)| x * y).collect();
                let (w, _) = winding_number(&product, 1e-12).unwrap();
                assert_eq!(w, wf + wg);
            }
        }
    }

    #[test]
    fn winding_refinement_stable() {
        for n in [32usize, 64, 128] {
            let grid = circle(n);
            let (w, _) = winding_number(&sample(&grid, |t| t * t * (t + 3.0)), 1e-12).unwrap();
            assert_eq!(w, 2);
        }
    }

    #[test]
    fn phase_jump_fails_loudly() {
        // Winding 4 on 8 nodes puts every jump exactly at pi.
        let grid = circle(8);
        match winding_number(&sample(&grid, |t| t.powi(4)), 1e-12) {
            Err(Error::PhaseJump { .. }) => {}
            other => panic!("expected phase jump error, got {other:?}"),
        }
    }

    #[test]
    fn zero_crossing_fails() {
        let grid = circle(16);
        match winding_number(&sample(&grid, |t| t - 1.0), 1e-12) {
            Err(Error::ZeroCrossing { index: 0, .. }) => {}
            other => panic!("expected zero crossing at node 0, got {other:?}"),
        }
    }

    #[test]
    fn noether_trivial() {
        let grid = circle(16);
        let p = problem(&grid, &ShiftKind::Antipodal, ["1", "0", "0", "0"]);
        let fields = build_system_fields(&p).unwrap();
        let report = noether_check(&fields, TOL_DET);
        assert_eq!(report.verdict, Verdict::Noetherian);
        for min in &report.minima {
            assert!((min.min_abs - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn noether_violated_at_contour_zero() {
        let grid = circle(16);
        let p = problem(&grid, &ShiftKind::Antipodal, ["t-1", "0", "0", "0"]);
        let fields = build_system_fields(&p).unwrap();
        let report = noether_check(&fields, TOL_DET);
        assert_eq!(report.verdict, Verdict::Violated);
        // delta2 = a1(t) a1(-t) = (t-1)(-t-1) vanishes at the node t = 1.
        let delta2 = report.minima.iter().find(|m| m.name == "delta2").unwrap();
        assert_eq!(delta2.argmin_node, 0);
        assert!(delta2.min_abs < 1e-12);
    }

    #[test]
    fn noether_reversing() {
        let grid = circle(16);
        let p = problem(
            &grid,
            &ShiftKind::Reflection { c: 0.0 },
            ["(t-1)/2", "0", "(t+1)/2", "0"],
        );
        let fields = build_system_fields(&p).unwrap();
        let report = noether_check(&fields, TOL_DET);
        assert_eq!(report.verdict, Verdict::Noetherian);
        assert!((report.minima[0].min_abs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn index_preserving_example() {
        // a1 = 1, c1 = -1/t: delta1 = -t^{-2}, delta2 = 1, index -1.
        let grid = circle(64);
        let p = problem(
            &grid,
            &ShiftKind::Antipodal,
            ["(1+1/t)/2", "0", "(1-1/t)/2", "0"],
        );
        let fields = build_system_fields(&p).unwrap();
        let report = index_report(&fields, TOL_DET).unwrap();
        assert_eq!(report.winding_named, -2);
        assert_eq!(report.ind_m, -1);
        assert_eq!(report.ind_l, -2);
        assert_eq!(report.ind_l, report.winding_det_d - report.winding_det_c);
    }

    #[test]
    fn index_reversing_example() {
        let grid = circle(64);
        let p = problem(
            &grid,
            &ShiftKind::Reflection { c: 0.0 },
            ["(t-1)/2", "0", "(t+1)/2", "0"],
        );
        let fields = build_system_fields(&p).unwrap();
        let report = index_report(&fields, TOL_DET).unwrap();
        assert_eq!(report.ind_m, -1);
        assert_eq!(report.ind_l, -2);
    }

    #[test]
    fn odd_quotient_winding_is_a_parity_error() {
        // The identity shift with coupled coefficients can make the
        // determinant quotient wind an odd number of times; the half-winding
        // index is then undefined and must fail rather than round.
        let grid = circle(64);
        let p = problem(&grid, &ShiftKind::Identity, ["2+t", "0.5", "1", "0.25"]);
        let fields = build_system_fields(&p).unwrap();
        match index_report(&fields, TOL_DET) {
            Err(Error::ParityViolation { winding: 1 }) => {}
            other => panic!("expected parity violation, got {other:?}"),
        }
    }

    #[test]
    fn index_trivial() {
        for kind in [ShiftKind::Antipodal, ShiftKind::Reflection { c: 0.0 }] {
            let grid = circle(32);
            let p = problem(&grid, &kind, ["1", "0", "0", "0"]);
            let fields = build_system_fields(&p).unwrap();
            let report = index_report(&fields, TOL_DET).unwrap();
            assert_eq!(report.ind_m, 0);
            assert_eq!(report.ind_l, 0);
        }
    }

    #[test]
    fn scaling_invariance() {
        // Multiplying all coefficients by a winding-free nonvanishing
        // function leaves the index unchanged.
        let grid = circle(64);
        let base = ["(1+1/t)/2", "0", "(1-1/t)/2", "0"];
        let scaled = ["(2+t)*(1+1/t)/2", "0", "(2+t)*(1-1/t)/2", "0"];
        for (exprs, label) in [(base, "base"), (scaled, "scaled")] {
            let p = problem(&grid, &ShiftKind::Antipodal, exprs);
            let fields = build_system_fields(&p).unwrap();
            let report = index_report(&fields, TOL_DET).unwrap();
            assert_eq!(report.ind_m, -1, "{label}");
        }
    }

    #[test]
    fn regularizer_identity_case() {
        let grid = circle(32);
        let p = problem(&grid, &ShiftKind::Antipodal, ["1", "0", "0", "0"]);
        let fields = build_system_fields(&p).unwrap();
        let s = crate::singular_ops::cauchy_sample(
            &grid,
            crate::singular_ops::CauchyMode::SpectralCircle,
        )
        .unwrap();
        let r = build_regularizer(&fields, &s).unwrap();
        assert!(r.sub(&CMatrix::identity(2 * grid.n)).max_abs() < 1e-12);
    }

    #[test]
    fn regularizer_diagonal_case() {
        // a = 3/2, c = 1/2 gives C = 2 I, D = I, so R = P1/2 + Q1. On the
        // stacked mode (t^2, 0) this halves; on (t^{-1}, 0) it passes through.
        let grid = circle(32);
        let p = problem(&grid, &ShiftKind::Antipodal, ["1.5", "0", "0.5", "0"]);
        let fields = build_system_fields(&p).unwrap();
        let s = crate::singular_ops::cauchy_sample(
            &grid,
            crate::singular_ops::CauchyMode::SpectralCircle,
        )
        .unwrap();
        let r = build_regularizer(&fields, &s).unwrap();

        let mut plus_mode = sample(&grid, |t| t * t);
        plus_mode.extend(vec![Complex64::default(); grid.n]);
        let out = r.matvec(&plus_mode);
        for j in 0..grid.n {
            assert!((out[j] - 0.5 * plus_mode[j]).norm() < 1e-12);
            assert!(out[grid.n + j].norm() < 1e-12);
        }

        let mut minus_mode = sample(&grid, |t| 1.0 / t);
        minus_mode.extend(vec![Complex64::default(); grid.n]);
        let out = r.matvec(&minus_mode);
        for j in 0..grid.n {
            assert!((out[j] - minus_mode[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn regularizer_rejects_singular_nodes() {
        let grid = circle(16);
        let p = problem(&grid, &ShiftKind::Antipodal, ["t-1", "0", "0", "0"]);
        let fields = build_system_fields(&p).unwrap();
        let s = crate::singular_ops::cauchy_sample(
            &grid,
            crate::singular_ops::CauchyMode::SpectralCircle,
        )
        .unwrap();
        match build_regularizer(&fields, &s) {
            Err(Error::SingularNode { .. }) => {}
            other => panic!("expected singular node error, got {other:?}"),
        }
    }
}
