//! Property tests for invariants that hold across whole input families
//! rather than at fixed examples.

use carleman::exprparse::{parse, Expr, Func};
use carleman::fredholm::winding_number;
use carleman::funcspace::{compose_shift, from_fourier, to_fourier, FourierRep, SampledFunction};
use carleman::geometry::{contour_sample, induce_shift, Contour, GridSampling, ShiftKind};
use carleman::matrix::c64;
use carleman::singular_ops::{cauchy_sample, CauchyMode};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::Arc;

fn circle(n: usize) -> Arc<GridSampling> {
    contour_sample(&Contour::UnitCircle, n).unwrap()
}

fn band_limited(grid: &Arc<GridSampling>, raw: &[(f64, f64)], degree: usize) -> SampledFunction {
    let n = grid.n;
    let mut coeffs = vec![Complex64::default(); n];
    let half = n as i64 / 2;
    let mut it = raw.iter().cycle();
    for (k, c) in coeffs.iter_mut().enumerate() {
        let mode = k as i64 - half;
        if mode.unsigned_abs() as usize <= degree {
            let &(re, im) = it.next().unwrap();
            *c = c64(re, im);
        }
    }
    from_fourier(&FourierRep {
        grid: Arc::clone(grid),
        coeffs,
        tail_mass: 0.0,
        band_limited: true,
    })
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let literal = prop_oneof![
        (0.0f64..4.0).prop_map(|x| Expr::Literal(c64(x, 0.0))),
        (0.0f64..4.0).prop_map(|x| Expr::Literal(c64(0.0, x))),
        Just(Expr::VarT),
        Just(Expr::VarTau),
    ];
    literal.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), -3i64..=3).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
            (
                inner,
                prop_oneof![
                    Just(Func::Conj),
                    Just(Func::Re),
                    Just(Func::Im),
                    Just(Func::Exp)
                ]
            )
                .prop_map(|(a, f)| Expr::Call(f, Box::new(a))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Pretty-printing then reparsing preserves the expression's value, and
    /// the printer is a fixed point of parse-then-print.
    #[test]
    fn expression_roundtrip(expr in arb_expr()) {
        let printed = expr.to_string();
        let reparsed = parse(&printed)
            .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
        prop_assert_eq!(reparsed.to_string(), printed.clone());

        let t = c64(0.83, 0.41);
        let tau = c64(-0.37, 0.92);
        match (expr.evaluate(t, Some(tau)), reparsed.evaluate(t, Some(tau))) {
            (Ok(a), Ok(b)) => {
                let scale = a.norm().max(1.0);
                prop_assert!((a - b).norm() < 1e-9 * scale, "{printed}: {a} vs {b}");
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "divergent outcomes for `{printed}`: {a:?} vs {b:?}"),
        }
    }

    /// Discrete Parseval identity between samples and coefficients.
    #[test]
    fn parseval(values in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64)) {
        let grid = circle(64);
        let f = SampledFunction::new(
            Arc::clone(&grid),
            values.iter().map(|&(re, im)| c64(re, im)).collect(),
        ).unwrap();
        let rep = to_fourier(&f);
        let lhs: f64 = f.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / 64.0;
        let rhs: f64 = rep.coeffs.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(1.0));
    }

    /// Composing with a Carleman shift twice is the identity on functions.
    #[test]
    fn shift_composition_involution(
        raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9),
        which in 0usize..3,
    ) {
        let grid = circle(64);
        let kind = match which {
            0 => ShiftKind::Antipodal,
            1 => ShiftKind::Reflection { c: 0.0 },
            _ => ShiftKind::Reflection { c: 0.777 },
        };
        let kind = match kind {
            // Exercise the interpolating path through custom samples.
            ShiftKind::Reflection { c } if c != 0.0 => ShiftKind::Custom {
                sigma_samples: grid.thetas.iter().map(|&t| c - t).collect(),
            },
            k => k,
        };
        let shift = induce_shift(&grid, &kind).unwrap();
        let f = band_limited(&grid, &raw, 4);
        let twice = compose_shift(&compose_shift(&f, &shift).unwrap(), &shift).unwrap();
        let scale = f.max_abs().max(1.0);
        for j in 0..grid.n {
            prop_assert!((twice.values[j] - f.values[j]).norm() <= 1e-10 * scale);
        }
    }

    /// The Cauchy operator is an involution on band-limited functions.
    #[test]
    fn cauchy_squares_to_identity(
        raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 11),
        mode in prop_oneof![Just(CauchyMode::SpectralCircle), Just(CauchyMode::Nystrom)],
    ) {
        let grid = circle(64);
        let s = cauchy_sample(&grid, mode).unwrap();
        let f = band_limited(&grid, &raw, 8);
        let ss = s.apply(&s.apply(&f).unwrap()).unwrap();
        let scale = f.max_abs().max(1.0);
        for j in 0..grid.n {
            prop_assert!((ss.values[j] - f.values[j]).norm() <= 1e-8 * scale);
        }
    }

    /// Winding numbers add under pointwise products, and survive grid
    /// refinement, for dominated perturbations of monomials.
    #[test]
    fn winding_additivity_and_refinement(
        k1 in -3i64..=3,
        k2 in -3i64..=3,
        eps in 0.0f64..0.6,
    ) {
        for n in [64usize, 128] {
            let grid = circle(n);
            let f: Vec<Complex64> = grid
                .nodes
                .iter()
                .map(|&t| t.powi(k1 as i32) * (1.0 + eps * t))
                .collect();
            let g: Vec<Complex64> = grid
                .nodes
                .iter()
                .map(|&t| t.powi(k2 as i32) * (2.0 + t))
                .collect();
            let product: Vec<Complex64> = f.iter().zip(&g).map(|(&a, &b)| a * b).collect();
            let (wf, _) = winding_number(&f, 1e-12).unwrap();
            let (wg, _) = winding_number(&g, 1e-12).unwrap();
            let (wp, _) = winding_number(&product, 1e-12).unwrap();
            prop_assert_eq!(wf, k1);
            prop_assert_eq!(wg, k2);
            prop_assert_eq!(wp, wf + wg);
        }
    }
}
