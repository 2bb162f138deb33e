//! Noetherian solvability analysis for singular integral equations with a
//! Carleman shift on closed contours.
//!
//! The equation under study, on a smooth closed contour with the
//! principal-value Cauchy integral and a shift `alpha(alpha(t)) = t`, is
//!
//! ```text
//! a phi + b (phi o alpha) + c S phi + d (S phi) o alpha
//!   + integral K(., tau) phi(tau) dtau = g.
//! ```
//!
//! The crate decides whether such an equation is Noetherian (normally
//! solvable with finite kernel and cokernel), computes its index from
//! winding numbers of determinant fields, and cross-validates that analytic
//! index against kernel counts of rank-revealing rectangular
//! discretizations. See the guide in `book/` for a narrative tour; its code
//! blocks run as doctests of this crate.
//!
//! Module map:
//!
//! * [`geometry`] - contours, grids, Carleman shifts.
//! * [`funcspace`] - sampled and spectral function representations.
//! * [`exprparse`] - the coefficient expression language.
//! * [`singular_ops`] - Cauchy operator, projections, kernel quadratures.
//! * [`shift_system`] - derived coefficients, multiplier fields, the seven
//!   operator assemblies.
//! * [`fredholm`] - Noether checks, winding numbers, index, regularizer.
//! * [`numerics`] - SVD, kernel counting, least squares, compactness.
//! * [`verify`] - executable verification suites and the fixed corpus.
//! * [`problem`] / [`cli`] - JSON problem files, command dispatch, reports.

pub mod cli;
pub mod error;
pub mod exprparse;
mod fft;
pub mod fredholm;
pub mod funcspace;
pub mod geometry;
pub mod matrix;
pub mod numerics;
pub mod problem;
pub mod rng;
pub mod shift_system;
pub mod singular_ops;
pub mod verify;

pub use error::{Error, Result};

// The guide's code blocks are compiled and run by `cargo test --doc`, which
// keeps the book in sync with the crate.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub mod $name {}
        };
    }
    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(
        contours_and_shifts,
        "../../../book/src/contours-and-shifts.md"
    );
    chapter!(
        functions_on_the_contour,
        "../../../book/src/functions-on-the-contour.md"
    );
    chapter!(expressions, "../../../book/src/expressions.md");
    chapter!(cauchy_operator, "../../../book/src/cauchy-operator.md");
    chapter!(
        operators_with_shift,
        "../../../book/src/operators-with-shift.md"
    );
    chapter!(
        solvability_and_index,
        "../../../book/src/solvability-and-index.md"
    );
    chapter!(rank_and_kernels, "../../../book/src/rank-and-kernels.md");
    chapter!(verification, "../../../book/src/verification.md");
    chapter!(cli_reference, "../../../book/src/cli.md");
}
