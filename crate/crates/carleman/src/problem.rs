//! Problem files: the JSON description of one equation, its validation, and
//! sampling into a [`CoefficientSet`].
//!
//! ```json
//! {
//!   "contour": {"type": "unit_circle"},
//!   "shift": {"type": "antipodal"},
//!   "coefficients": {"a": "1", "b": "0", "c": "0", "d": "0"},
//!   "rhs": "t",
//!   "kernel": {"expr": "0.1*t/tau"},
//!   "discretization": {"modes": 16, "collocation": 128},
//!   "tolerances": {"tol_det": 1e-8}
//! }
//! ```
//!
//! `contour.type` is `unit_circle` or `fourier` (with `coeffs` a list of
//! `[re, im]` pairs for the modes `-floor(L/2) .. L-1-floor(L/2)`);
//! `shift.type` is `identity`, `antipodal`, `reflection` (optional `c`) or
//! `custom` (with `sigma_samples`, one parameter value per node).
//! Coefficient and right-hand-side expressions use the variable `t`; the
//! kernel may also use `tau`.

use crate::error::{Error, Result};
use crate::exprparse::{parse, Expr};
use crate::funcspace::SampledFunction;
use crate::geometry::{contour_sample, induce_shift, Contour, ShiftKind};
use crate::matrix::c64;
use crate::shift_system::CoefficientSet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ContourSpec {
    UnitCircle,
    Fourier { coeffs: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShiftSpec {
    Identity,
    Antipodal,
    Reflection {
        #[serde(default)]
        c: f64,
    },
    Custom {
        sigma_samples: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub expr: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSpec {
    /// Trial modes `m`; the trial dimension is `2 m + 1`.
    pub modes: usize,
    /// Collocation count `N`; must be even and at least `4 m`.
    pub collocation: usize,
}

/// Numerical thresholds, all overridable from the problem file or the
/// command line. Geometry validation tolerances are fixed constants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative nonvanishing threshold for determinant fields.
    pub tol_det: f64,
    /// Relative singular-value cut for rank decisions.
    pub rel_factor: f64,
    /// Absolute singular-value floor.
    pub abs_floor: f64,
    /// Minimum spectral gap ratio for a reliable kernel count.
    pub gap_min: f64,
    /// Residual and orthogonality threshold for solvability.
    pub tol_solve: f64,
    /// Function-norm tolerance for null-basis structure checks.
    pub tol_structural: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_det: 1e-8,
            rel_factor: 1e-8,
            abs_floor: 1e-12,
            gap_min: 1e3,
            tol_solve: 1e-8,
            tol_structural: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "tol_det" => self.tol_det = value,
            "rel_factor" => self.rel_factor = value,
            "abs_floor" => self.abs_floor = value,
            "gap_min" => self.gap_min = value,
            "tol_solve" => self.tol_solve = value,
            "tol_structural" => self.tol_structural = value,
            _ => {
                return Err(Error::Schema {
                    pointer: "/tolerances".into(),
                    detail: format!("unknown tolerance `{name}`"),
                })
            }
        }
        Ok(())
    }

    pub fn policy(&self) -> crate::numerics::ThresholdPolicy {
        crate::numerics::ThresholdPolicy {
            rel_factor: self.rel_factor,
            abs_floor: self.abs_floor,
            gap_min: self.gap_min,
        }
    }
}

/// Raw problem file contents.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub contour: ContourSpec,
    pub shift: ShiftSpec,
    pub coefficients: CoefficientSpec,
    pub rhs: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    pub discretization: DiscretizationSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

/// A validated problem: expressions parsed, shapes checked.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub file: ProblemFile,
    pub contour: Contour,
    pub shift_kind: ShiftKind,
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    pub d: Expr,
    pub rhs: Expr,
    pub kernel: Option<Expr>,
    pub modes: usize,
    pub collocation: usize,
    pub tolerances: Tolerances,
}

fn parse_coefficient(src: &str, pointer: &str) -> Result<Expr> {
    let expr = parse(src).map_err(|e| match e {
        Error::Syntax { offset, expected } => Error::Schema {
            pointer: pointer.to_owned(),
            detail: format!("syntax error at offset {offset}: expected {expected}"),
        },
        Error::NonIntegerExponent { offset } => Error::Schema {
            pointer: pointer.to_owned(),
            detail: format!("non-integer exponent at offset {offset}"),
        },
        other => other,
    })?;
    if expr.references_tau() && !pointer.ends_with("kernel/expr") {
        return Err(Error::Schema {
            pointer: pointer.to_owned(),
            detail: "`tau` is only available in kernel expressions".into(),
        });
    }
    Ok(expr)
}

/// Parse and validate a problem from JSON text.
pub fn parse_problem(json: &str) -> Result<ProblemSpec> {
    let mut deserializer = serde_json::Deserializer::from_str(json);
    let file: ProblemFile =
        serde_path_to_error::deserialize(&mut deserializer).map_err(|e| Error::Schema {
            pointer: format!("/{}", e.path().to_string().replace('.', "/")),
            detail: e.inner().to_string(),
        })?;
    validate_problem(file)
}

fn validate_problem(file: ProblemFile) -> Result<ProblemSpec> {
    let contour = match &file.contour {
        ContourSpec::UnitCircle => Contour::UnitCircle,
        ContourSpec::Fourier { coeffs } => {
            if coeffs.is_empty() {
                return Err(Error::Schema {
                    pointer: "/contour/coeffs".into(),
                    detail: "at least one Fourier coefficient is required".into(),
                });
            }
            Contour::Fourier {
                coeffs: coeffs.iter().map(|&[re, im]| c64(re, im)).collect(),
            }
        }
    };
    let shift_kind = match &file.shift {
        ShiftSpec::Identity => ShiftKind::Identity,
        ShiftSpec::Antipodal => ShiftKind::Antipodal,
        ShiftSpec::Reflection { c } => ShiftKind::Reflection { c: *c },
        ShiftSpec::Custom { sigma_samples } => ShiftKind::Custom {
            sigma_samples: sigma_samples.clone(),
        },
    };

    let a = parse_coefficient(&file.coefficients.a, "/coefficients/a")?;
    let b = parse_coefficient(&file.coefficients.b, "/coefficients/b")?;
    let c = parse_coefficient(&file.coefficients.c, "/coefficients/c")?;
    let d = parse_coefficient(&file.coefficients.d, "/coefficients/d")?;
    let rhs = parse_coefficient(&file.rhs, "/rhs")?;
    let kernel = file
        .kernel
        .as_ref()
        .map(|k| parse_coefficient(&k.expr, "/kernel/expr"))
        .transpose()?;

    let modes = file.discretization.modes;
    let collocation = file.discretization.collocation;
    if modes == 0 {
        return Err(Error::Schema {
            pointer: "/discretization/modes".into(),
            detail: "at least one trial mode is required".into(),
        });
    }
    if collocation < 4 * modes {
        return Err(Error::Schema {
            pointer: "/discretization/collocation".into(),
            detail: format!("collocation {collocation} is below 4 x {modes} trial modes"),
        });
    }
    let tolerances = file.tolerances.unwrap_or_default();

    Ok(ProblemSpec {
        file,
        contour,
        shift_kind,
        a,
        b,
        c,
        d,
        rhs,
        kernel,
        modes,
        collocation,
        tolerances,
    })
}

/// Load a problem from a JSON file.
pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text)
}

impl ProblemSpec {
    /// Sample the problem at its own discretization.
    pub fn build(&self) -> Result<CoefficientSet> {
        self.build_at(self.collocation)
    }

    /// Sample the problem on an `n`-point grid.
    pub fn build_at(&self, n: usize) -> Result<CoefficientSet> {
        let grid = contour_sample(&self.contour, n)?;
        // A custom shift is sampled at the file's own resolution; refining
        // the grid interpolates its periodic part.
        let kind = match (&self.shift_kind, n == self.collocation) {
            (ShiftKind::Custom { sigma_samples }, false) => {
                let resampled = resample_sigma(sigma_samples, n)?;
                ShiftKind::Custom {
                    sigma_samples: resampled,
                }
            }
            (kind, _) => kind.clone(),
        };
        let shift = induce_shift(&grid, &kind)?;

        let sample_expr = |expr: &Expr, pointer: &str| -> Result<SampledFunction> {
            let mut values = Vec::with_capacity(grid.n);
            for &t in &grid.nodes {
                let v = expr.evaluate(t, None).map_err(|e| Error::Schema {
                    pointer: pointer.to_owned(),
                    detail: format!("evaluation failed at t = {t}: {e}"),
                })?;
                values.push(v);
            }
            SampledFunction::new(Arc::clone(&grid), values)
        };

        CoefficientSet::new(
            Arc::clone(&grid),
            shift,
            sample_expr(&self.a, "/coefficients/a")?,
            sample_expr(&self.b, "/coefficients/b")?,
            sample_expr(&self.c, "/coefficients/c")?,
            sample_expr(&self.d, "/coefficients/d")?,
            sample_expr(&self.rhs, "/rhs")?,
            self.kernel.clone(),
        )
    }
}

/// Trigonometric resampling of custom shift samples onto a finer grid.
fn resample_sigma(sigma: &[f64], n: usize) -> Result<Vec<f64>> {
    use std::f64::consts::TAU;
    let old_n = sigma.len();
    if old_n == 0 || old_n % 2 != 0 {
        return Err(Error::Schema {
            pointer: "/shift/sigma_samples".into(),
            detail: "custom shift needs an even, nonzero sample count".into(),
        });
    }
    // Split off the winding slope, interpolate the periodic remainder.
    let reduced: Vec<f64> = sigma.iter().map(|s| s.rem_euclid(TAU)).collect();
    let mut increments = Vec::with_capacity(old_n);
    for j in 0..old_n {
        let mut d = (reduced[(j + 1) % old_n] - reduced[j]).rem_euclid(TAU);
        if d > std::f64::consts::PI {
            d -= TAU;
        }
        increments.push(d);
    }
    let total: f64 = increments.iter().sum();
    let gamma = if total > 0.0 { 1.0 } else { -1.0 };
    let mut lift = Vec::with_capacity(old_n);
    let mut acc = reduced[0];
    lift.push(acc);
    for j in 0..old_n - 1 {
        acc += increments[j];
        lift.push(acc);
    }
    let periodic: Vec<Complex64> = lift
        .iter()
        .enumerate()
        .map(|(j, &l)| c64(l - gamma * TAU * j as f64 / old_n as f64, 0.0))
        .collect();
    let coeffs = crate::fft::to_centered_coeffs(&periodic);
    Ok((0..n)
        .map(|j| {
            let theta = TAU * j as f64 / n as f64;
            gamma * theta + crate::fft::eval_centered(&coeffs, theta).re
        })
        .collect())
}
