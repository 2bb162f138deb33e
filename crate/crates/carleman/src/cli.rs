//! Command dispatch and machine-readable reporting.
//!
//! Commands take a problem file and produce a JSON report on standard
//! output. Exit codes are bijective with report verdicts:
//!
//! | code | verdict        | meaning                                   |
//! |------|----------------|-------------------------------------------|
//! | 0    | `noetherian` / `ok` | command succeeded                    |
//! | 1    | `failed`       | a verification check did not hold         |
//! | 2    | `violated`     | Noether condition violated                |
//! | 3    | `inconclusive` | resolution insufficient (phase jump or    |
//! |      |                | unreliable spectral gap)                  |
//! | 4    | `input_error`  | malformed problem file or expression      |

use crate::error::{Error, Result};
use crate::fredholm::{index_report, noether_check, NoetherReport, Verdict};
use crate::numerics::{null_count, singular_values, solve};
use crate::problem::ProblemSpec;
use crate::shift_system::{build_system_fields, Assembler, DeterminantFields, OperatorKind};
use crate::verify::{run_suite, Suite};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Nonvanishing of the determinant fields.
    Check,
    /// Analytic index from winding numbers.
    Index,
    /// Least-squares solve with solvability conditions.
    Solve,
    /// Verification suites.
    Verify,
    /// Singular values of the discretized operators.
    Spectrum,
}

impl Command {
    pub fn from_name(name: &str) -> Option<Command> {
        match name {
            "check" => Some(Command::Check),
            "index" => Some(Command::Index),
            "solve" => Some(Command::Solve),
            "verify" => Some(Command::Verify),
            "spectrum" => Some(Command::Spectrum),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Index => "index",
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Spectrum => "spectrum",
        }
    }
}

/// Command-line options shared by all commands.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    /// Dump sampled determinant fields to this CSV path.
    pub csv: Option<PathBuf>,
    /// Override `(modes, collocation)`.
    pub resolution: Option<(usize, usize)>,
    /// Tolerance overrides by name.
    pub tol_overrides: Vec<(String, f64)>,
    /// Suite selection for `verify`.
    pub suite: Option<Suite>,
}

/// Exit code plus the JSON report.
#[derive(Debug, Clone)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub report: Value,
}

fn complex_json(v: Complex64) -> Value {
    json!([v.re, v.im])
}

fn noether_json(report: &NoetherReport) -> Value {
    let mut min_abs = serde_json::Map::new();
    let mut argmin = serde_json::Map::new();
    for field in &report.minima {
        min_abs.insert(field.name.into(), json!(field.min_abs));
        argmin.insert(field.name.into(), json!(field.argmin_node));
    }
    json!({
        "verdict": report.verdict.as_str(),
        "tol_det": report.tol_det,
        "threshold": report.threshold,
        "min_abs": Value::Object(min_abs),
        "argmin_node": Value::Object(argmin),
    })
}

fn verdict_for_exit(code: i32) -> &'static str {
    match code {
        0 => "ok",
        1 => "failed",
        2 => "violated",
        3 => "inconclusive",
        _ => "input_error",
    }
}

/// Run one command against a validated problem.
///
/// Never returns `Err`; failures are encoded in the exit code and report.
pub fn run_command(command: Command, spec: &ProblemSpec, flags: &Flags) -> CommandOutcome {
    match dispatch(command, spec, flags) {
        Ok(outcome) => outcome,
        Err(e) => {
            let code = e.exit_code();
            CommandOutcome {
                exit_code: code,
                report: json!({
                    "command": command.name(),
                    "verdict": verdict_for_exit(code),
                    "error": e.to_string(),
                }),
            }
        }
    }
}

fn dispatch(command: Command, base: &ProblemSpec, flags: &Flags) -> Result<CommandOutcome> {
    let mut spec = base.clone();
    if let Some((m, n)) = flags.resolution {
        spec.modes = m;
        spec.collocation = n;
        if n < 4 * m {
            return Err(Error::Schema {
                pointer: "/discretization".into(),
                detail: format!("collocation {n} is below 4 x {m} trial modes"),
            });
        }
    }
    for (name, value) in &flags.tol_overrides {
        spec.tolerances.set(name, *value)?;
    }

    let coeffs = spec.build()?;
    let fields = build_system_fields(&coeffs)?;
    let noether = noether_check(&fields, spec.tolerances.tol_det);

    if let Some(path) = &flags.csv {
        write_csv(path, &fields)?;
    }

    // Data that is not band-limited on this grid degrades every interpolated
    // quantity; surface it instead of failing.
    let mut warnings = Vec::new();
    for (name, rep) in ["a", "b", "c", "d", "rhs"].iter().zip(&coeffs.fourier) {
        if !rep.band_limited {
            warnings.push(format!(
                "{name} is not band-limited on this grid (relative tail mass {:.3e})",
                rep.tail_mass
            ));
        }
    }

    let mut report = serde_json::Map::new();
    report.insert("command".into(), json!(command.name()));
    report.insert("gamma".into(), json!(coeffs.shift.orientation.gamma()));
    report.insert("noether".into(), noether_json(&noether));
    // Filled in by the index command; explicit nulls otherwise.
    report.insert(
        "index".into(),
        json!({
            "ind_M": null,
            "ind_L": null,
            "max_phase_jump": null,
            "reason": format!("not computed by `{}`", command.name()),
        }),
    );
    report.insert(
        "diagnostics".into(),
        json!({
            "modes": spec.modes,
            "collocation": spec.collocation,
            "coefficient_degree": coeffs.coefficient_degree(),
            "warnings": warnings,
        }),
    );

    // Everything beyond `check` requires a Noetherian problem.
    let noether_gate = |report: &mut serde_json::Map<String, Value>| -> Option<CommandOutcome> {
        match noether.verdict {
            Verdict::Noetherian => None,
            Verdict::Violated => {
                report.insert("verdict".into(), json!("violated"));
                Some(CommandOutcome {
                    exit_code: 2,
                    report: Value::Object(report.clone()),
                })
            }
            Verdict::Inconclusive => {
                report.insert("verdict".into(), json!("inconclusive"));
                Some(CommandOutcome {
                    exit_code: 3,
                    report: Value::Object(report.clone()),
                })
            }
        }
    };

    match command {
        Command::Check => {
            let (verdict, code) = match noether.verdict {
                Verdict::Noetherian => ("noetherian", 0),
                Verdict::Violated => ("violated", 2),
                Verdict::Inconclusive => ("inconclusive", 3),
            };
            report.insert("verdict".into(), json!(verdict));
            Ok(CommandOutcome {
                exit_code: code,
                report: Value::Object(report),
            })
        }
        Command::Index => {
            if let Some(out) = noether_gate(&mut report) {
                return Ok(out);
            }
            let analytic = index_report(&fields, spec.tolerances.tol_det)?;
            report.insert(
                "index".into(),
                json!({
                    "ind_M": analytic.ind_m,
                    "ind_L": analytic.ind_l,
                    "max_phase_jump": analytic.max_phase_jump,
                    "winding_det_d": analytic.winding_det_d,
                    "winding_det_c": analytic.winding_det_c,
                    "winding_named": analytic.winding_named,
                }),
            );
            report.insert("verdict".into(), json!("noetherian"));
            Ok(CommandOutcome {
                exit_code: 0,
                report: Value::Object(report),
            })
        }
        Command::Solve => {
            if let Some(out) = noether_gate(&mut report) {
                return Ok(out);
            }
            let assembler = Assembler::new(&coeffs)?;
            let m_op = assembler.operator(OperatorKind::M, spec.modes)?;
            let m_union = assembler.operator(OperatorKind::MUnion, spec.modes)?;
            let policy = spec.tolerances.policy();
            let kernel = null_count(&m_op, &policy)?;
            let cokernel = null_count(&m_union, &policy)?;
            if !kernel.reliable || !cokernel.reliable {
                return Err(Error::InconclusiveIndex {
                    detail: "kernel counting gap is unreliable; raise the resolution".into(),
                });
            }
            let outcome = solve(
                &m_op,
                &coeffs.g.values,
                &cokernel,
                &policy,
                spec.tolerances.tol_solve,
            )?;
            report.insert(
                "nullspace".into(),
                json!({
                    "l1": kernel.dimension,
                    "l1_star": cokernel.dimension,
                    "gap_ratio": kernel.gap_ratio,
                    "gap_ratio_star": cokernel.gap_ratio,
                }),
            );
            report.insert(
                "solve".into(),
                json!({
                    "residual": outcome.relative_residual,
                    "solvable": outcome.solvable,
                    "conditions": outcome.conditions.iter().copied().map(complex_json).collect::<Vec<_>>(),
                    "normalized_conditions": outcome.normalized_conditions,
                    "solution_coefficients": outcome.solution.iter().copied().map(complex_json).collect::<Vec<_>>(),
                }),
            );
            report.insert("verdict".into(), json!("ok"));
            Ok(CommandOutcome {
                exit_code: 0,
                report: Value::Object(report),
            })
        }
        Command::Verify => {
            if let Some(out) = noether_gate(&mut report) {
                return Ok(out);
            }
            let suite = flags.suite.unwrap_or(Suite::All);
            let outcome = run_suite(&spec, suite)?;
            let passed = outcome.passed;
            report.insert("verification".into(), serde_json::to_value(&outcome)?);
            report.insert(
                "verdict".into(),
                json!(if passed { "ok" } else { "failed" }),
            );
            Ok(CommandOutcome {
                exit_code: if passed { 0 } else { 1 },
                report: Value::Object(report),
            })
        }
        Command::Spectrum => {
            if let Some(out) = noether_gate(&mut report) {
                return Ok(out);
            }
            let assembler = Assembler::new(&coeffs)?;
            let mut spectra = serde_json::Map::new();
            for (kind, name) in [
                (OperatorKind::M, "M"),
                (OperatorKind::MUnion, "M_union"),
                (OperatorKind::LSystem, "L_system"),
            ] {
                let op = assembler.operator(kind, spec.modes)?;
                spectra.insert(name.into(), json!(singular_values(&op.matrix)));
            }
            report.insert("spectrum".into(), Value::Object(spectra));
            report.insert("verdict".into(), json!("ok"));
            Ok(CommandOutcome {
                exit_code: 0,
                report: Value::Object(report),
            })
        }
    }
}

/// Dump the sampled determinant fields for plotting.
fn write_csv(path: &PathBuf, fields: &crate::shift_system::SystemFields) -> Result<()> {
    let mut out = std::fs::File::create(path)?;
    let named: Vec<(&str, &[Complex64])> = match &fields.delta {
        DeterminantFields::Preserving { delta1, delta2 } => vec![
            ("delta1", delta1.values.as_slice()),
            ("delta2", delta2.values.as_slice()),
        ],
        DeterminantFields::Reversing { delta } => vec![("delta", delta.values.as_slice())],
    };
    let mut header =
        String::from("node,theta,t_re,t_im,det_c_re,det_c_im,det_d_re,det_d_im,quotient_arg");
    for (name, _) in &named {
        header.push_str(&format!(",{name}_re,{name}_im,{name}_abs,{name}_arg"));
    }
    writeln!(out, "{header}")?;
    let grid = &fields.grid;
    for j in 0..grid.n {
        let t = grid.nodes[j];
        let det_c = fields.det_c.values[j];
        let det_d = fields.det_d.values[j];
        let quotient_arg = (det_d / det_c).arg();
        let mut line = format!(
            "{j},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            grid.thetas[j], t.re, t.im, det_c.re, det_c.im, det_d.re, det_d.im, quotient_arg
        );
        for (_, values) in &named {
            let v = values[j];
            line.push_str(&format!(
                ",{:.17e},{:.17e},{:.17e},{:.17e}",
                v.re,
                v.im,
                v.norm(),
                v.arg()
            ));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
