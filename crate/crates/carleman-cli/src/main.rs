//! `carleman` - solvability analysis of singular integral equations with a
//! Carleman shift, from JSON problem files.

use carleman::cli::{run_command, Command, Flags};
use carleman::problem::load_problem;
use carleman::verify::Suite;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "carleman",
    about = "Noetherian solvability and index computation for singular integral equations with a Carleman shift",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Common {
    /// Problem file (JSON).
    problem: PathBuf,

    /// Write sampled determinant fields to a CSV file.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,

    /// Override the discretization as `<modes>,<collocation>`.
    #[arg(long, value_name = "M,N")]
    resolution: Option<String>,

    /// Override a tolerance as `name=value`; repeatable.
    #[arg(long, value_name = "NAME=VALUE")]
    tol: Vec<String>,
}

#[derive(Subcommand)]
enum Sub {
    /// Check the Noether (nonvanishing) conditions.
    Check(Common),
    /// Compute the analytic index from winding numbers.
    Index(Common),
    /// Solve in the least-squares sense and evaluate solvability conditions.
    Solve(Common),
    /// Run verification suites.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Suite: lemma1 | lemma2 | lemma3 | remark | index | all.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Emit singular values of the discretized operators.
    Spectrum(Common),
}

fn parse_flags(common: &Common, suite: Option<&str>) -> Result<Flags, String> {
    let resolution = match &common.resolution {
        None => None,
        Some(text) => {
            let parts: Vec<&str> = text.split(',').collect();
            if parts.len() != 2 {
                return Err(format!("--resolution expects `m,N`, got `{text}`"));
            }
            let m: usize = parts[0]
                .trim()
                .parse()
                .map_err(|_| format!("invalid mode count `{}`", parts[0]))?;
            let n: usize = parts[1]
                .trim()
                .parse()
                .map_err(|_| format!("invalid collocation count `{}`", parts[1]))?;
            Some((m, n))
        }
    };
    let mut tol_overrides = Vec::new();
    for spec in &common.tol {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| format!("--tol expects `name=value`, got `{spec}`"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("invalid tolerance value in `{spec}`"))?;
        tol_overrides.push((name.trim().to_owned(), value));
    }
    let suite = match suite {
        None => None,
        Some(name) => {
            Some(Suite::from_name(name).ok_or_else(|| format!("unknown suite `{name}`"))?)
        }
    };
    Ok(Flags {
        csv: common.csv.clone(),
        resolution,
        tol_overrides,
        suite,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, suite) = match &cli.command {
        Sub::Check(c) => (Command::Check, c, None),
        Sub::Index(c) => (Command::Index, c, None),
        Sub::Solve(c) => (Command::Solve, c, None),
        Sub::Verify { common, suite } => (Command::Verify, common, Some(suite.as_str())),
        Sub::Spectrum(c) => (Command::Spectrum, c, None),
    };

    let flags = match parse_flags(common, suite) {
        Ok(f) => f,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(4);
        }
    };

    let spec = match load_problem(&common.problem) {
        Ok(s) => s,
        Err(e) => {
            let report = serde_json::json!({
                "command": command.name(),
                "verdict": "input_error",
                "error": e.to_string(),
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("json"));
            return ExitCode::from(e.exit_code() as u8);
        }
    };

    let outcome = run_command(command, &spec, &flags);
    println!(
        "{}",
        serde_json::to_string_pretty(&outcome.report).expect("json")
    );
    ExitCode::from(outcome.exit_code as u8)
}
