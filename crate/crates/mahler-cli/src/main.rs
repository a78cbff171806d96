//! Command-line interface for the p-Mahler toolkit.
//!
//! One job per invocation; deterministic output for a fixed job. Exit codes:
//! 0 success, 2 parse error, 3 precision error, 4 unsupported splitting,
//! 5 no relation found.

use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mahler_cli::commands::{self, JobSpec, OutputFormat};

#[derive(Parser)]
#[command(name = "mahler", about = "Exact solver and growth classifier for p-Mahler functional equations", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Substitution order p (used when the expression has no `@ p=` clause).
    #[arg(long, global = true, default_value_t = 2)]
    p: u32,
    /// Truncation precision in exponent units.
    #[arg(long, global = true, default_value_t = 12)]
    precision: i64,
    /// Expansion window as `lo,eps` (rationals).
    #[arg(long, global = true, value_name = "LO,EPS")]
    window: Option<String>,
    /// Maximal operator order for guessing.
    #[arg(long, global = true, default_value_t = 3)]
    max_order: usize,
    /// Maximal coefficient degree for guessing.
    #[arg(long, global = true, default_value_t = 4)]
    max_degree: usize,
    /// Output format: text, json or tsv-plot.
    #[arg(long, global = true, default_value = "text")]
    format: String,
    /// Inline input expression (alternative to a file path argument).
    #[arg(long, global = true)]
    expr: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solution basis of a Mahler equation.
    Solve { input: Option<String> },
    /// Reduce the companion system to constant form; emits the gauge bundle.
    Reduce { input: Option<String> },
    /// Newton polygon data (slopes, multiplicities, exponents).
    Newton { input: Option<String> },
    /// Slope factorization into first-order pieces.
    Factor { input: Option<String> },
    /// Guess a candidate minimal operator from series coefficients.
    Guess { input: Option<String> },
    /// Empirical growth class and denominator certification of a series.
    Classify { input: Option<String> },
    /// Purity report: classify a full solution basis against the input.
    Purity {
        input: Option<String>,
        /// A non-minimal equation to use instead of guessing.
        #[arg(long)]
        equation: Option<String>,
    },
    /// Xi-algebra operations: standardize, expand, annihilator.
    Xi { action: String, input: Option<String> },
    /// Run the built-in regression pack and print a pass/fail table.
    VerifyPaper,
}

fn load_input(path: &Option<String>, expr: &Option<String>) -> Result<String, String> {
    match (path, expr) {
        (_, Some(e)) => Ok(e.clone()),
        (Some(p), None) => {
            if p == "-" {
                let mut buf = String::new();
                std::io::stdin().read_to_string(&mut buf).map_err(|e| e.to_string())?;
                Ok(buf)
            } else {
                std::fs::read_to_string(p).map_err(|e| format!("cannot read {p}: {e}"))
            }
        }
        (None, None) => Err("no input: pass a file path or --expr".into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = match cli.format.as_str() {
        "text" => OutputFormat::Text,
        "json" => OutputFormat::Json,
        "tsv-plot" => OutputFormat::TsvPlot,
        other => {
            eprintln!("unknown format '{other}'");
            return ExitCode::from(2);
        }
    };
    let mut spec = JobSpec {
        p: cli.p,
        precision: cli.precision,
        max_order: cli.max_order,
        max_degree: cli.max_degree,
        format,
        ..JobSpec::default()
    };
    if let Some(w) = &cli.window {
        let Some((lo, eps)) = w.split_once(',') else {
            eprintln!("--window expects 'lo,eps'");
            return ExitCode::from(2);
        };
        match (mahler_cli::jsonio::q_from_string(lo), mahler_cli::jsonio::q_from_string(eps)) {
            (Ok(lo), Ok(eps)) => {
                spec.window_lo = lo;
                spec.window_eps = eps;
            }
            _ => {
                eprintln!("--window expects rational 'lo,eps'");
                return ExitCode::from(2);
            }
        }
    }
    let run = || -> commands::CmdResult {
        match &cli.command {
            Command::Solve { input } => {
                commands::cmd_solve(&load_input(input, &cli.expr).map_err(|e| (2, e))?, &spec)
            }
            Command::Reduce { input } => {
                commands::cmd_reduce(&load_input(input, &cli.expr).map_err(|e| (2, e))?, &spec)
            }
            Command::Newton { input } => {
                commands::cmd_newton(&load_input(input, &cli.expr).map_err(|e| (2, e))?, &spec)
            }
            Command::Factor { input } => {
                commands::cmd_factor(&load_input(input, &cli.expr).map_err(|e| (2, e))?, &spec)
            }
            Command::Guess { input } => {
                commands::cmd_guess(&load_input(input, &cli.expr).map_err(|e| (2, e))?, &spec)
            }
            Command::Classify { input } => {
                commands::cmd_classify(&load_input(input, &cli.expr).map_err(|e| (2, e))?, &spec)
            }
            Command::Purity { input, equation } => commands::cmd_purity(
                &load_input(input, &cli.expr).map_err(|e| (2, e))?,
                &spec,
                equation.as_deref(),
            ),
            Command::Xi { action, input } => commands::cmd_xi(
                action,
                &load_input(input, &cli.expr).map_err(|e| (2, e))?,
                &spec,
            ),
            Command::VerifyPaper => commands::cmd_verify_paper(),
        }
    };
    match run() {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err((code, msg)) => {
            eprint!("{msg}");
            if !msg.ends_with('\n') {
                eprintln!();
            }
            ExitCode::from(code as u8)
        }
    }
}
