use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use compass::error::Error;
use compass::harness::document::ProblemDocument;
use compass::harness::generate::{generate, GeneratorSpec, Structure};
use compass::harness::run::{run, Algorithm, RunOptions};
use compass::harness::verify::{parse_seeds, verify, VerifyOptions, VerifyTarget};
use compass::trace::write_trace;

const EXIT_OTHER: u8 = 1;
const EXIT_INCOMPATIBLE: u8 = 3;
const EXIT_VERIFY_FAILED: u8 = 4;

#[derive(Parser)]
#[command(name = "compass", version, about = "Generate composite problems, run first-order solvers and verify their guarantees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StructureArg {
    Dense,
    Diagonal,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded problem file.
    Generate {
        #[arg(long, default_value = "quadratic")]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// log-uniform:A:B, log-spaced:A:B, clustered:A:B, one-negative:C:L,
        /// singular:A:B, distinct:M:A:B or identity
        #[arg(long)]
        spectrum: String,
        /// zero, ball:R, l1:W or box:LO:HI
        #[arg(long)]
        psi: String,
        #[arg(long, value_enum, default_value = "dense")]
        structure: StructureArg,
        /// Explicit linear term, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b: Option<Vec<f64>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run one solver and write its trace.
    Run {
        #[arg(long)]
        algo: Algorithm,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        problem: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check every proven inequality over seeded instances.
    Verify {
        /// An algorithm name or `chebyshev`.
        #[arg(long)]
        algo: VerifyTarget,
        #[arg(long, default_value = "1..20")]
        seeds: String,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Halve c_k in the Chebyshev checks; the report must then fail.
        #[arg(long)]
        negative_control: bool,
        problem: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn emit(output: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout().write_all(bytes).context("writing stdout"),
    }
}

fn load(path: &PathBuf) -> Result<ProblemDocument> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ProblemDocument::from_json(&text)?)
}

fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Generate { kind, n, seed, spectrum, psi, structure, b, output } => {
            let mut spec = GeneratorSpec::new(n, seed, &spectrum, &psi);
            spec.kind = kind;
            if let StructureArg::Diagonal = structure {
                spec.structure = Structure::Diagonal;
            }
            spec.b = b;
            let doc = generate(&spec)?;
            emit(&output, format!("{}\n", doc.to_json()).as_bytes())?;
            Ok(0)
        }
        Command::Run { algo, max_iters, tol, problem, output } => {
            let p = load(&problem)?.to_problem()?;
            let outcome = run(&p, algo, &RunOptions { max_iters, tol, x0: None })?;
            let mut buf = Vec::new();
            write_trace(&mut buf, &outcome.records)?;
            emit(&output, &buf)?;
            Ok(outcome.status.exit_code() as u8)
        }
        Command::Verify { algo, seeds, max_iters, tol, negative_control, problem, output } => {
            let doc = load(&problem)?;
            let seeds = parse_seeds(&seeds)?;
            let opts = VerifyOptions { max_iters, tol, negative_control, threads: None };
            let report = verify(&doc, algo, &seeds, &opts)?;
            emit(&output, format!("{}\n", report.to_json()).as_bytes())?;
            for c in report.failed() {
                eprintln!("FAIL {} seed {}: worst violation {:e}", c.check_name, c.seed, c.worst_violation);
            }
            Ok(if report.passed { 0 } else { EXIT_VERIFY_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Incompatible(_)) => ExitCode::from(EXIT_INCOMPATIBLE),
                _ => ExitCode::from(EXIT_OTHER),
            }
        }
    }
}
