//! Command-line front end.
//!
//! Exit codes: 0 success, 1 solver or verification failure, 2 usage or input
//! error. All indices in JSON output are 0-based.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::campaign::{run_bench, run_campaign, time_median, BenchConfig, Property, VerifyConfig};
use crate::error::Error;
use crate::io::{read_matrix_market, read_vector, write_matrix_market, write_vector};
use crate::oracle::{brute_force_solve, BruteForceOptions};
use crate::probgen::{gen_general_instance, gen_orthogonal_instance, GenConfig};
use crate::selector::{fast_sparse_solve, SolveMethod, SparseSolution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "orthosparse",
    version,
    about = "Best k-sparse least squares for orthogonal-column designs",
    after_help = "Indices in all JSON output are 0-based. Exit codes: 0 ok, 1 solver/verification failure, 2 usage/input error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance read from files
    Solve(SolveArgs),
    /// Generate a seeded instance and write it as files
    Gen(GenArgs),
    /// Run a seeded verification campaign
    Verify(VerifyArgs),
    /// Time the fast solver against the brute-force oracle
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Fast,
    Brute,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Orthogonal,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PropertyArg {
    Prop1,
    Prop2,
    Lemma1,
    Monotonicity,
}

impl From<PropertyArg> for Property {
    fn from(p: PropertyArg) -> Self {
        match p {
            PropertyArg::Prop1 => Property::Prop1,
            PropertyArg::Prop2 => Property::Prop2,
            PropertyArg::Lemma1 => Property::Lemma1,
            PropertyArg::Monotonicity => Property::Monotonicity,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Matrix Market array file holding A
    #[arg(long)]
    pub matrix: PathBuf,
    /// Right-hand side, one value per line
    #[arg(long)]
    pub rhs: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "fast")]
    pub method: MethodArg,
    /// Re-solve least squares on the selected support (fast method only)
    #[arg(long)]
    pub refit: bool,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Allow brute force beyond the subset-count guard
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "orthogonal")]
    pub kind: KindArg,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub scale_lo: f64,
    #[arg(long, default_value_t = 3.0)]
    pub scale_hi: f64,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// Output directory; receives A.mtx, y.txt and gen.json
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub property: PropertyArg,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 50)]
    pub m: usize,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults: prop1 1e-9, prop2 1e-8 (witness gap), lemma1 1e-10, monotonicity 1e-10
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    pub method: SolveMethod,
    pub refit: bool,
    pub support: Vec<usize>,
    pub values: Vec<f64>,
    pub residual: f64,
    pub timing_ms: f64,
}

impl SolutionReport {
    fn new(sol: SparseSolution, timing_ms: f64) -> Self {
        Self {
            method: sol.method,
            refit: sol.refit,
            support: sol.support.indices().to_vec(),
            values: sol.values,
            residual: sol.residual,
            timing_ms,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub solutions: Vec<SolutionReport>,
}

#[derive(Debug, Clone, Serialize)]
struct GenReport {
    kind: &'static str,
    config: GenConfig,
    matrix: PathBuf,
    rhs: PathBuf,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::Dimension(_)
        | Error::NonFinite(_)
        | Error::BadK { .. }
        | Error::InvalidSupport(_)
        | Error::EmptySupport
        | Error::TooManySubsets { .. } => EXIT_USAGE,
        Error::IllConditioned { .. } | Error::Inconsistency(_) | Error::Gen(_) => EXIT_FAILURE,
    }
}

fn fail(e: Error) -> i32 {
    eprintln!("error: {e}");
    exit_code(&e)
}

/// Prints the document on stdout and, when `out` is set, also writes it there.
fn emit<T: Serialize>(doc: &T, out: Option<&Path>) -> Result<(), i32> {
    let text = serde_json::to_string_pretty(doc).expect("reports serialize");
    if let Some(path) = out {
        std::fs::write(path, format!("{text}\n")).map_err(|e| {
            eprintln!("error: {}: {e}", path.display());
            EXIT_USAGE
        })?;
    }
    println!("{text}");
    Ok(())
}

fn cmd_solve(args: &SolveArgs) -> i32 {
    let a = match read_matrix_market(&args.matrix) {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    let y = match read_vector(&args.rhs) {
        Ok(y) => y,
        Err(e) => return fail(e),
    };
    if y.len() != a.rows() {
        return fail(Error::Dimension(format!(
            "rhs has {} entries, matrix has {} rows",
            y.len(),
            a.rows()
        )));
    }
    let opts = BruteForceOptions {
        workers: args.workers,
        allow_large: args.force,
    };
    let mut solutions = Vec::new();
    if matches!(args.method, MethodArg::Fast | MethodArg::Both) {
        match time_median(args.repeats, || {
            fast_sparse_solve(&a, &y, args.k, args.refit)
        }) {
            Ok((ms, sol)) => solutions.push(SolutionReport::new(sol, ms)),
            Err(e) => return fail(e),
        }
    }
    if matches!(args.method, MethodArg::Brute | MethodArg::Both) {
        match time_median(args.repeats, || brute_force_solve(&a, &y, args.k, opts)) {
            Ok((ms, sol)) => solutions.push(SolutionReport::new(sol, ms)),
            Err(e) => return fail(e),
        }
    }
    let report = SolveReport {
        m: a.rows(),
        n: a.cols(),
        k: args.k,
        solutions,
    };
    match emit(&report, args.out.as_deref()) {
        Ok(()) => EXIT_OK,
        Err(code) => code,
    }
}

fn cmd_gen(args: &GenArgs) -> i32 {
    let cfg = GenConfig {
        m: args.m,
        n: args.n,
        seed: args.seed,
        scale_range: (args.scale_lo, args.scale_hi),
        noise: args.noise,
    };
    let generated = match args.kind {
        KindArg::Orthogonal => gen_orthogonal_instance(&cfg),
        KindArg::General => gen_general_instance(&cfg),
    };
    let (a, y) = match generated {
        Ok(inst) => inst,
        Err(e) => return fail(e),
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("error: {}: {e}", args.out.display());
        return EXIT_USAGE;
    }
    let matrix = args.out.join("A.mtx");
    let rhs = args.out.join("y.txt");
    if let Err(e) = write_matrix_market(&matrix, &a).and_then(|_| write_vector(&rhs, &y)) {
        return fail(e);
    }
    let report = GenReport {
        kind: match args.kind {
            KindArg::Orthogonal => "orthogonal",
            KindArg::General => "general",
        },
        config: cfg,
        matrix,
        rhs,
    };
    match emit(&report, Some(&args.out.join("gen.json"))) {
        Ok(()) => EXIT_OK,
        Err(code) => code,
    }
}

fn cmd_verify(args: &VerifyArgs) -> i32 {
    let property = Property::from(args.property);
    let cfg = VerifyConfig {
        property,
        trials: args.trials,
        m: args.m,
        n: args.n,
        seed: args.seed,
        tol: args.tol.unwrap_or_else(|| property.default_tol()),
        workers: args.workers,
    };
    let report = match run_campaign(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    if let Err(code) = emit(&report, args.out.as_deref()) {
        return code;
    }
    eprintln!(
        "{property}: {} trials, {} failures, worst deviation {:e}",
        report.trials, report.failures, report.worst_deviation
    );
    if report.failures == 0 {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn cmd_bench(args: &BenchArgs) -> i32 {
    let cfg = BenchConfig {
        m: args.m,
        n: args.n,
        k: args.k,
        trials: args.trials,
        repeats: args.repeats.max(5),
        seed: args.seed,
        workers: args.workers,
        force: args.force,
    };
    let report = match run_bench(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    match emit(&report, args.out.as_deref()) {
        Ok(()) => EXIT_OK,
        Err(code) => code,
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
    }
}
