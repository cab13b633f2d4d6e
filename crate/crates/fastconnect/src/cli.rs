//! Command-line front end. Subcommands: transform (apply a transform
//! to a vector file), gen (write a reproducible random vector), bench
//! (CSV timing/accuracy table), plan (build and inspect or save a
//! plan), selftest (run the built-in check suite).
//!
//! Vector files are little-endian: the 5 magic bytes "FLCV1", one
//! version byte (currently 1), a u32 length, then that many f64
//! values. Text mode reads and writes one decimal value per line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error,
//! 3 self-test failure.

use crate::executor::{direct_transform, execute, execute_reference_fmm, execute_threaded};
use crate::gamma_ratio::lambda_vector;
use crate::oracle::{e_inf, oracle_transform, random_decaying, RandomSpec};
use crate::planner::{build_plan, flop_estimate, FlopVariant, Plan};
use crate::selftest;
use crate::Direction;
use clap::{Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

const VECTOR_MAGIC: &[u8; 5] = b"FLCV1";
const VECTOR_VERSION: u8 = 1;
const HEADER_LEN: usize = 10;

/// Input lengths below this default to the direct method: the block
/// hierarchy needs at least two levels, which for s-hat 32 means a
/// padded length of 256 and so an input of at least 129.
const DEFAULT_DIRECT_BELOW: usize = 129;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    SelfTest,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Data(msg) => write!(f, "error: {msg}"),
            CliError::SelfTest => write!(f, "self-test failed"),
        }
    }
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::SelfTest => 3,
        }
    }
}

fn data_err<E: fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

#[derive(Parser)]
#[command(
    name = "fastconnect",
    about = "Fast Legendre <-> Chebyshev coefficient transforms",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirArg {
    L2c,
    C2l,
}

impl DirArg {
    fn direction(self) -> Direction {
        match self {
            DirArg::L2c => Direction::LegendreToChebyshev,
            DirArg::C2l => Direction::ChebyshevToLegendre,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Fmm,
    Reference,
    Direct,
}

impl fmt::Display for MethodArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodArg::Fmm => write!(f, "fmm"),
            MethodArg::Reference => write!(f, "reference"),
            MethodArg::Direct => write!(f, "direct"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Transform a coefficient vector between the two bases.
    Transform {
        /// Transform direction.
        #[arg(long, value_enum)]
        dir: DirArg,
        /// Input vector file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output vector file.
        #[arg(long = "out")]
        output: PathBuf,
        /// Evaluation method.
        #[arg(long, value_enum, default_value = "fmm")]
        method: MethodArg,
        /// Finest-level block size hint.
        #[arg(long = "s-hat", default_value_t = 32)]
        s_hat: usize,
        /// Chebyshev approximation order per submatrix.
        #[arg(long = "M", default_value_t = 18)]
        m: usize,
        /// Read and write newline-separated decimal text instead of binary.
        #[arg(long)]
        text: bool,
        /// Worker threads for block-parallel execution (default 1;
        /// FASTCONNECT_THREADS is consulted when the flag is absent).
        #[arg(long)]
        threads: Option<usize>,
        /// Inputs shorter than this fall back to the direct method.
        #[arg(long = "direct-below", default_value_t = DEFAULT_DIRECT_BELOW)]
        direct_below: usize,
    },
    /// Generate a reproducible random coefficient vector.
    Gen {
        /// Number of entries.
        #[arg(long)]
        n: usize,
        /// Power-law decay rate r: entry k is uniform(0,1) / (k+1)^r.
        #[arg(long)]
        decay: f64,
        /// Seed for the generator.
        #[arg(long)]
        seed: u64,
        /// Output vector file.
        #[arg(long = "out")]
        output: PathBuf,
        /// Write newline-separated decimal text instead of binary.
        #[arg(long)]
        text: bool,
    },
    /// Print a CSV table of planning/execution timings and accuracy.
    Bench {
        /// Smallest size as a power of two.
        #[arg(long = "min-log2")]
        min_log2: u32,
        /// Largest size as a power of two.
        #[arg(long = "max-log2")]
        max_log2: u32,
        /// Repetitions per size: a number, or "auto" for
        /// max(3, min(2^(26 - log2 N), 10000)).
        #[arg(long, default_value = "auto")]
        reps: String,
        /// Evaluation method to benchmark.
        #[arg(long, value_enum, default_value = "fmm")]
        method: MethodArg,
        /// Transform direction.
        #[arg(long, value_enum, default_value = "l2c")]
        dir: DirArg,
        /// Decay rate of the generated input.
        #[arg(long, default_value_t = 0.0)]
        decay: f64,
        /// Seed of the generated input.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Build a plan, print its statistics, optionally save it.
    Plan {
        /// Input length the plan should accept.
        #[arg(long)]
        n: usize,
        /// Transform direction.
        #[arg(long, value_enum)]
        dir: DirArg,
        /// Finest-level block size hint.
        #[arg(long = "s-hat", default_value_t = 32)]
        s_hat: usize,
        /// Chebyshev approximation order per submatrix.
        #[arg(long = "M", default_value_t = 18)]
        m: usize,
        /// Write the serialized plan to this file.
        #[arg(long = "out")]
        output: Option<PathBuf>,
    },
    /// Run the built-in acceptance checks and print one line per check.
    Selftest,
}

/// Parses argv and runs one subcommand. Returns the process exit code
/// instead of exiting so tests can drive it in-process.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Transform {
            dir,
            input,
            output,
            method,
            s_hat,
            m,
            text,
            threads,
            direct_below,
        } => cmd_transform(
            dir.direction(),
            &input,
            &output,
            method,
            s_hat,
            m,
            text,
            threads,
            direct_below,
        ),
        Command::Gen {
            n,
            decay,
            seed,
            output,
            text,
        } => cmd_gen(n, decay, seed, &output, text),
        Command::Bench {
            min_log2,
            max_log2,
            reps,
            method,
            dir,
            decay,
            seed,
        } => cmd_bench(min_log2, max_log2, &reps, method, dir.direction(), decay, seed),
        Command::Plan {
            n,
            dir,
            s_hat,
            m,
            output,
        } => cmd_plan(n, dir.direction(), s_hat, m, output.as_deref()),
        Command::Selftest => cmd_selftest(),
    }
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, CliError> {
    let threads = match flag {
        Some(k) => k,
        None => match std::env::var("FASTCONNECT_THREADS") {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("FASTCONNECT_THREADS is not a count: {v}")))?,
            Err(_) => 1,
        },
    };
    if threads == 0 {
        return Err(CliError::Usage("thread count must be at least 1".to_string()));
    }
    Ok(threads)
}

fn read_vector(path: &Path, text: bool) -> Result<Vec<f64>, CliError> {
    if text {
        let body = fs::read_to_string(path).map_err(data_err)?;
        let mut out = Vec::new();
        for (lineno, line) in body.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let value = line.parse::<f64>().map_err(|_| {
                CliError::Data(format!(
                    "{}: line {} is not a number: {line}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            out.push(value);
        }
        return Ok(out);
    }
    let bytes = fs::read(path).map_err(data_err)?;
    if bytes.len() < HEADER_LEN || &bytes[..5] != VECTOR_MAGIC {
        return Err(CliError::Data(format!(
            "{}: not a vector file (bad magic)",
            path.display()
        )));
    }
    if bytes[5] != VECTOR_VERSION {
        return Err(CliError::Data(format!(
            "{}: unsupported vector file version {}",
            path.display(),
            bytes[5]
        )));
    }
    let len = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    if bytes.len() != HEADER_LEN + 8 * len {
        return Err(CliError::Data(format!(
            "{}: header says {len} values but payload holds {} bytes",
            path.display(),
            bytes.len() - HEADER_LEN
        )));
    }
    let mut out = Vec::with_capacity(len);
    for chunk in bytes[HEADER_LEN..].chunks_exact(8) {
        out.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    Ok(out)
}

fn write_vector(path: &Path, data: &[f64], text: bool) -> Result<(), CliError> {
    if text {
        let mut body = String::new();
        for x in data {
            body.push_str(&format!("{x}\n"));
        }
        return fs::write(path, body).map_err(data_err);
    }
    if data.len() > u32::MAX as usize {
        return Err(CliError::Data(format!(
            "vector of {} entries does not fit the file format",
            data.len()
        )));
    }
    let mut bytes = Vec::with_capacity(HEADER_LEN + 8 * data.len());
    bytes.extend_from_slice(VECTOR_MAGIC);
    bytes.push(VECTOR_VERSION);
    bytes.extend_from_slice(&(data.len() as u32).to_le_bytes());
    for x in data {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    fs::write(path, bytes).map_err(data_err)
}

fn validate_params(s_hat: usize, m: usize) -> Result<(), CliError> {
    if !s_hat.is_power_of_two() {
        return Err(CliError::Usage(format!(
            "--s-hat must be a power of two, got {s_hat}"
        )));
    }
    if m < 4 {
        return Err(CliError::Usage(format!("--M must be at least 4, got {m}")));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_transform(
    direction: Direction,
    input: &Path,
    output: &Path,
    method: MethodArg,
    s_hat: usize,
    m: usize,
    text: bool,
    threads: Option<usize>,
    direct_below: usize,
) -> Result<(), CliError> {
    validate_params(s_hat, m)?;
    let threads = resolve_threads(threads)?;
    let f = read_vector(input, text)?;
    let method = if f.len() < direct_below && method != MethodArg::Direct {
        MethodArg::Direct
    } else {
        method
    };
    let result = match method {
        MethodArg::Direct => {
            if f.is_empty() {
                Vec::new()
            } else {
                let lambda = lambda_vector(f.len()).map_err(data_err)?;
                direct_transform(direction, &f, &lambda).map_err(data_err)?
            }
        }
        MethodArg::Fmm => {
            let plan = build_plan(f.len(), direction, s_hat, m).map_err(data_err)?;
            if threads == 1 {
                execute(&plan, &f).map_err(data_err)?
            } else {
                execute_threaded(&plan, &f, threads).map_err(data_err)?
            }
        }
        MethodArg::Reference => {
            let plan = build_plan(f.len(), direction, s_hat, m).map_err(data_err)?;
            execute_reference_fmm(&plan, &f).map_err(data_err)?
        }
    };
    write_vector(output, &result, text)
}

fn cmd_gen(n: usize, decay: f64, seed: u64, output: &Path, text: bool) -> Result<(), CliError> {
    if !decay.is_finite() || decay < 0.0 {
        return Err(CliError::Usage(format!(
            "--decay must be finite and nonnegative, got {decay}"
        )));
    }
    let f = random_decaying(&RandomSpec {
        len: n,
        seed,
        decay,
    });
    write_vector(output, &f, text)
}

fn parse_reps(reps: &str, log2: u32) -> Result<usize, CliError> {
    if reps == "auto" {
        let base = if log2 >= 26 { 1 } else { 1usize << (26 - log2) };
        return Ok(base.clamp(3, 10_000));
    }
    let fixed = reps
        .parse::<usize>()
        .map_err(|_| CliError::Usage(format!("--reps must be a count or \"auto\", got {reps}")))?;
    if fixed == 0 {
        return Err(CliError::Usage("--reps must be at least 1".to_string()));
    }
    Ok(fixed)
}

fn cmd_bench(
    min_log2: u32,
    max_log2: u32,
    reps: &str,
    method: MethodArg,
    direction: Direction,
    decay: f64,
    seed: u64,
) -> Result<(), CliError> {
    if min_log2 > max_log2 || max_log2 > 30 {
        return Err(CliError::Usage(format!(
            "size range must satisfy min <= max <= 30, got {min_log2}..{max_log2}"
        )));
    }
    if method != MethodArg::Direct && min_log2 < 8 {
        return Err(CliError::Usage(
            "hierarchical methods need --min-log2 of at least 8".to_string(),
        ));
    }
    println!("N,method,plan_seconds,exec_seconds,flop_estimate,einf_vs_oracle");
    for log2 in min_log2..=max_log2 {
        let n = 1usize << log2;
        let reps = parse_reps(reps, log2)?;
        let f = random_decaying(&RandomSpec {
            len: n,
            seed,
            decay,
        });
        let (plan_seconds, exec_seconds, flops, out) = match method {
            MethodArg::Direct => {
                let lambda = lambda_vector(n).map_err(data_err)?;
                let mut best = f64::INFINITY;
                let mut out = Vec::new();
                for _ in 0..reps {
                    let start = Instant::now();
                    out = direct_transform(direction, &f, &lambda).map_err(data_err)?;
                    best = best.min(start.elapsed().as_secs_f64());
                }
                (0.0, best, (n as f64) * (n as f64), out)
            }
            MethodArg::Fmm | MethodArg::Reference => {
                let plan_reps = reps.min(5);
                let mut plan_best = f64::INFINITY;
                let mut plan: Option<Plan> = None;
                for _ in 0..plan_reps {
                    let start = Instant::now();
                    plan = Some(build_plan(n, direction, 32, 18).map_err(data_err)?);
                    plan_best = plan_best.min(start.elapsed().as_secs_f64());
                }
                let plan = plan.expect("at least one planning repetition");
                let variant = match method {
                    MethodArg::Fmm => FlopVariant::Modal,
                    _ => FlopVariant::Nodal,
                };
                let flops = flop_estimate(&plan.decomposition, 18, 3.0, variant);
                let mut ws = crate::executor::WorkSet::new(&plan);
                let mut exec_best = f64::INFINITY;
                let mut out = Vec::new();
                for _ in 0..reps {
                    let start = Instant::now();
                    out = match method {
                        MethodArg::Fmm => {
                            crate::executor::execute_with(&plan, &mut ws, &f).map_err(data_err)?
                        }
                        _ => execute_reference_fmm(&plan, &f).map_err(data_err)?,
                    };
                    exec_best = exec_best.min(start.elapsed().as_secs_f64());
                }
                (plan_best, exec_best, flops, out)
            }
        };
        let einf = if log2 <= 16 {
            let oracle = oracle_transform(direction, &f).map_err(data_err)?;
            e_inf(&out, &oracle).map_err(data_err)?
        } else {
            f64::NAN
        };
        println!("{n},{method},{plan_seconds:.6e},{exec_seconds:.6e},{flops:.6e},{einf:.3e}");
    }
    Ok(())
}

fn cmd_plan(
    n: usize,
    direction: Direction,
    s_hat: usize,
    m: usize,
    output: Option<&Path>,
) -> Result<(), CliError> {
    validate_params(s_hat, m)?;
    let start = Instant::now();
    let plan = build_plan(n, direction, s_hat, m).map_err(data_err)?;
    let seconds = start.elapsed().as_secs_f64();
    println!("direction {}", plan.direction);
    println!("input_len {}", plan.decomposition.input_len);
    println!("padded_len {}", plan.decomposition.n);
    println!("block_size {}", plan.decomposition.s);
    println!("levels {}", plan.decomposition.levels);
    println!("blocks {}", plan.decomposition.total_blocks());
    println!("order {}", plan.m);
    println!("lambda_evaluations {}", plan.stats.lambda_evaluations);
    println!("memory_doubles {}", plan.memory_doubles());
    println!("plan_seconds {seconds:.6e}");
    if let Some(path) = output {
        let bytes = plan.to_bytes();
        fs::write(path, &bytes).map_err(data_err)?;
        println!("serialized_bytes {}", bytes.len());
    }
    Ok(())
}

fn cmd_selftest() -> Result<(), CliError> {
    let reports = selftest::run_all();
    for r in &reports {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}: {}", r.name, r.detail);
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    println!("{passed}/{} checks passed", reports.len());
    if passed == reports.len() {
        Ok(())
    } else {
        Err(CliError::SelfTest)
    }
}
