//! `stretchpack` command-line tool.
//!
//! Exit codes: 0 success, 1 algorithm failure or audit violation,
//! 2 invalid instance where validity was required, 3 parse or I/O error,
//! 4 resource limit (oracle size or adversary budget).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stretchpack_core::adversary::{self, SearchConfig};
use stretchpack_core::audit::check_run;
use stretchpack_core::engine::run_with;
use stretchpack_core::format;
use stretchpack_core::generator::{generate, GenProfile, Order, Pattern};
use stretchpack_core::oracle::{self, OracleConfig};
use stretchpack_core::{Algorithm, Error, Instance, Rat};

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_LIMIT: u8 = 4;

#[derive(Parser)]
#[command(name = "stretchpack", version, about = "Online bin stretching with stretching factor 3/2")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an online packer over an instance file.
    Pack {
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        #[arg(short = 'a', long = "algorithm", default_value = "stretch15", value_parser = parse_algorithm)]
        algorithm: Algorithm,
        /// Write the placement trace (one JSON object per line).
        #[arg(short = 't', long = "trace")]
        trace: Option<PathBuf>,
        /// Check the phase-one invariants after every placement.
        #[arg(long)]
        audit: bool,
    },
    /// Decide whether an instance fits into m bins of the given capacity.
    Verify {
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        #[arg(long = "cap", default_value = "12", value_parser = parse_rat)]
        cap: Rat,
    },
    /// Write a generated instance (with its witness) to a file.
    Generate {
        #[arg(long, value_parser = parse_pattern)]
        pattern: Pattern,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "as-constructed", value_parser = parse_order)]
        order: Order,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Generate, pack and audit random valid instances.
    Fuzz {
        #[arg(long)]
        count: u64,
        #[arg(long = "m-max")]
        m_max: usize,
        #[arg(long = "n-max")]
        n_max: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'a', long = "algorithm", default_value = "stretch15", value_parser = parse_algorithm)]
        algorithm: Algorithm,
    },
    /// Search for the largest load an adversary can force.
    Adversary {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        granularity: u32,
        #[arg(long)]
        depth: usize,
        #[arg(short = 'a', long = "algorithm", default_value = "stretch15", value_parser = parse_algorithm)]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
    /// Replay an instance and compare against a recorded trace.
    TraceCheck {
        #[arg(short = 't', long = "trace")]
        trace: PathBuf,
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        #[arg(short = 'a', long = "algorithm", default_value = "stretch15", value_parser = parse_algorithm)]
        algorithm: Algorithm,
    },
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    Algorithm::parse(s).ok_or_else(|| format!("unknown algorithm `{s}` (stretch15, firstfit)"))
}

fn parse_pattern(s: &str) -> Result<Pattern, String> {
    Pattern::parse(s).ok_or_else(|| format!("unknown pattern `{s}` (packfirst, tightness, mediumflood, largepairs)"))
}

fn parse_order(s: &str) -> Result<Order, String> {
    Order::parse(s).ok_or_else(|| format!("unknown order `{s}` (arrival-random, asc, desc, as-constructed)"))
}

fn parse_rat(s: &str) -> Result<Rat, String> {
    s.parse().map_err(|e| format!("{e}"))
}

/// Error carrying the exit code it maps to.
struct Exit {
    code: u8,
    message: String,
}

impl Exit {
    fn new(code: u8, message: impl Into<String>) -> Exit {
        Exit { code, message: message.into() }
    }
}

impl From<Error> for Exit {
    fn from(e: Error) -> Exit {
        let code = match e {
            _ if e.is_resource_limit() => EXIT_LIMIT,
            Error::NoFit { .. } | Error::Invariant(_) | Error::Unclassifiable { .. } => EXIT_FAILURE,
            Error::ZeroBins | Error::InvalidConfig(_) | Error::SizeOutOfRange(_) => EXIT_IO,
            _ => EXIT_FAILURE,
        };
        Exit::new(code, e.to_string())
    }
}

fn read_instance(path: &Path) -> Result<Instance, Exit> {
    let text = fs::read_to_string(path).map_err(|e| Exit::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    format::parse_instance(&text).map_err(|e| Exit::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Exit> {
    fs::write(path, contents).map_err(|e| Exit::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_IO } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(exit) => {
            eprintln!("error: {}", exit.message);
            ExitCode::from(exit.code)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, Exit> {
    let cfg = OracleConfig::from_env();
    match command {
        Command::Pack { input, algorithm, trace, audit } => pack(&input, algorithm, trace.as_deref(), audit, &cfg),
        Command::Verify { input, cap } => verify(&input, &cap, &cfg),
        Command::Generate { pattern, m, n, seed, order, output } => {
            if m == 0 {
                return Err(Exit::new(EXIT_INVALID, "--m must be at least 1"));
            }
            let instance = generate(&GenProfile { pattern, m, n, seed, order });
            write_file(&output, &format::write_instance(&instance))?;
            println!("wrote {} items for m = {} to {}", instance.len(), m, output.display());
            Ok(0)
        }
        Command::Fuzz { count, m_max, n_max, seed, algorithm } => fuzz(count, m_max, n_max, seed, algorithm),
        Command::Adversary { m, granularity, depth, algorithm, budget } => {
            let mut config = SearchConfig::new(m, granularity, depth, algorithm);
            config.node_budget = budget;
            let result = adversary::search(&config)?;
            let seq: Vec<String> = result.best_sequence.iter().map(Rat::to_string).collect();
            println!("forced_load {}", result.forced_load);
            println!("sequence [{}]", seq.join(", "));
            println!("nodes {}", result.nodes_expanded);
            if result.budget_exhausted {
                eprintln!("node budget exhausted; result is a lower estimate");
                return Ok(EXIT_LIMIT);
            }
            if algorithm == Algorithm::Stretch15 && result.forced_load > Rat::from(18) {
                eprintln!("forced load above 18 against stretch15");
                return Ok(EXIT_FAILURE);
            }
            Ok(0)
        }
        Command::TraceCheck { trace, input, algorithm } => {
            let instance = read_instance(&input)?;
            let text = fs::read_to_string(&trace).map_err(|e| Exit::new(EXIT_IO, format!("{}: {e}", trace.display())))?;
            let recorded = format::parse_trace(&text).map_err(|e| Exit::new(EXIT_IO, format!("{}: {e}", trace.display())))?;
            let replayed = format::trace_events(&run_with(&instance, algorithm, false)?);
            match format::compare_traces(&recorded, &replayed) {
                Ok(()) => {
                    println!("trace matches ({} events)", recorded.len());
                    Ok(0)
                }
                Err(e) => {
                    eprintln!("trace mismatch: {e}");
                    Ok(EXIT_FAILURE)
                }
            }
        }
    }
}

fn pack(input: &Path, algorithm: Algorithm, trace: Option<&Path>, audit: bool, cfg: &OracleConfig) -> Result<u8, Exit> {
    let instance = read_instance(input)?;
    let result = run_with(&instance, algorithm, audit)?;
    if let Some(path) = trace {
        write_file(path, &format::write_trace(&format::trace_events(&result)))?;
    }
    let report = check_run(&result, &instance, cfg);

    println!("algorithm {}", algorithm.name());
    println!("max_load {}", result.max_load);
    match (&report.ratio, &report.min_capacity) {
        (Some(r), _) => println!("ratio {r}"),
        (None, Some(_)) => println!("ratio undefined"),
        (None, None) => println!("ratio not computed (oracle limit {})", cfg.item_limit),
    }
    for v in &report.violations {
        eprintln!("violation {v}");
    }
    if let Some(i) = result.failed_at {
        eprintln!("engine failure on item {} (0-based {i}): no bin has room", i + 1);
        return Ok(EXIT_FAILURE);
    }
    Ok(if report.violations.is_empty() { 0 } else { EXIT_FAILURE })
}

fn verify(input: &Path, cap: &Rat, cfg: &OracleConfig) -> Result<u8, Exit> {
    let instance = read_instance(input)?;
    let sizes = instance.sizes();
    if *cap == Rat::from(12) {
        if let Some(w) = &instance.witness {
            if w.verify(&sizes, instance.m) {
                println!("valid (witness re-verified)");
                return Ok(0);
            }
        }
    }
    match oracle::feasible(&sizes, instance.m, cap, cfg)? {
        Some(_) => {
            println!("valid at capacity {cap}");
            Ok(0)
        }
        None => {
            println!("infeasible at capacity {cap}");
            Ok(EXIT_INVALID)
        }
    }
}

/// Per-instance seed for fuzz iteration `k`.
fn fuzz_seed(seed: u64, k: u64) -> u64 {
    seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn fuzz(count: u64, m_max: usize, n_max: usize, seed: u64, algorithm: Algorithm) -> Result<u8, Exit> {
    if m_max == 0 {
        return Err(Exit::new(EXIT_INVALID, "--m-max must be at least 1"));
    }
    let cfg = OracleConfig { item_limit: 0, ..OracleConfig::default() };
    for k in 0..count {
        let s = fuzz_seed(seed, k);
        let m = 1 + (s % m_max as u64) as usize;
        let n = ((s >> 16) % (n_max as u64 + 1)) as usize;
        let profile = GenProfile { pattern: Pattern::PackFirst, m, n, seed: s, order: Order::ArrivalRandom };
        let instance = generate(&profile);
        let result = run_with(&instance, algorithm, true)?;
        let report = check_run(&result, &instance, &cfg);
        if result.failed_at.is_some() || !report.violations.is_empty() {
            for v in &report.violations {
                eprintln!("violation {v}");
            }
            if let Some(i) = result.failed_at {
                eprintln!("failure on item {i}");
            }
            eprintln!(
                "reproduce: stretchpack generate --pattern packfirst --m {m} --n {n} --seed {s} --order arrival-random -o repro.inst && stretchpack pack -i repro.inst -a {} --audit",
                algorithm.name()
            );
            return Ok(EXIT_FAILURE);
        }
    }
    println!("{count} instances passed");
    Ok(0)
}
