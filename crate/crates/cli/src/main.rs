//! `scengen`: synthesize scenario generators from `.mon` specifications,
//! then count, extract, sample, enumerate and rank their trace prefixes.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 index out of bounds,
//! 3 no traces, 4 resource limit.

mod args;
mod commands;
mod error;
mod records;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use scengen::casestudy::CaseStudy;
use scengen::{ExploreLimits, DEFAULT_MEMORY_LIMIT};

use crate::args::Horizons;
use crate::commands::Env;
use crate::error::{CliError, EXIT_USAGE};
use crate::records::OutputFormat;

#[derive(Debug, Parser)]
#[command(name = "scengen", version, about = "Scenario generators from finite-memory monitors")]
struct Cli {
    /// Worker threads (0: one per core).
    #[arg(short = 'j', long, global = true, default_value_t = 0)]
    workers: usize,
    /// Byte budget for counting tables; accepts K, M and G suffixes.
    #[arg(long, global = true, env = "SCENGEN_MEMORY_LIMIT", value_parser = args::bytes, default_value_t = DEFAULT_MEMORY_LIMIT)]
    memory_limit: usize,
    /// Largest number of monitor states explored per factor.
    #[arg(long, global = true, default_value_t = ExploreLimits::default().max_states)]
    max_states: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile a specification and write its generator.
    Synth(SynthArgs),
    /// Print the number of trace prefixes per horizon.
    Count(CountArgs),
    /// Print the prefix with a given index.
    Extract(ExtractArgs),
    /// Draw prefixes uniformly at random.
    Sample(SampleArgs),
    /// Emit every prefix of a horizon once, in seeded random order.
    Enumerate(EnumerateArgs),
    /// Print the index of each prefix read as JSON lines.
    Rank(RankArgs),
    /// Counts, extraction time and selectivities per horizon, as CSV.
    Stats(StatsArgs),
    /// Random walks on the unpruned monitors.
    Walk(WalkArgs),
    /// Run the experiment grid of a shipped case study, as CSV.
    Grid(GridArgs),
    /// Report diagnostics for specification files.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    spec: PathBuf,
    /// Generator file; a manifest plus one file per factor when the
    /// scenario has several independent factors.
    #[arg(short, long)]
    output: PathBuf,
    /// Scenario to build (default: the unnamed one).
    #[arg(long)]
    scenario: Option<String>,
    /// Also store counting tables up to this horizon.
    #[arg(long)]
    tables: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    generator: PathBuf,
    /// H, LO..HI or a comma-separated list.
    #[arg(short = 'H', long, value_parser = args::horizons)]
    horizon: Horizons,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    generator: PathBuf,
    #[arg(value_parser = args::big)]
    index: BigUint,
    #[arg(short = 'H', long)]
    horizon: usize,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    generator: PathBuf,
    /// H, or LO..HI to draw uniformly over all prefixes of those horizons.
    #[arg(short = 'H', long, value_parser = args::horizons)]
    horizon: Horizons,
    #[arg(short = 'n', long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw distinct prefixes.
    #[arg(long)]
    without_replacement: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    generator: PathBuf,
    #[arg(short = 'H', long)]
    horizon: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// First permutation position to emit.
    #[arg(long, value_parser = args::big)]
    start: Option<BigUint>,
    /// Position after the last one to emit.
    #[arg(long, value_parser = args::big)]
    end: Option<BigUint>,
    /// J/K: the J-th of K equal position ranges (0-based).
    #[arg(long, value_parser = args::shard, conflicts_with_all = ["start", "end"])]
    shard: Option<(usize, usize)>,
    /// Stop after this many prefixes.
    #[arg(long)]
    limit: Option<u64>,
    /// Resume from this file if it exists; the position reached is saved
    /// back to it.
    #[arg(long)]
    cursor: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    generator: PathBuf,
    /// JSON-lines trace records (default: standard input).
    input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    spec: PathBuf,
    #[arg(long)]
    scenario: Option<String>,
    /// Scenario whose counts divide the constraint selectivity (default:
    /// every assignment of the scenario's variables at every step).
    #[arg(long)]
    baseline: Option<String>,
    #[arg(short = 'H', long, value_parser = args::horizons)]
    horizon: Horizons,
    /// Uniform extractions timed per horizon.
    #[arg(long, default_value_t = 1000)]
    extractions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    spec: PathBuf,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(short = 'H', long)]
    horizon: usize,
    #[arg(short = 'n', long, default_value_t = 10_000)]
    walks: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// fcs, bdc or alma.
    case: CaseStudy,
    /// Comma-separated generator numbers (default: all of the case study).
    #[arg(long, value_delimiter = ',')]
    sgs: Vec<u32>,
    #[arg(short = 'H', long, value_parser = args::horizons)]
    horizon: Horizons,
    #[arg(long, default_value_t = 1000)]
    extractions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(required = true)]
    specs: Vec<PathBuf>,
}

fn dispatch(cli: &Cli) -> Result<ExitCode, CliError> {
    let env = Env {
        memory_limit: cli.memory_limit,
        limits: ExploreLimits {
            max_states: cli.max_states,
            ..ExploreLimits::default()
        },
    };
    match &cli.command {
        Command::Synth(a) => commands::synth(a, &env)?,
        Command::Count(a) => commands::count(a, &env)?,
        Command::Extract(a) => commands::extract(a, &env)?,
        Command::Sample(a) => commands::sample(a, &env)?,
        Command::Enumerate(a) => commands::enumerate(a, &env)?,
        Command::Rank(a) => commands::rank(a, &env)?,
        Command::Stats(a) => commands::stats(a, &env)?,
        Command::Walk(a) => commands::walk(a, &env)?,
        Command::Grid(a) => commands::grid(a, &env)?,
        Command::Check(a) => {
            if !commands::check(a)? {
                return Ok(ExitCode::from(EXIT_USAGE));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("scengen: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(code) => code,
        Err(CliError::Spec { path, diagnostics }) => {
            commands::print_diagnostics(&path, &diagnostics);
            ExitCode::from(EXIT_USAGE)
        }
        // the reader went away, e.g. `| head`
        Err(CliError::Output(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("scengen: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
