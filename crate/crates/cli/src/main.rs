//! `mtcal`: build parallel-quality MT metric benchmarks and measure
//! cross-lingual scoring bias.

mod config;
mod fixture;
mod output;
mod report;
mod stages;

use std::io::{self, BufReader};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mtcal_core::metrics::mock::{serve_mock, MockExit, MockOptions};
use mtcal_core::{Error, Result};

use config::{Loaded, Overrides};
use stages::Ctx;

#[derive(Parser)]
#[command(name = "mtcal", version, about = "Parallel-quality MT metric benchmark pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration (TOML).
    #[arg(short, long, default_value = "mtcal.toml")]
    config: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (outputs do not depend on this).
    #[arg(long)]
    threads: Option<usize>,
    /// Normalise scores per direction before averaging.
    #[arg(long)]
    use_lgn: bool,
    /// Sampling repeats; a list such as 5,10,25 also sets the stability report.
    #[arg(long, value_delimiter = ',')]
    repeats: Option<Vec<usize>>,
    /// Quality levels of the monolingual systems, e.g. 1,2,3.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u8>>,
    #[arg(long)]
    n_per_direction: Option<usize>,
    #[arg(long)]
    with_replacement: bool,
    /// Accept candidates on a single annotator vote.
    #[arg(long)]
    single_annotator: bool,
    /// Largest number of errors merged into one translation.
    #[arg(long)]
    k_max: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse pairs and candidates, apply annotator decisions.
    Ingest(Common),
    /// Merge accepted candidates into the triplet pool.
    Synth(Common),
    /// Sample multilingual and monolingual pseudo systems.
    Assemble(Common),
    /// Score every triplet with every configured metric.
    Score(Common),
    /// Fit per-direction normalisation statistics.
    FitLgn(Common),
    /// Correlation, CV, stability and significance reports.
    Analyze(Common),
    /// Run every stage in order.
    Run(Common),
    /// Render error-injection prompts from the configured templates.
    Prompts(Common),
    /// Write a synthetic corpus and matching config into a directory.
    GenerateFixture {
        dir: PathBuf,
        #[arg(long, default_value_t = 60)]
        pairs: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Model-free scorer speaking the external protocol on stdin/stdout.
    #[command(hide = true)]
    MockScorer {
        #[arg(long)]
        omit: Option<String>,
        #[arg(long)]
        fail_after: Option<usize>,
        #[arg(long)]
        garbage_at: Option<usize>,
        #[arg(long)]
        stall_after: Option<usize>,
    },
}

fn context(c: &Common) -> Result<Ctx> {
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let overrides = Overrides {
        seed: c.seed,
        n_per_direction: c.n_per_direction,
        with_replacement: c.with_replacement,
        repeats: c.repeats.clone(),
        levels: c.levels.clone(),
        k_max: c.k_max,
        single_annotator: c.single_annotator,
    };
    Ok(Ctx { loaded: Loaded::load(&c.config, &overrides)?, use_lgn: c.use_lgn })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(c) => stages::ingest(&context(&c)?),
        Command::Synth(c) => stages::synth(&context(&c)?),
        Command::Assemble(c) => stages::assemble(&context(&c)?),
        Command::Score(c) => stages::score(&context(&c)?),
        Command::FitLgn(c) => stages::fit_lgn(&context(&c)?),
        Command::Analyze(c) => stages::analyze(&context(&c)?),
        Command::Run(c) => stages::run_all(&context(&c)?),
        Command::Prompts(c) => stages::prompts(&context(&c)?),
        Command::GenerateFixture { dir, pairs, seed } => {
            fixture::write_fixture(&dir, &fixture::FixtureOptions { pairs, seed, ..Default::default() })
        }
        Command::MockScorer { .. } => unreachable!("handled in main"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::MockScorer { omit, fail_after, garbage_at, stall_after } = &cli.command {
        let opts = MockOptions { omit_id: omit.clone(), fail_after: *fail_after, garbage_at: *garbage_at, stall_after: *stall_after };
        return match serve_mock(BufReader::new(io::stdin().lock()), io::stdout().lock(), io::stderr(), &opts) {
            MockExit::Ok => ExitCode::SUCCESS,
            MockExit::Failed(code) => ExitCode::from(code as u8),
        };
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
