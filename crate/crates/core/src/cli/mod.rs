//! Batch front end: argument parsing, dispatch, and output formatting.
//!
//! [`run`] never exits the process; it returns the exit code so the whole
//! command surface can be driven from tests.
//!
//! Exit codes: `0` success, `1` a verification failure (a computed value
//! contradicts an expected property), `2` a usage or input error, including
//! an unreadable or corrupted cache.

mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bernoulli::{BernoulliCache, SCAN_LIMIT_MAX};
use crate::error::{Error, Result};

/// Environment variable consulted when `--cache` is not given.
pub const CACHE_ENV: &str = "CYCLOPAIR_CACHE";

pub const DEFAULT_LIMIT: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Scan,
    Pair,
    Galois,
    IharaCheck,
    Degenerate,
    Bernoulli,
    VerifyAll,
}

/// Everything [`run`] needs; built from the command line by [`Cli`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub p: Option<u64>,
    pub r: Option<u64>,
    /// Bernoulli index for the `bernoulli` command.
    pub k: Option<u64>,
    pub limit: u64,
    pub precision: u32,
    pub format: OutputFormat,
    pub cache_path: Option<PathBuf>,
    pub include_odd_a: bool,
    /// Worker count; `None` uses every available core.
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            p: None,
            r: None,
            k: None,
            limit: DEFAULT_LIMIT,
            precision: 1,
            format: OutputFormat::Text,
            cache_path: None,
            include_odd_a: false,
            threads: None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cyclopair",
    version,
    about = "Cup-product pairing values on cyclotomic p-units for irregular pairs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,

    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: OutputFormat,

    /// Bernoulli cache file (falls back to $CYCLOPAIR_CACHE).
    #[arg(long, global = true, value_name = "PATH")]
    pub cache: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,

    /// Also impose the relations coming from odd `a`.
    #[arg(long, global = true)]
    pub include_odd_a: bool,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Odd prime.
    #[arg(short, long)]
    pub p: u64,
    /// Even irregular index with p | B_r.
    #[arg(short, long)]
    pub r: u64,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Solve every irregular pair with p below the limit.
    Scan {
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: u64,
    },
    /// Solve one pair, modulo p or (with --precision 2) modulo p^2.
    Pair {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
        precision: u32,
    },
    /// The degree-two Galois relation and the Greenberg criterion.
    Galois {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Cross-check the weight-12 derivation relation against the (691, 12) pairing.
    IharaCheck,
    /// Test the r = (p+3)/2 degeneracy without building the matrix.
    Degenerate {
        /// Odd prime.
        #[arg(short, long)]
        p: u64,
        /// Defaults to (p+3)/2.
        #[arg(short, long)]
        r: Option<u64>,
    },
    /// Bernoulli residues B_k mod p^precision (every even k <= p-3 unless -k is given).
    Bernoulli {
        /// Odd prime.
        #[arg(short, long)]
        p: u64,
        /// Single even index to evaluate.
        #[arg(short, long)]
        k: Option<u64>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
        precision: u32,
    },
    /// Run the full verification suite.
    VerifyAll {
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: u64,
    },
}

impl Cli {
    pub fn into_config(self) -> RunConfig {
        let g = self.global;
        let mut cfg = RunConfig {
            format: g.format,
            cache_path: g.cache,
            include_odd_a: g.include_odd_a,
            threads: g.threads.map(|t| t as usize),
            ..RunConfig::new(Command::Scan)
        };
        match self.command {
            CliCommand::Scan { limit } => cfg.limit = limit,
            CliCommand::Pair { pair, precision } => {
                cfg.command = Command::Pair;
                (cfg.p, cfg.r, cfg.precision) = (Some(pair.p), Some(pair.r), precision);
            }
            CliCommand::Galois { pair } => {
                cfg.command = Command::Galois;
                (cfg.p, cfg.r) = (Some(pair.p), Some(pair.r));
            }
            CliCommand::IharaCheck => cfg.command = Command::IharaCheck,
            CliCommand::Degenerate { p, r } => {
                cfg.command = Command::Degenerate;
                (cfg.p, cfg.r) = (Some(p), r);
            }
            CliCommand::Bernoulli { p, k, precision } => {
                cfg.command = Command::Bernoulli;
                (cfg.p, cfg.k, cfg.precision) = (Some(p), k, precision);
            }
            CliCommand::VerifyAll { limit } => {
                cfg.command = Command::VerifyAll;
                cfg.limit = limit;
            }
        }
        cfg
    }
}

/// Whether the command completed with every check satisfied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Verified,
    Failed,
}

impl Outcome {
    fn from_ok(ok: bool) -> Self {
        if ok {
            Outcome::Verified
        } else {
            Outcome::Failed
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::TriviallyZero { .. } | Error::IntegralityFailure { .. } => 1,
        _ => 2,
    }
}

/// Runs one command, writing results to `out` and diagnostics to `err`.
pub fn run(cfg: &RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32 {
    let result = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))
        .and_then(|pool| pool.install(|| dispatch(cfg, out, err)))
        .and_then(|outcome| {
            out.flush()?;
            Ok(outcome)
        });
    match result {
        Ok(Outcome::Verified) => 0,
        Ok(Outcome::Failed) => {
            let _ = writeln!(err, "verification failed");
            1
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn require(value: Option<u64>, name: &str) -> Result<u64> {
    value.ok_or_else(|| Error::domain(format!("missing required argument {name}")))
}

fn cache_path(cfg: &RunConfig) -> Option<PathBuf> {
    cfg.cache_path.clone().or_else(|| {
        std::env::var_os(CACHE_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    })
}

fn open_cache(cfg: &RunConfig) -> Result<Option<BernoulliCache>> {
    cache_path(cfg).map(BernoulliCache::open).transpose()
}

fn dispatch(
    cfg: &RunConfig,
    out: &mut (dyn Write + Send),
    err: &mut (dyn Write + Send),
) -> Result<Outcome> {
    match cfg.command {
        Command::Scan => {
            if cfg.limit > SCAN_LIMIT_MAX {
                return Err(Error::BoundExceeded {
                    what: "scan limit",
                    value: cfg.limit,
                    bound: SCAN_LIMIT_MAX,
                });
            }
            let mut cache = open_cache(cfg)?;
            output::scan(cfg, cache.as_mut(), out, err)
        }
        Command::Pair => {
            let (p, r) = (require(cfg.p, "-p")?, require(cfg.r, "-r")?);
            output::pair(cfg, p, r, out)
        }
        Command::Galois => {
            let (p, r) = (require(cfg.p, "-p")?, require(cfg.r, "-r")?);
            output::galois(cfg, p, r, out)
        }
        Command::IharaCheck => output::ihara(cfg, out),
        Command::Degenerate => output::degenerate(cfg, require(cfg.p, "-p")?, out),
        Command::Bernoulli => {
            let mut cache = open_cache(cfg)?;
            output::bernoulli(cfg, require(cfg.p, "-p")?, cache.as_mut(), out)
        }
        Command::VerifyAll => {
            let mut cache = open_cache(cfg)?;
            output::verify_all(cfg, cache.as_mut(), out)
        }
    }
}
