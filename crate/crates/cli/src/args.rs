use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::nlist::parse_n_list;

const EXIT_HELP: &str = "\
Exit status:
  0  success
  1  failed to write output
  2  usage error (unknown command, malformed flags)
  3  size outside the supported range (exact: 1..=500, logspace: 1..=3000)
  4  cache directory or file could not be read or written
  5  numerical failure (non-convergence, root finder, rejection budget)

Cached tables live in --cache-dir, which defaults to $PLANEPART_CACHE,
then $XDG_CACHE_HOME/planepart, then ~/.cache/planepart.";

#[derive(Debug, Parser)]
#[command(name = "planepart", version, about = "Plane partitions by size and trace", after_help = EXIT_HELP)]
pub struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Directory holding cached trace tables.
    #[arg(long, global = true, env = "PLANEPART_CACHE")]
    pub cache_dir: Option<PathBuf>,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Plain `n value` lines (count only).
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Logspace,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Lemma {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SampleMethod {
    /// Boltzmann draws conditioned on size n by rejection.
    Rejection,
    /// Unconditioned Boltzmann draws at the saddle tilt for n.
    Boltzmann,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NList(pub Vec<usize>);

fn n_list(s: &str) -> Result<NList, String> {
    parse_n_list(s).map(NList).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct SizeArg {
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct SizeListArg {
    /// Strictly increasing sizes, e.g. `100,200,400`.
    #[arg(long = "n-list", value_parser = n_list)]
    pub n_list: NList,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Q(0..=n).
    Count(SizeArg),

    /// Law of the trace at size n.
    TracePmf {
        #[command(flatten)]
        size: SizeArg,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        /// Emit decimal probabilities instead of fractions in exact mode.
        #[arg(long)]
        real: bool,
    },

    /// Saddle point from the root finder and from the series expansion.
    Saddle(SizeArg),

    /// Wright, Hayman and Meinardus estimates of Q(n).
    Asympt(SizeArg),

    /// Distance of the normalized trace to the standard normal.
    Clt {
        #[command(flatten)]
        sizes: SizeListArg,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
    },

    /// Numerical checks of the local Gaussian approximation (1) and of
    /// the decay away from the saddle (2).
    LemmaCheck {
        #[arg(long, value_enum)]
        which: Lemma,
        #[command(flatten)]
        sizes: SizeListArg,
        /// Grid points (lemma 1) or log-spaced samples per sign (lemma 2).
        #[arg(long)]
        points: Option<usize>,
        /// Trace angle for lemma 2; defaults to n^{-1/3} / sqrt(log n).
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
    },

    /// Random colored-part configurations at the saddle tilt for n.
    Sample {
        #[command(flatten)]
        size: SizeArg,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "rejection")]
        method: SampleMethod,
        #[arg(long, default_value_t = planepart::sampler::DEFAULT_MAX_ATTEMPTS)]
        max_attempts: u64,
    },
}
