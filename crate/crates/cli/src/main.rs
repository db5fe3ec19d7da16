mod commands;
mod provenance;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qbe_core::eval::DEFAULT_KS;
use qbe_core::geometry::{DEFAULT_HISTOGRAM_BINS, DEFAULT_PAIRS};
use qbe_core::Layer;
use serde::Serialize;

const EXIT_VALIDATION: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

#[derive(Parser, Debug, Serialize)]
#[command(name = "qbe", version, about = "Query-by-example spoken term detection")]
pub struct Cli {
    /// Worker threads (defaults to available parallelism).
    #[arg(long, global = true, env = "QBE_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
pub enum Command {
    /// Compute 13-dim MFCC features for every recording with audio.
    ExtractMfcc(ExtractMfccArgs),
    /// Anisotropy and cosine-similarity histograms per layer.
    Analyze(AnalyzeArgs),
    /// Per-dimension mean statistics per layer.
    RogueDims(RogueDimsArgs),
    /// Rank every recording for each query at one layer.
    Search(SearchArgs),
    /// Precision@k / Recall@k / F1 per layer plus best layer per k.
    Evaluate(EvaluateArgs),
    /// Build a protocol corpus (manifest + queries) from a labeled pool or synthetically.
    MakeProtocol(MakeProtocolArgs),
    /// Brute-force DTW oracle and geometry sanity checks.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct Common {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Open and check every referenced feature file before running.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct ExtractMfccArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', required = true)]
    pub layers: Vec<Layer>,
    #[arg(long, default_value_t = DEFAULT_PAIRS)]
    pub pairs: usize,
    #[arg(long, default_value_t = DEFAULT_HISTOGRAM_BINS)]
    pub bins: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write `histogram_<stratum>.csv` files.
    #[arg(long)]
    pub histogram_csv: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct RogueDimsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', required = true)]
    pub layers: Vec<Layer>,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub layer: Layer,
    /// Results kept per query (0 keeps all).
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    /// Restrict to these query ids.
    #[arg(long, value_delimiter = ',')]
    pub query_id: Vec<String>,
    /// Include the warping path of each kept result.
    #[arg(long)]
    pub paths: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub layers: Vec<Layer>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_KS)]
    pub k: Vec<usize>,
    /// Write the layer x k precision grid.
    #[arg(long)]
    pub fig2_grid: bool,
    /// Write rankings per layer as JSON lines.
    #[arg(long)]
    pub rankings: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct MakeProtocolArgs {
    /// Labeled sentence pool (manifest with transcriptions and alignments).
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    pub pool: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 30)]
    pub n_words: usize,
    #[arg(long, default_value_t = 10)]
    pub queries_per_word: usize,
    #[arg(long, default_value_t = 700)]
    pub n_distractors: usize,
    #[arg(long, default_value_t = 1)]
    pub min_word_chars: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Generate a planted-word feature corpus instead of selecting from a pool.
    #[arg(long)]
    pub synthetic: bool,
    /// Synthetic only: feature dimension.
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    /// Synthetic only: `layer=sigma` pairs; each layer is the corpus plus
    /// Gaussian noise of that sigma.
    #[arg(long, value_delimiter = ',', default_value = "0=0")]
    pub noise: Vec<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct SelftestArgs {
    /// Write `selftest.json` here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<qbe_core::Error>() {
            return if e.is_validation() { EXIT_VALIDATION } else { EXIT_RUNTIME };
        }
        if cause.downcast_ref::<commands::InvalidInput>().is_some() {
            return EXIT_VALIDATION;
        }
    }
    EXIT_RUNTIME
}

/// The error chain joined by ": ", skipping causes already quoted by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in err.chain() {
        let c = cause.to_string();
        if msg.contains(&c) {
            continue;
        }
        if !msg.is_empty() {
            msg.push_str(": ");
        }
        msg.push_str(&c);
    }
    msg
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();

    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::error!("cannot start {n} workers: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }

    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
