//! `linkctr`: file-based pipeline for link transmission centrality, tie
//! metrics and controlled SIR experiments.
//!
//! Each command reads files, writes an output directory and records a
//! `manifest.json` there; `linkctr replay` re-runs a manifest.

mod commands;
mod error;
mod io;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use linkctr::ties::Strategy;

use crate::error::{CliError, CliResult};
use crate::io::Format;

#[derive(Debug, Parser)]
#[command(
    name = "linkctr",
    version,
    about = "Link transmission centrality pipeline"
)]
pub struct Cli {
    /// Worker threads (default: all cores). Never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Format of tabular outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Seed of every random stream; defaults to 0.
    #[arg(long, global = true)]
    pub master_seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a graph from an edge or event list, then filter it.
    Preprocess(PreprocessArgs),
    /// Transmission centrality of every link.
    Ctr(CtrArgs),
    /// Overlap, strength and centrality per link.
    Metrics(MetricsArgs),
    /// Order links weakest first.
    Rank(RankArgs),
    /// Controlled SIR experiment.
    Sir(SirArgs),
    /// Correlation of the sampled estimator with the exact one across
    /// unbiasing distances.
    ScanD(ScanArgs),
    /// Synthetic graphs and event streams.
    Generate(GenerateArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Edge list (`u v [w]`) or, with --events, an event list.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub events: bool,
    /// Keep only pairs with events in both directions.
    #[arg(long)]
    pub mutual: bool,
    #[arg(long)]
    pub kcore: Option<usize>,
    /// Keep the largest connected component.
    #[arg(long)]
    pub lcc: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CtrArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub beta: f64,
    /// One realization from every node.
    #[arg(long, conflicts_with = "seeds", required_unless_present = "seeds")]
    pub exact: bool,
    /// Number of sampled seed nodes.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Links within this many hops of a seed are not counted for it.
    #[arg(long, default_value_t = 0, requires = "seeds")]
    pub unbias: u32,
    /// Lower cutoff for the tail exponent fit.
    #[arg(long)]
    pub xmin: Option<f64>,
    /// Log progress every this many realizations.
    #[arg(long)]
    pub progress: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Output table of `linkctr ctr`.
    #[arg(long)]
    pub ctr: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Output table of `linkctr metrics`.
    #[arg(long)]
    pub metrics: PathBuf,
    /// Comma-separated strategies.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_strategy)]
    pub strategy: Vec<Strategy>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SirArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Ranking files; a missing random ranking is drawn from the master seed.
    #[arg(long, value_delimiter = ',')]
    pub ranking: Vec<PathBuf>,
    /// `key = value` experiment settings; defaults apply to missing keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub seeds: usize,
    /// `lo..hi` (inclusive) or a comma list.
    #[arg(long, default_value = "0..4")]
    pub d_range: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenerateKind {
    Er,
    Sbm,
    Events,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: GenerateKind,
    /// Node count for `er`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Link probability for `er`.
    #[arg(long)]
    pub p: Option<f64>,
    /// Block sizes for `sbm` and `events`.
    #[arg(long, value_delimiter = ',')]
    pub blocks: Vec<usize>,
    #[arg(long)]
    pub p_in: Option<f64>,
    #[arg(long)]
    pub p_out: Option<f64>,
    /// Mean events per direction on intra-block links.
    #[arg(long)]
    pub mean_in: Option<f64>,
    /// Mean events per direction on inter-block links.
    #[arg(long)]
    pub mean_out: Option<f64>,
    /// Fraction of links whose events all go one way.
    #[arg(long)]
    pub one_way: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: linkctr::Error| e.to_string())
}

/// Parses and runs one invocation. `argv[0]` is the program name.
pub fn run(argv: Vec<String>) -> CliResult<()> {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            return Err(CliError::Usage(e.render().to_string()));
        }
    };
    let args = manifest::replayable_args(&argv[1..]);
    match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Internal(e.to_string()))?;
            pool.install(|| commands::dispatch(&cli, args))
        }
        None => commands::dispatch(&cli, args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
