use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use hybrid_rank_cli::{CliError, EvalSource, Pipeline, Ranker, RunConfig, CACHE_DIR_ENV};

#[derive(Parser)]
#[command(
    name = "hybrid-rank",
    version,
    about = "Hybrid lexical and embedding retrieval pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, short)]
    config: PathBuf,
    /// Override a config key, e.g. `--set train.dim=32`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Ordered reductions everywhere. Always the case; accepted for scripts.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize the corpus, build query/article pairs and the split manifest.
    Ingest(Common),
    /// Fit TF-IDF and BM25 / language-model statistics on the eval split.
    Fit(Common),
    /// Train the bag-of-embeddings encoder.
    Train(Common),
    /// Grid-search BM25 (k1, b) and the Dirichlet prior on dev queries.
    Tune(Common),
    /// Score queries with one ranker and write the matrix and a top-k listing.
    Rank {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        ranker: Ranker,
        /// `query_id<TAB>text` file; defaults to the eval split's queries.
        #[arg(long)]
        queries: Option<PathBuf>,
    },
    /// Sum score matrices.
    Fuse {
        #[command(flatten)]
        common: Common,
        #[arg(required = true, num_args = 2..)]
        inputs: Vec<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Compute MRR and precision@k for a ranker or a score file.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(
            long,
            value_enum,
            conflicts_with = "scores",
            required_unless_present = "scores"
        )]
        ranker: Option<Ranker>,
        #[arg(long)]
        scores: Option<PathBuf>,
    },
}

fn pipeline(c: &Common) -> Result<Pipeline, CliError> {
    let mut overrides = c.overrides.clone();
    if let Some(seed) = c.seed {
        overrides.push(format!("seed={seed}"));
    }
    let mut cfg = RunConfig::load(&c.config, &overrides)?;
    if let Some(dir) = &c.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    if c.deterministic {
        info!("deterministic mode");
    }
    let cache = std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from);
    Ok(Pipeline::new(cfg, cache.as_deref()))
}

fn run(cli: Cli) -> Result<serde_json::Value, CliError> {
    match cli.command {
        Command::Ingest(c) => pipeline(&c)?.ingest(),
        Command::Fit(c) => pipeline(&c)?.fit(),
        Command::Train(c) => pipeline(&c)?.train(),
        Command::Tune(c) => pipeline(&c)?.tune(),
        Command::Rank {
            common,
            ranker,
            queries,
        } => pipeline(&common)?.rank(ranker, queries.as_deref()),
        Command::Fuse {
            common,
            inputs,
            out,
        } => pipeline(&common)?.fuse(&inputs, out.as_deref()),
        Command::Evaluate {
            common,
            ranker,
            scores,
        } => {
            let source = match (ranker, scores) {
                (Some(r), _) => EvalSource::Ranker(r),
                (None, Some(p)) => EvalSource::Scores(p),
                (None, None) => unreachable!("clap requires one of --ranker / --scores"),
            };
            Ok(pipeline(&common)?.evaluate(&source)?.1)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
