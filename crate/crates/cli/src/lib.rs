//! Library side of the `hybrid-rank` command: configuration, artifact layout
//! and one function per subcommand, so the pipeline can be driven from tests.

pub mod commands;
pub mod config;
pub mod error;

use std::fmt;
use std::str::FromStr;

pub use commands::{EvalSource, Paths, Pipeline};
pub use config::RunConfig;
pub use error::{CliError, Result};

/// Environment variable that relocates the tokenized-corpus cache.
pub const CACHE_DIR_ENV: &str = "HYBRID_RANK_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Ranker {
    Tfidf,
    Bm25,
    Lm,
    Boe,
    Fused,
}

impl Ranker {
    pub fn as_str(self) -> &'static str {
        match self {
            Ranker::Tfidf => "tfidf",
            Ranker::Bm25 => "bm25",
            Ranker::Lm => "lm",
            Ranker::Boe => "boe",
            Ranker::Fused => "fused",
        }
    }
}

impl fmt::Display for Ranker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ranker {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "tfidf" => Ranker::Tfidf,
            "bm25" => Ranker::Bm25,
            "lm" => Ranker::Lm,
            "boe" => Ranker::Boe,
            "fused" => Ranker::Fused,
            other => return Err(CliError::Config(format!("unknown ranker {other:?}"))),
        })
    }
}
