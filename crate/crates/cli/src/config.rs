use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hybrid_rank::corpus::{PairConfig, SplitName, SplitSizes};
use hybrid_rank::{Bm25Params, CorpusFormat, DirichletParams, Stopwords, TrainConfig};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub corpus: CorpusConfig,
    pub split: SplitSizes,
    #[serde(default)]
    pub lexical: LexicalConfig,
    #[serde(default)]
    pub bm25: Bm25Params,
    #[serde(default)]
    pub lm: DirichletParams,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub fusion: FusionConfig,
}

fn default_output_dir() -> PathBuf {
    "runs".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub format: CorpusFormat,
    #[serde(default)]
    pub pairs: PairConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LexicalConfig {
    /// "english", "none", or a path to a one-word-per-line file.
    pub stopwords: String,
}

impl Default for LexicalConfig {
    fn default() -> Self {
        Self {
            stopwords: "english".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Split whose queries are ranked against its own articles.
    pub split: SplitName,
    pub ks: Vec<usize>,
    /// Rank only the first `pool_size` pairs of the split; 0 means all.
    pub pool_size: usize,
    pub tune_queries: usize,
    pub top_k: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            split: SplitName::Test,
            ks: hybrid_rank::eval::DEFAULT_KS.to_vec(),
            pool_size: 0,
            tune_queries: hybrid_rank::eval::DEFAULT_TUNE_QUERIES,
            top_k: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionConfig {
    pub sources: Vec<String>,
    pub min_max: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            sources: vec!["tfidf".into(), "boe".into()],
            min_max: false,
        }
    }
}

impl RunConfig {
    /// Reads a TOML config, applies `key=value` overrides, and validates.
    /// Relative paths inside the file resolve against the file's directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Core(hybrid_rank::Error::io(path, e)))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base, overrides)
    }

    pub fn from_toml(text: &str, base: &Path, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let train_seed_given = table
            .get("train")
            .and_then(|t| t.as_table())
            .is_some_and(|t| t.contains_key("seed"));
        let mut cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        if !train_seed_given {
            cfg.train.seed = cfg.seed;
        }
        if cfg.corpus.path.is_relative() {
            cfg.corpus.path = base.join(&cfg.corpus.path);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        if !matches!(cfg.lexical.stopwords.as_str(), "english" | "none") {
            let p = PathBuf::from(&cfg.lexical.stopwords);
            if p.is_relative() {
                cfg.lexical.stopwords = base.join(p).display().to_string();
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        Bm25Params::new(self.bm25.k1, self.bm25.b)?;
        DirichletParams::new(self.lm.mu)?;
        self.train.validate()?;
        if self.split.train < 2 {
            return bad("split.train must be at least 2".into());
        }
        let eval_size = match self.eval.split {
            SplitName::Train => self.split.train,
            SplitName::Dev => self.split.dev,
            SplitName::Test => self.split.test,
        };
        if eval_size == 0 {
            return bad(format!("eval split {} is empty", self.eval.split.as_str()));
        }
        if self.eval.ks.is_empty() || self.eval.ks.contains(&0) {
            return bad("eval.ks must be non-empty and positive".into());
        }
        if self.eval.top_k == 0 {
            return bad("eval.top_k must be positive".into());
        }
        if self.fusion.sources.len() < 2 {
            return bad("fusion.sources needs at least two rankers".into());
        }
        for s in &self.fusion.sources {
            match s.parse::<crate::Ranker>() {
                Ok(crate::Ranker::Fused) | Err(_) => {
                    return bad(format!("fusion source {s:?} is not a base ranker"))
                }
                Ok(_) => {}
            }
        }
        if self.corpus.pairs.max_article_len == 0 {
            return bad("corpus.pairs.max_article_len must be positive".into());
        }
        Ok(())
    }

    pub fn stopwords(&self) -> Result<Stopwords> {
        Ok(match self.lexical.stopwords.as_str() {
            "english" => Stopwords::english(),
            "none" => Stopwords::empty(),
            path => Stopwords::from_file(Path::new(path))?,
        })
    }
}

/// `a.b.c=value`. The value is parsed as a TOML value when possible and taken
/// as a bare string otherwise.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {spec:?} is not key=value")))?;
    let value: toml::Value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, path) = parts.split_last().expect("split yields at least one part");
    let mut cur = table;
    for p in path {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override {key:?}: {p:?} is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
