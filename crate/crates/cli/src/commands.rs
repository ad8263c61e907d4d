use std::collections::HashMap;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use hybrid_rank::boe::{self, encode, load_checkpoint, save_checkpoint, write_train_log};
use hybrid_rank::corpus::{
    build_pairs, ingest, make_splits, read_cache, read_manifest, write_cache, write_manifest,
    DatasetSplit, QueryArticlePair,
};
use hybrid_rank::eval::{tune_bm25_with, tune_mu_with, DevQuery, TuneResult};
use hybrid_rank::fusion::{export_scores, fuse_with, import_scores, FuseOptions};
use hybrid_rank::io::{read_to_string, write_atomic};
use hybrid_rank::seed::sub_seed;
use hybrid_rank::tfidf::{read_csr, read_vocab, write_csr, write_vocab};
use hybrid_rank::{
    evaluate, tokenize, Bm25Params, DirichletParams, EvalReport, LexStats, ScoreMatrix, TfIdfModel,
};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::Ranker;

/// Where every artifact of a run lives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paths {
    pub output_dir: PathBuf,
    pub cache_dir: PathBuf,
}

impl Paths {
    pub fn new(output_dir: &Path, cache_dir: Option<&Path>) -> Self {
        Self {
            output_dir: output_dir.to_path_buf(),
            cache_dir: cache_dir.map_or_else(|| output_dir.join("cache"), Path::to_path_buf),
        }
    }

    pub fn corpus_cache(&self) -> PathBuf {
        self.cache_dir.join("corpus.jsonl")
    }
    pub fn manifest(&self) -> PathBuf {
        self.cache_dir.join("split.jsonl")
    }
    pub fn tfidf_vocab(&self) -> PathBuf {
        self.output_dir.join("tfidf_vocab.tsv")
    }
    pub fn tfidf_index(&self) -> PathBuf {
        self.output_dir.join("tfidf_index.csr")
    }
    pub fn lex_stats(&self) -> PathBuf {
        self.output_dir.join("lex_stats.json")
    }
    pub fn checkpoint(&self) -> PathBuf {
        self.output_dir.join("boe.ckpt")
    }
    pub fn train_log(&self) -> PathBuf {
        self.output_dir.join("train_log.jsonl")
    }
    pub fn tuned(&self) -> PathBuf {
        self.output_dir.join("tuned.json")
    }
    pub fn scores(&self, label: &str) -> PathBuf {
        self.output_dir.join("scores").join(format!("{label}.tsv"))
    }
    pub fn top_k(&self, label: &str) -> PathBuf {
        self.output_dir.join("topk").join(format!("{label}.tsv"))
    }
    pub fn report(&self, label: &str) -> PathBuf {
        self.output_dir
            .join("reports")
            .join(format!("{label}.json"))
    }
    pub fn per_query(&self, label: &str) -> PathBuf {
        self.output_dir
            .join("reports")
            .join(format!("{label}.per_query.tsv"))
    }
}

#[derive(Debug, Clone)]
pub enum EvalSource {
    Ranker(Ranker),
    Scores(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tuned {
    pub bm25: TuneResult<Bm25Params>,
    pub lm: TuneResult<DirichletParams>,
}

pub struct Pipeline {
    pub cfg: RunConfig,
    pub paths: Paths,
}

fn require(path: PathBuf, stage: &'static str) -> Result<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(CliError::MissingArtifact { path, stage })
    }
}

impl Pipeline {
    pub fn new(cfg: RunConfig, cache_dir: Option<&Path>) -> Self {
        let paths = Paths::new(&cfg.output_dir, cache_dir);
        Self { cfg, paths }
    }

    /// Reads the corpus, builds query/article pairs and the seeded split.
    pub fn ingest(&self) -> Result<Value> {
        let c = &self.cfg.corpus;
        let ingested = ingest(&c.path, &c.format)?;
        let built = build_pairs(&ingested.records, &c.pairs);
        let split = make_splits(
            &built.pairs,
            self.cfg.split,
            sub_seed(self.cfg.seed, "split"),
        )?;
        write_cache(&self.paths.corpus_cache(), &built.pairs)?;
        write_manifest(&self.paths.manifest(), &split)?;
        info!(
            "{} records, {} pairs, {} rejected, {} malformed lines",
            ingested.records.len(),
            built.pairs.len(),
            built.rejected.len(),
            ingested.malformed.len()
        );
        Ok(json!({
            "command": "ingest",
            "records": ingested.records.len(),
            "malformed": ingested.malformed.len(),
            "pairs": built.pairs.len(),
            "rejected": built.rejected.len(),
            "split": split.sizes(),
        }))
    }

    pub fn load_split(&self) -> Result<DatasetSplit> {
        let pairs = read_cache(&require(self.paths.corpus_cache(), "ingest")?)?;
        let (seed, rows) = read_manifest(&require(self.paths.manifest(), "ingest")?)?;
        Ok(DatasetSplit::from_manifest(&pairs, &rows, seed)?)
    }

    fn eval_split<'a>(&self, split: &'a DatasetSplit) -> &'a [QueryArticlePair] {
        split.get(self.cfg.eval.split)
    }

    /// The evaluated pairs: the eval split, cut to `eval.pool_size` when set.
    fn pool<'a>(&self, split: &'a DatasetSplit) -> &'a [QueryArticlePair] {
        let all = self.eval_split(split);
        match self.cfg.eval.pool_size {
            0 => all,
            n => &all[..n.min(all.len())],
        }
    }

    /// Fits TF-IDF and the BM25 / language-model statistics on the articles
    /// of the eval split.
    pub fn fit(&self) -> Result<Value> {
        let split = self.load_split()?;
        let articles: Vec<&[String]> = self
            .eval_split(&split)
            .iter()
            .map(|p| p.article.tokens.as_slice())
            .collect();
        let stop = self.cfg.stopwords()?;
        let model = TfIdfModel::fit(&articles, stop.clone())?;
        let index = model.index(&articles);
        let stats = LexStats::build(&articles, stop)?;
        write_vocab(&self.paths.tfidf_vocab(), &model)?;
        write_csr(&self.paths.tfidf_index(), &index)?;
        stats.save(&self.paths.lex_stats())?;
        Ok(json!({
            "command": "fit",
            "split": self.cfg.eval.split,
            "documents": articles.len(),
            "tfidf_terms": model.vocab_len(),
        }))
    }

    pub fn train(&self) -> Result<Value> {
        let split = self.load_split()?;
        let outcome = boe::train(&split, &self.cfg.train)?;
        save_checkpoint(&self.paths.checkpoint(), &outcome.table, &self.cfg.train)?;
        write_train_log(&self.paths.train_log(), &outcome.log)?;
        let best = outcome.log.iter().find(|e| e.epoch == outcome.best_epoch);
        Ok(json!({
            "command": "train",
            "vocab": outcome.table.len(),
            "dim": outcome.table.dim(),
            "epochs": outcome.log.len(),
            "best_epoch": outcome.best_epoch,
            "best_dev_mrr": best.and_then(|e| e.dev_mrr),
        }))
    }

    /// Grid-searches BM25 and the Dirichlet prior on dev queries against dev articles.
    pub fn tune(&self) -> Result<Value> {
        let split = self.load_split()?;
        if split.dev.is_empty() {
            return Err(CliError::Config(
                "tuning needs a non-empty dev split".into(),
            ));
        }
        let stats = LexStats::build(
            split.dev.iter().map(|p| p.article.tokens.as_slice()),
            self.cfg.stopwords()?,
        )?;
        let dev: Vec<DevQuery> = split
            .dev
            .iter()
            .enumerate()
            .map(|(i, p)| DevQuery {
                tokens: p.query.tokens.clone(),
                relevant: i as u32,
            })
            .collect();
        let n = self.cfg.eval.tune_queries;
        let tuned = Tuned {
            bm25: tune_bm25_with(&dev, &stats, n)?,
            lm: tune_mu_with(&dev, &stats, n)?,
        };
        write_atomic(&self.paths.tuned(), |w| {
            serde_json::to_writer_pretty(&mut *w, &tuned)?;
            w.write_all(b"\n")
        })?;
        Ok(json!({
            "command": "tune",
            "queries": tuned.bm25.n_queries,
            "objective": tuned.bm25.objective,
            "bm25": { "k1": tuned.bm25.best.k1, "b": tuned.bm25.best.b, "mrr": tuned.bm25.best_mrr },
            "lm": { "mu": tuned.lm.best.mu, "mrr": tuned.lm.best_mrr },
        }))
    }

    /// Tuned parameters when `tune` has run, the configured ones otherwise.
    pub fn lexical_params(&self) -> Result<(Bm25Params, DirichletParams, &'static str)> {
        let path = self.paths.tuned();
        if !path.exists() {
            return Ok((self.cfg.bm25, self.cfg.lm, "config"));
        }
        let tuned: Tuned = serde_json::from_str(&read_to_string(&path)?)
            .map_err(|e| hybrid_rank::Error::Format(format!("{}: {e}", path.display())))?;
        Ok((tuned.bm25.best, tuned.lm.best, "tuned"))
    }

    /// Query ids and tokens: the pool's own queries, or a `query_id<TAB>text` file.
    pub fn queries(&self, file: Option<&Path>) -> Result<Vec<(String, Vec<String>)>> {
        let Some(file) = file else {
            let split = self.load_split()?;
            return Ok(self
                .pool(&split)
                .iter()
                .map(|p| (p.pair_id.to_string(), p.query.tokens.clone()))
                .collect());
        };
        let text = read_to_string(file)?;
        let tok = &self.cfg.corpus.pairs.tokenizer;
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, q) = line
                .split_once('\t')
                .ok_or_else(|| hybrid_rank::Error::Parse {
                    line: i + 1,
                    message: "expected query_id<TAB>text".into(),
                })?;
            out.push((id.to_string(), tokenize(q, tok)));
        }
        Ok(out)
    }

    /// Dense score matrix of `queries` against the article pool.
    pub fn score(&self, ranker: Ranker, queries: &[(String, Vec<String>)]) -> Result<ScoreMatrix> {
        let split = self.load_split()?;
        let pool = self.pool(&split);
        let n = pool.len();
        let doc_ids: Vec<String> = pool.iter().map(|p| p.pair_id.to_string()).collect();
        let query_ids: Vec<String> = queries.iter().map(|(id, _)| id.clone()).collect();
        let full_len = self.eval_split(&split).len();
        let stale = |what: &str, len: usize| {
            hybrid_rank::Error::Format(format!(
                "{what} covers {len} documents but the {} split has {full_len}; rerun `hybrid-rank fit`",
                self.cfg.eval.split.as_str()
            ))
        };

        let rows: Vec<Vec<f64>> = match ranker {
            Ranker::Tfidf => {
                let model = read_vocab(
                    &require(self.paths.tfidf_vocab(), "fit")?,
                    self.cfg.stopwords()?,
                )?;
                let index = read_csr(&require(self.paths.tfidf_index(), "fit")?)?;
                if index.len() != full_len {
                    return Err(stale("tf-idf index", index.len()).into());
                }
                queries
                    .par_iter()
                    .map(|(_, q)| index.scores(&model.transform(q))[..n].to_vec())
                    .collect()
            }
            Ranker::Bm25 | Ranker::Lm => {
                let stats = LexStats::load(
                    &require(self.paths.lex_stats(), "fit")?,
                    self.cfg.stopwords()?,
                )?;
                if stats.n_docs() as usize != full_len {
                    return Err(stale("lexical statistics", stats.n_docs() as usize).into());
                }
                let (bp, dp, _) = self.lexical_params()?;
                queries
                    .par_iter()
                    .map(|(_, q)| {
                        let qt = stats.query_terms(q);
                        let mut s = if ranker == Ranker::Bm25 {
                            stats.bm25_all(&qt, bp)
                        } else {
                            stats.lm_dirichlet_all(&qt, dp)
                        };
                        s.truncate(n);
                        s
                    })
                    .collect()
            }
            Ranker::Boe => {
                let (table, _) = load_checkpoint(&require(self.paths.checkpoint(), "train")?)?;
                let articles: Vec<Vec<f64>> = pool
                    .par_iter()
                    .map(|p| encode(&p.article.tokens, &table).vector)
                    .collect();
                queries
                    .par_iter()
                    .map(|(_, q)| {
                        let e = encode(q, &table).vector;
                        articles.iter().map(|a| boe::dot(&e, a)).collect()
                    })
                    .collect()
            }
            Ranker::Fused => {
                let opts = FuseOptions {
                    min_max: self.cfg.fusion.min_max,
                };
                let mut acc: Option<ScoreMatrix> = None;
                for name in &self.cfg.fusion.sources {
                    let m = self.score(name.parse()?, queries)?;
                    acc = Some(match acc {
                        None if opts.min_max => m.min_max_per_query(),
                        None => m,
                        Some(a) => fuse_with(&a, &m, opts)?,
                    });
                }
                return Ok(acc.expect("validated: at least two fusion sources"));
            }
        };
        Ok(ScoreMatrix::from_rows(
            query_ids,
            doc_ids,
            rows,
            ranker.as_str(),
        )?)
    }

    /// Scores queries with `ranker`, writing the full matrix and a top-k listing.
    pub fn rank(&self, ranker: Ranker, queries: Option<&Path>) -> Result<Value> {
        let qs = self.queries(queries)?;
        let m = self.score(ranker, &qs)?;
        let label = ranker.as_str();
        export_scores(&m, &self.paths.scores(label))?;
        self.write_top_k(&m, &self.paths.top_k(label))?;
        Ok(json!({
            "command": "rank",
            "ranker": label,
            "queries": m.shape().0,
            "documents": m.shape().1,
            "scores": self.paths.scores(label).display().to_string(),
        }))
    }

    fn write_top_k(&self, m: &ScoreMatrix, path: &Path) -> Result<()> {
        let k = self.cfg.eval.top_k;
        Ok(write_atomic(path, |w| {
            writeln!(w, "#query_id\trank\tdoc_id\tscore")?;
            for (qi, q) in m.query_ids().iter().enumerate() {
                for (r, s) in m.top_k(qi, k).iter().enumerate() {
                    writeln!(
                        w,
                        "{q}\t{}\t{}\t{}",
                        r + 1,
                        m.doc_ids()[s.doc_id as usize],
                        s.score
                    )?;
                }
            }
            Ok(())
        })?)
    }

    /// Sums score files in order. Writes to `out`, or next to the ranker outputs.
    pub fn fuse(&self, inputs: &[PathBuf], out: Option<&Path>) -> Result<Value> {
        if inputs.len() < 2 {
            return Err(CliError::Config(
                "fuse needs at least two score files".into(),
            ));
        }
        let opts = FuseOptions {
            min_max: self.cfg.fusion.min_max,
        };
        let mut acc: Option<ScoreMatrix> = None;
        for p in inputs {
            let m = import_scores(p)?;
            acc = Some(match acc {
                None if opts.min_max => m.min_max_per_query(),
                None => m,
                Some(a) => fuse_with(&a, &m, opts)?,
            });
        }
        let fused = acc.expect("at least two inputs");
        let dest = out.map_or_else(|| self.paths.scores(&fused.source), Path::to_path_buf);
        export_scores(&fused, &dest)?;
        Ok(json!({
            "command": "fuse",
            "source": fused.source,
            "queries": fused.shape().0,
            "documents": fused.shape().1,
            "scores": dest.display().to_string(),
        }))
    }

    /// Evaluates a ranker (scoring afresh) or a score file. Each query's
    /// relevant document is the article with the same id.
    pub fn evaluate(&self, source: &EvalSource) -> Result<(EvalReport, Value)> {
        let (m, label, mut extra) = match source {
            EvalSource::Ranker(r) => {
                let m = self.score(*r, &self.queries(None)?)?;
                let mut extra = vec![("ranker", json!(r.as_str()))];
                if matches!(r, Ranker::Bm25 | Ranker::Lm) {
                    let (bp, dp, from) = self.lexical_params()?;
                    extra.push(("params_from", json!(from)));
                    extra.push(match r {
                        Ranker::Bm25 => ("params", json!(bp)),
                        _ => ("params", json!(dp)),
                    });
                }
                (m, r.as_str().to_string(), extra)
            }
            EvalSource::Scores(p) => {
                let m = import_scores(p)?;
                let label = m.source.clone();
                let extra = vec![("ranker", json!(label))];
                (m, label, extra)
            }
        };
        let gold: HashMap<String, String> = m
            .query_ids()
            .iter()
            .map(|q| (q.clone(), q.clone()))
            .collect();
        let report = evaluate(&m, &gold, &self.cfg.eval.ks)?;
        extra.push(("split", json!(self.cfg.eval.split)));
        report.write_json(&self.paths.report(&label), &extra)?;
        report.write_per_query_tsv(&self.paths.per_query(&label))?;
        let mut summary = report.summary_json(&extra);
        summary["command"] = json!("evaluate");
        Ok((report, summary))
    }
}
