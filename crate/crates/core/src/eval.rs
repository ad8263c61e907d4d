//! MRR and Precision@k over score matrices, and grid search for the lexical
//! baselines.
//!
//! Every query has exactly one relevant document. Its rank counts documents
//! with a strictly higher score plus equal-scoring documents with a smaller id.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{id_order, ScoreMatrix};
use crate::io::write_atomic;
use crate::probabilistic::{Bm25Params, DirichletParams, LexStats};
use crate::rank::rank_of;

pub const DEFAULT_KS: [usize; 3] = [1, 3, 10];
pub const DEFAULT_TUNE_QUERIES: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOutcome {
    pub query_id: String,
    pub relevant_doc: String,
    /// 1-based rank of the relevant document.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mrr: f64,
    pub p_at: BTreeMap<usize, f64>,
    pub n_queries: usize,
    pub pool_size: usize,
    /// Sorted by query id.
    pub per_query: Vec<RankOutcome>,
}

impl EvalReport {
    pub fn from_ranks(mut per_query: Vec<RankOutcome>, ks: &[usize], pool_size: usize) -> Self {
        per_query.sort_by(|a, b| id_order(&a.query_id, &b.query_id));
        let n = per_query.len();
        let mrr = if n == 0 {
            0.0
        } else {
            per_query.iter().map(|o| 1.0 / o.rank as f64).sum::<f64>() / n as f64
        };
        let p_at = ks
            .iter()
            .map(|&k| {
                let hits = per_query.iter().filter(|o| o.rank <= k).count();
                (k, if n == 0 { 0.0 } else { hits as f64 / n as f64 })
            })
            .collect();
        Self {
            mrr,
            p_at,
            n_queries: n,
            pool_size,
            per_query,
        }
    }

    pub fn p_at(&self, k: usize) -> Option<f64> {
        self.p_at.get(&k).copied()
    }

    /// `{mrr, p_at_<k>..., n_queries, pool_size}` plus any extra labels.
    pub fn summary_json(&self, extra: &[(&str, serde_json::Value)]) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        obj.insert("mrr".into(), self.mrr.into());
        for (k, v) in &self.p_at {
            obj.insert(format!("p_at_{k}"), (*v).into());
        }
        obj.insert("n_queries".into(), self.n_queries.into());
        obj.insert("pool_size".into(), self.pool_size.into());
        for (key, v) in extra {
            obj.insert((*key).into(), v.clone());
        }
        serde_json::Value::Object(obj)
    }

    pub fn write_json(&self, path: &Path, extra: &[(&str, serde_json::Value)]) -> Result<()> {
        let json = self.summary_json(extra);
        write_atomic(path, |w| {
            serde_json::to_writer_pretty(&mut *w, &json)?;
            w.write_all(b"\n")
        })
    }

    pub fn write_per_query_tsv(&self, path: &Path) -> Result<()> {
        write_atomic(path, |w| {
            writeln!(w, "#query_id\trelevant_doc\trank")?;
            for o in &self.per_query {
                writeln!(w, "{}\t{}\t{}", o.query_id, o.relevant_doc, o.rank)?;
            }
            Ok(())
        })
    }
}

/// Ranks the relevant document of every query in `scores`.
pub fn evaluate(
    scores: &ScoreMatrix,
    gold: &HashMap<String, String>,
    ks: &[usize],
) -> Result<EvalReport> {
    let doc_col: HashMap<&str, usize> = scores
        .doc_ids()
        .iter()
        .enumerate()
        .map(|(i, d)| (d.as_str(), i))
        .collect();
    let mut targets = Vec::with_capacity(scores.query_ids().len());
    for q in scores.query_ids() {
        let rel = gold
            .get(q)
            .ok_or_else(|| Error::MissingGold(format!("no relevant document for query {q:?}")))?;
        let col = *doc_col.get(rel.as_str()).ok_or_else(|| {
            Error::MissingGold(format!(
                "relevant document {rel:?} of query {q:?} not scored"
            ))
        })?;
        targets.push(col);
    }
    let doc_ids = scores.doc_ids();
    let per_query: Vec<RankOutcome> = targets
        .par_iter()
        .enumerate()
        .map(|(qi, &col)| {
            let row = scores.row(qi);
            let s = row[col];
            let gold_id = &doc_ids[col];
            let ahead = row
                .iter()
                .zip(doc_ids)
                .filter(|&(&x, id)| x > s || (x == s && id_order(id, gold_id) == Ordering::Less))
                .count();
            RankOutcome {
                query_id: scores.query_ids()[qi].clone(),
                relevant_doc: gold_id.clone(),
                rank: ahead + 1,
            }
        })
        .collect();
    Ok(EvalReport::from_ranks(per_query, ks, doc_ids.len()))
}

/// A tuning query: tokens and the index of its relevant document in the stats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DevQuery {
    pub tokens: Vec<String>,
    pub relevant: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint<P> {
    pub params: P,
    pub mrr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult<P> {
    pub best: P,
    pub best_mrr: f64,
    pub objective: String,
    pub n_queries: usize,
    pub grid: Vec<GridPoint<P>>,
}

/// k1 in 0.5, 1.0, ..., 5.0 crossed with b in 0.3, 0.4, ..., 0.9, in
/// lexicographic (k1, b) order.
pub fn bm25_grid() -> Vec<Bm25Params> {
    (1..=10)
        .flat_map(|i| {
            (3..=9).map(move |j| Bm25Params {
                k1: i as f64 * 0.5,
                b: j as f64 / 10.0,
            })
        })
        .collect()
}

pub fn mu_grid() -> Vec<DirichletParams> {
    [
        100.0, 200.0, 300.0, 400.0, 500.0, 1000.0, 1500.0, 2000.0, 2500.0, 3000.0,
    ]
    .into_iter()
    .map(|mu| DirichletParams { mu })
    .collect()
}

fn mrr_of(queries: &[DevQuery], score_all: impl Fn(usize) -> Vec<f64> + Sync) -> f64 {
    let rr: Vec<f64> = queries
        .par_iter()
        .enumerate()
        .map(|(i, q)| 1.0 / rank_of(&score_all(i), q.relevant as usize) as f64)
        .collect();
    rr.iter().sum::<f64>() / queries.len() as f64
}

/// Evaluates every grid point in order and keeps the first one with the
/// highest MRR, so ties resolve to the smallest parameters.
fn grid_search<P>(
    grid: Vec<P>,
    queries: &[DevQuery],
    score: impl Fn(usize, P) -> Vec<f64> + Sync,
) -> Result<TuneResult<P>>
where
    P: Copy + Send + Sync,
{
    if queries.is_empty() {
        return Err(Error::Config("tuning needs at least one dev query".into()));
    }
    let points: Vec<GridPoint<P>> = grid
        .into_iter()
        .map(|p| GridPoint {
            params: p,
            mrr: mrr_of(queries, |i| score(i, p)),
        })
        .collect();
    let mut best = 0;
    for (i, pt) in points.iter().enumerate() {
        if pt.mrr > points[best].mrr {
            best = i;
        }
    }
    Ok(TuneResult {
        best: points[best].params,
        best_mrr: points[best].mrr,
        objective: "mrr".into(),
        n_queries: queries.len(),
        grid: points,
    })
}

pub fn tune_bm25(dev: &[DevQuery], stats: &LexStats) -> Result<TuneResult<Bm25Params>> {
    tune_bm25_with(dev, stats, DEFAULT_TUNE_QUERIES)
}

/// Grid search over at most the first `max_queries` dev queries.
pub fn tune_bm25_with(
    dev: &[DevQuery],
    stats: &LexStats,
    max_queries: usize,
) -> Result<TuneResult<Bm25Params>> {
    let dev = &dev[..dev.len().min(max_queries)];
    let analyzed: Vec<_> = dev.iter().map(|q| stats.query_terms(&q.tokens)).collect();
    grid_search(bm25_grid(), dev, |i, p| stats.bm25_all(&analyzed[i], p))
}

pub fn tune_mu(dev: &[DevQuery], stats: &LexStats) -> Result<TuneResult<DirichletParams>> {
    tune_mu_with(dev, stats, DEFAULT_TUNE_QUERIES)
}

pub fn tune_mu_with(
    dev: &[DevQuery],
    stats: &LexStats,
    max_queries: usize,
) -> Result<TuneResult<DirichletParams>> {
    let dev = &dev[..dev.len().min(max_queries)];
    let analyzed: Vec<_> = dev.iter().map(|q| stats.query_terms(&q.tokens)).collect();
    grid_search(mu_grid(), dev, |i, p| {
        stats.lm_dirichlet_all(&analyzed[i], p)
    })
}
