use std::collections::BTreeMap;

use log::debug;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::table::{build_vocab, EmbeddingTable};
use super::{
    dot, encode_ids, select_negative, Encoding, LossSample, NegativeStrategy, TrainConfig,
};
use crate::corpus::{DatasetSplit, QueryArticlePair};
use crate::error::{Error, Result};
use crate::rank::rank_of;
use crate::seed::sub_seed;

/// A training pair mapped to embedding rows (out-of-vocabulary tokens dropped).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub query: Vec<u32>,
    pub article: Vec<u32>,
}

impl Example {
    pub fn from_pair(
        pair: &QueryArticlePair,
        table: &EmbeddingTable,
        max_article_len: usize,
    ) -> Self {
        Self {
            query: table.ids(&pair.query.tokens),
            article: table.ids(pair.training_article(max_len_or_all(max_article_len))),
        }
    }
}

fn max_len_or_all(n: usize) -> usize {
    if n == 0 {
        usize::MAX
    } else {
        n
    }
}

/// Sparse gradient with respect to the embedding table, keyed by row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gradient {
    rows: BTreeMap<u32, Vec<f64>>,
}

impl Gradient {
    pub fn row(&self, id: u32) -> Option<&[f64]> {
        self.rows.get(&id).map(Vec::as_slice)
    }

    pub fn rows(&self) -> impl Iterator<Item = (u32, &[f64])> {
        self.rows.iter().map(|(&r, g)| (r, g.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    fn add_scaled(&mut self, row: u32, scale: f64, v: &[f64]) {
        let g = self.rows.entry(row).or_insert_with(|| vec![0.0; v.len()]);
        for (gi, vi) in g.iter_mut().zip(v) {
            *gi += scale * vi;
        }
    }
}

struct Forward {
    queries: Vec<Encoding>,
    articles: Vec<Encoding>,
    /// raw[i][j] = <query i, article j>
    raw: Vec<Vec<f64>>,
}

fn forward(batch: &[Example], table: &EmbeddingTable) -> Forward {
    let queries: Vec<Encoding> = batch
        .par_iter()
        .map(|e| encode_ids(&e.query, table))
        .collect();
    let articles: Vec<Encoding> = batch
        .par_iter()
        .map(|e| encode_ids(&e.article, table))
        .collect();
    let raw = queries
        .par_iter()
        .map(|q| articles.iter().map(|a| dot(&q.vector, &a.vector)).collect())
        .collect();
    Forward {
        queries,
        articles,
        raw,
    }
}

fn negatives_for<R: Rng + ?Sized>(
    fwd: &Forward,
    strategy: NegativeStrategy,
    rng: &mut R,
) -> Vec<usize> {
    (0..fwd.raw.len())
        .map(|i| select_negative(&fwd.raw[i], i, strategy, rng))
        .collect()
}

/// In-batch negative for every query of `batch`.
pub fn select_batch_negatives<R: Rng + ?Sized>(
    batch: &[Example],
    table: &EmbeddingTable,
    strategy: NegativeStrategy,
    rng: &mut R,
) -> Vec<usize> {
    negatives_for(&forward(batch, table), strategy, rng)
}

fn backward(
    batch: &[Example],
    fwd: &Forward,
    cfg: &TrainConfig,
    negatives: &[usize],
) -> Result<(Vec<LossSample>, Gradient)> {
    let dim = fwd.queries.first().map_or(0, |e| e.vector.len());
    let n = batch.len();
    // d loss / d (unit encoding), per query and per article
    let mut g_query = vec![vec![0.0; dim]; n];
    let mut g_article = vec![vec![0.0; dim]; n];
    let mut samples = Vec::with_capacity(n);

    for i in 0..n {
        let j = negatives[i];
        let (s_p, ds_p) = cfg.loss_score.apply(fwd.raw[i][i]);
        let (s_n, ds_n) = cfg.loss_score.apply(fwd.raw[i][j]);
        let sample = LossSample::new(s_p, s_n, cfg.delta);
        if !sample.loss.is_finite() {
            return Err(Error::NonFiniteGradient { sample: i });
        }
        samples.push(sample);
        if sample.loss <= 0.0 {
            continue;
        }
        // loss = delta - s_p + s_n; the choice of j is held fixed.
        let (q, a, neg) = (
            &fwd.queries[i].vector,
            &fwd.articles[i].vector,
            &fwd.articles[j].vector,
        );
        for k in 0..dim {
            g_query[i][k] += -ds_p * a[k] + ds_n * neg[k];
            g_article[i][k] += -ds_p * q[k];
            g_article[j][k] += ds_n * q[k];
        }
        if g_query[i]
            .iter()
            .chain(&g_article[i])
            .chain(&g_article[j])
            .any(|g| !g.is_finite())
        {
            return Err(Error::NonFiniteGradient { sample: i });
        }
    }

    let mut grad = Gradient::default();
    let sides = [(&fwd.queries, &g_query), (&fwd.articles, &g_article)];
    for i in 0..n {
        for (side, (encs, grads)) in sides.iter().enumerate() {
            let enc = &encs[i];
            let g = &grads[i];
            if enc.is_zero() || g.iter().all(|&x| x == 0.0) {
                continue;
            }
            // through normalization: (I - e e^T) g / |mean|
            let e = &enc.vector;
            let proj = dot(e, g);
            let through: Vec<f64> = g
                .iter()
                .zip(e)
                .map(|(gk, ek)| (gk - proj * ek) / enc.mean_norm)
                .collect();
            // through the mean: each occurrence contributes 1 / n_tokens
            let ids = if side == 0 {
                &batch[i].query
            } else {
                &batch[i].article
            };
            let w = 1.0 / ids.len() as f64;
            for &id in ids {
                grad.add_scaled(id, w, &through);
            }
        }
    }
    if let Some((&row, _)) = grad
        .rows
        .iter()
        .find(|(_, g)| g.iter().any(|x| !x.is_finite()))
    {
        let sample = batch
            .iter()
            .position(|e| e.query.contains(&row) || e.article.contains(&row))
            .unwrap_or(0);
        return Err(Error::NonFiniteGradient { sample });
    }
    Ok((samples, grad))
}

/// Losses and the analytic gradient of their sum for fixed negatives.
pub fn batch_gradient(
    batch: &[Example],
    table: &EmbeddingTable,
    cfg: &TrainConfig,
    negatives: &[usize],
) -> Result<(Vec<LossSample>, Gradient)> {
    assert_eq!(batch.len(), negatives.len());
    backward(batch, &forward(batch, table), cfg, negatives)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub mean_loss: f64,
    pub samples: Vec<LossSample>,
    pub negatives: Vec<usize>,
    pub touched_rows: usize,
}

/// Selects negatives, back-propagates the summed hinge loss and applies one
/// Adam update. On a non-finite gradient nothing is modified.
pub fn grad_step<R: Rng + ?Sized>(
    batch: &[Example],
    table: &mut EmbeddingTable,
    adam: &mut AdamState,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<StepReport> {
    if batch.len() < 2 {
        return Err(Error::Config("a batch needs at least two pairs".into()));
    }
    let fwd = forward(batch, table);
    let negatives = negatives_for(&fwd, cfg.neg_strategy, rng);
    let (samples, grad) = backward(batch, &fwd, cfg, &negatives)?;
    adam.step(table, grad.rows(), cfg.lr);
    let mean_loss = samples.iter().map(|s| s.loss).sum::<f64>() / samples.len() as f64;
    Ok(StepReport {
        mean_loss,
        samples,
        negatives,
        touched_rows: grad.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLogEntry {
    pub epoch: usize,
    pub mean_loss: f64,
    pub dev_mrr: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Table from the epoch with the best dev MRR (the last epoch without a dev set).
    pub table: EmbeddingTable,
    pub log: Vec<TrainLogEntry>,
    /// 0 when no epoch ran.
    pub best_epoch: usize,
}

/// MRR of ranking each pair's article among all articles of `pairs` for that
/// pair's query, using full (untruncated) articles.
pub fn pair_mrr(pairs: &[QueryArticlePair], table: &EmbeddingTable) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let scores = pair_scores(pairs, table);
    let sum: f64 = scores
        .par_iter()
        .enumerate()
        .map(|(i, row)| 1.0 / rank_of(row, i) as f64)
        .collect::<Vec<_>>()
        .iter()
        .sum();
    sum / pairs.len() as f64
}

/// Dense query x article score matrix for a list of pairs.
pub fn pair_scores(pairs: &[QueryArticlePair], table: &EmbeddingTable) -> Vec<Vec<f64>> {
    let queries: Vec<Encoding> = pairs
        .par_iter()
        .map(|p| encode_ids(&table.ids(&p.query.tokens), table))
        .collect();
    let articles: Vec<Encoding> = pairs
        .par_iter()
        .map(|p| encode_ids(&table.ids(&p.article.tokens), table))
        .collect();
    queries
        .par_iter()
        .map(|q| articles.iter().map(|a| dot(&q.vector, &a.vector)).collect())
        .collect()
}

pub fn train(split: &DatasetSplit, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if split.train.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let max_len = cfg.max_article_len;
    let vocab = build_vocab(
        split
            .train
            .iter()
            .flat_map(|p| p.query.tokens.iter().chain(p.training_article(max_len))),
        cfg.min_count,
    );
    let mut table = EmbeddingTable::init(vocab, cfg.dim, sub_seed(cfg.seed, "init"))?;
    let mut log = Vec::with_capacity(cfg.epochs);
    if cfg.epochs == 0 {
        return Ok(TrainOutcome {
            table,
            log,
            best_epoch: 0,
        });
    }

    let examples: Vec<Example> = split
        .train
        .iter()
        .map(|p| Example::from_pair(p, &table, max_len))
        .collect();
    let mut adam = AdamState::new(&table);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, "shuffle"));
    let mut neg_rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, "negatives"));
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut best: Option<(f64, usize, EmbeddingTable)> = None;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let (mut loss_sum, mut n_samples) = (0.0, 0usize);
        for chunk in order.chunks(cfg.batch_size) {
            if chunk.len() < 2 {
                continue;
            }
            let batch: Vec<Example> = chunk.iter().map(|&i| examples[i].clone()).collect();
            let report = grad_step(&batch, &mut table, &mut adam, cfg, &mut neg_rng)?;
            loss_sum += report.samples.iter().map(|s| s.loss).sum::<f64>();
            n_samples += report.samples.len();
        }
        let mean_loss = if n_samples == 0 {
            0.0
        } else {
            loss_sum / n_samples as f64
        };
        let dev_mrr = (!split.dev.is_empty()).then(|| pair_mrr(&split.dev, &table));
        debug!("epoch {epoch}: mean loss {mean_loss:.6}, dev mrr {dev_mrr:?}");
        log.push(TrainLogEntry {
            epoch,
            mean_loss,
            dev_mrr,
        });
        if let Some(mrr) = dev_mrr {
            if best.as_ref().is_none_or(|b| mrr > b.0) {
                best = Some((mrr, epoch, table.clone()));
            }
        }
    }

    Ok(match best {
        Some((_, best_epoch, table)) => TrainOutcome {
            table,
            log,
            best_epoch,
        },
        None => TrainOutcome {
            table,
            log,
            best_epoch: cfg.epochs,
        },
    })
}
