//! Bag-of-embeddings dual encoder.
//!
//! A token sequence is encoded as the L2-normalized mean of its in-vocabulary
//! embedding rows; queries and articles share one table. Training minimizes
//! the margin loss `max(0, delta - s_p + s_n)` where the negative article is
//! picked from the other articles in the batch.

mod adam;
mod checkpoint;
mod table;
mod train;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use adam::AdamState;
pub use checkpoint::{
    config_digest, load_checkpoint, save_checkpoint, write_train_log, CheckpointInfo,
    CHECKPOINT_MAGIC,
};
pub use table::{build_vocab, EmbeddingTable, INIT_RANGE};
pub use train::{
    batch_gradient, grad_step, pair_mrr, pair_scores, select_batch_negatives, train, Example,
    Gradient, StepReport, TrainLogEntry, TrainOutcome,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativeStrategy {
    /// Lowest-scoring other article in the batch.
    PerPaperMin,
    /// Highest-scoring other article in the batch.
    HardestMax,
    /// Uniformly random other article.
    Random,
}

/// Which score enters the margin loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossScore {
    /// Dot product of the unit encodings.
    Cosine,
    /// Sigmoid of that dot product.
    SigmoidCosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub delta: f64,
    pub lr: f64,
    pub dim: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub neg_strategy: NegativeStrategy,
    pub loss_score: LossScore,
    pub seed: u64,
    pub max_article_len: usize,
    /// Tokens seen fewer times than this in the training split are out of vocabulary.
    pub min_count: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            delta: 0.5,
            lr: 0.001,
            dim: 64,
            batch_size: 64,
            epochs: 10,
            neg_strategy: NegativeStrategy::PerPaperMin,
            loss_score: LossScore::Cosine,
            seed: 0,
            max_article_len: 1000,
            min_count: 2,
        }
    }
}

impl TrainConfig {
    /// The values used for the full-scale runs: dim 768, batch 1000.
    pub fn full_scale() -> Self {
        Self {
            dim: 768,
            batch_size: 1000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad("delta must be > 0");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr must be > 0");
        }
        if self.dim == 0 {
            return bad("dim must be >= 1");
        }
        if self.batch_size < 2 {
            return bad("batch_size must be >= 2");
        }
        if self.max_article_len == 0 {
            return bad("max_article_len must be >= 1");
        }
        if self.min_count == 0 {
            return bad("min_count must be >= 1");
        }
        Ok(())
    }
}

/// Output of [`encode`]: a unit vector, or the zero vector when no token was
/// in the vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    pub vector: Vec<f64>,
    /// Number of in-vocabulary tokens that were averaged.
    pub in_vocab: usize,
    /// L2 norm of the mean before normalization.
    pub mean_norm: f64,
}

impl Encoding {
    pub fn is_zero(&self) -> bool {
        self.mean_norm == 0.0
    }
}

pub fn encode(tokens: &[String], table: &EmbeddingTable) -> Encoding {
    encode_ids(&table.ids(tokens), table)
}

pub fn encode_ids(ids: &[u32], table: &EmbeddingTable) -> Encoding {
    let dim = table.dim();
    let mut mean = vec![0.0; dim];
    if ids.is_empty() {
        return Encoding {
            vector: mean,
            in_vocab: 0,
            mean_norm: 0.0,
        };
    }
    for &id in ids {
        for (m, w) in mean.iter_mut().zip(table.row(id)) {
            *m += w;
        }
    }
    let n = ids.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    let norm = mean.iter().map(|m| m * m).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Encoding {
            vector: vec![0.0; dim],
            in_vocab: ids.len(),
            mean_norm: 0.0,
        };
    }
    mean.iter_mut().for_each(|m| *m /= norm);
    Encoding {
        vector: mean,
        in_vocab: ids.len(),
        mean_norm: norm,
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dot product of two encodings; zero vectors score 0.
pub fn score_embed(q: &[f64], a: &[f64]) -> f64 {
    dot(q, a)
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn score_sigmoid(q: &[f64], a: &[f64]) -> f64 {
    sigmoid(score_embed(q, a))
}

impl LossScore {
    /// Maps a raw dot product to the loss score, returning (score, d score / d dot).
    #[inline]
    pub fn apply(self, raw: f64) -> (f64, f64) {
        match self {
            LossScore::Cosine => (raw, 1.0),
            LossScore::SigmoidCosine => {
                let s = sigmoid(raw);
                (s, s * (1.0 - s))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSample {
    pub s_p: f64,
    pub s_n: f64,
    pub loss: f64,
}

impl LossSample {
    pub fn new(s_p: f64, s_n: f64, delta: f64) -> Self {
        Self {
            s_p,
            s_n,
            loss: hinge_loss(s_p, s_n, delta),
        }
    }
}

#[inline]
pub fn hinge_loss(s_p: f64, s_n: f64, delta: f64) -> f64 {
    (delta - s_p + s_n).max(0.0)
}

/// Chooses the negative article for query `q_index` given that query's scores
/// against every article in the batch. The query's own article is never chosen;
/// ties resolve to the lowest index.
pub fn select_negative<R: Rng + ?Sized>(
    scores: &[f64],
    q_index: usize,
    strategy: NegativeStrategy,
    rng: &mut R,
) -> usize {
    assert!(
        scores.len() >= 2,
        "negative selection needs at least two articles"
    );
    let others = (0..scores.len()).filter(|&j| j != q_index);
    match strategy {
        NegativeStrategy::PerPaperMin => others
            .reduce(|best, j| if scores[j] < scores[best] { j } else { best })
            .unwrap(),
        NegativeStrategy::HardestMax => others
            .reduce(|best, j| if scores[j] > scores[best] { j } else { best })
            .unwrap(),
        NegativeStrategy::Random => {
            let pick = rng.random_range(0..scores.len() - 1);
            if pick >= q_index {
                pick + 1
            } else {
                pick
            }
        }
    }
}
