//! Shared ranking helpers. Every ranker orders by descending score and breaks
//! ties by ascending document id.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredDoc {
    pub doc_id: u32,
    pub score: f64,
}

#[inline]
pub fn ranking_order(a: &ScoredDoc, b: &ScoredDoc) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.doc_id.cmp(&b.doc_id))
}

/// Top `k` entries of a dense score vector indexed by doc id.
pub fn top_k(scores: &[f64], k: usize) -> Vec<ScoredDoc> {
    let mut all: Vec<ScoredDoc> = scores
        .iter()
        .enumerate()
        .map(|(i, &score)| ScoredDoc {
            doc_id: i as u32,
            score,
        })
        .collect();
    top_k_of(&mut all, k)
}

/// Top `k` of an arbitrary candidate list (consumed as scratch space).
pub fn top_k_of(candidates: &mut Vec<ScoredDoc>, k: usize) -> Vec<ScoredDoc> {
    if k == 0 || candidates.is_empty() {
        return Vec::new();
    }
    if k < candidates.len() {
        candidates.select_nth_unstable_by(k - 1, ranking_order);
        candidates.truncate(k);
    }
    candidates.sort_unstable_by(ranking_order);
    std::mem::take(candidates)
}

/// 1-based rank of `target` within `scores` under the shared tie-breaking rule.
pub fn rank_of(scores: &[f64], target: usize) -> usize {
    let s = scores[target];
    1 + scores
        .iter()
        .enumerate()
        .filter(|&(i, &x)| x > s || (x == s && i < target))
        .count()
}
