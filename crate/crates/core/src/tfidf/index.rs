use crate::rank::{top_k, ScoredDoc};

use super::sparse::SparseVector;

/// Exhaustive cosine ranking of `q` against `docs`, where a document's id is its
/// position in the slice.
pub fn rank(q: &SparseVector, docs: &[SparseVector], k: usize) -> Vec<ScoredDoc> {
    let scores: Vec<f64> = docs.iter().map(|d| q.cosine(d)).collect();
    top_k(&scores, k)
}

/// Term-major (inverted) copy of a set of normalized document vectors.
///
/// Scoring walks the postings of the query's terms only, accumulating in
/// ascending term order, which matches the summation order of
/// [`SparseVector::dot`] and so yields bit-identical scores.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfIndex {
    vectors: Vec<SparseVector>,
    offsets: Vec<usize>,
    postings: Vec<(u32, f64)>,
}

impl TfIdfIndex {
    pub fn new(vectors: Vec<SparseVector>, n_terms: usize) -> Self {
        let mut counts = vec![0usize; n_terms + 1];
        for v in &vectors {
            for &(t, _) in v.entries() {
                counts[t as usize + 1] += 1;
            }
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let offsets = counts;
        let mut cursor = offsets.clone();
        let mut postings = vec![(0u32, 0.0f64); offsets[n_terms]];
        for (doc, v) in vectors.iter().enumerate() {
            for &(t, w) in v.entries() {
                let slot = &mut cursor[t as usize];
                postings[*slot] = (doc as u32, w);
                *slot += 1;
            }
        }
        Self {
            vectors,
            offsets,
            postings,
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[SparseVector] {
        &self.vectors
    }

    pub fn n_terms(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Cosine score of `q` against every document.
    pub fn scores(&self, q: &SparseVector) -> Vec<f64> {
        let mut acc = vec![0.0; self.vectors.len()];
        if q.is_zero() {
            return acc;
        }
        for &(t, qw) in q.entries() {
            let t = t as usize;
            if t + 1 >= self.offsets.len() {
                continue;
            }
            for &(doc, dw) in &self.postings[self.offsets[t]..self.offsets[t + 1]] {
                acc[doc as usize] += qw * dw;
            }
        }
        let qn = q.norm();
        for (s, v) in acc.iter_mut().zip(&self.vectors) {
            if *s != 0.0 {
                *s /= qn * v.norm();
            }
        }
        acc
    }

    pub fn rank(&self, q: &SparseVector, k: usize) -> Vec<ScoredDoc> {
        top_k(&self.scores(q), k)
    }
}
