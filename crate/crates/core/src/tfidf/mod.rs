//! Sublinear TF-IDF over unigrams and bigrams with cosine ranking.
//!
//! For a term `t` in document `d`:
//!
//! ```text
//! tf(t, d) = 1 + ln f(t, d)
//! idf(t)   = ln((1 + n) / (1 + df(t))) + 1
//! ```
//!
//! Stopwords are removed before bigrams are formed, so "the big dog" with
//! stopword "the" yields the bigram "big dog". Queries go through the same path
//! as documents.

mod index;
mod persist;
mod sparse;

use std::collections::{BTreeMap, HashMap, HashSet};

pub use index::{rank, TfIdfIndex};
pub use persist::{read_csr, read_vocab, write_csr, write_vocab, CSR_MAGIC, VOCAB_FORMAT};
pub use sparse::SparseVector;

use crate::error::{Error, Result};
use crate::stopwords::Stopwords;

#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfModel {
    term_index: HashMap<String, u32>,
    terms: Vec<String>,
    df: Vec<u32>,
    n_docs: u32,
    stopwords: Stopwords,
}

/// Unigram and bigram features of a token stream after stopword removal.
pub fn features(tokens: &[String], stopwords: &Stopwords) -> Vec<String> {
    let kept = stopwords.filter(tokens);
    let mut out: Vec<String> = kept.iter().map(|t| t.to_string()).collect();
    out.extend(kept.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    out
}

impl TfIdfModel {
    pub fn fit<D, T>(docs: D, stopwords: Stopwords) -> Result<Self>
    where
        D: IntoIterator<Item = T>,
        T: AsRef<[String]>,
    {
        let mut df: BTreeMap<String, u32> = BTreeMap::new();
        let mut n_docs = 0u32;
        for doc in docs {
            n_docs += 1;
            let unique: HashSet<String> = features(doc.as_ref(), &stopwords).into_iter().collect();
            for term in unique {
                *df.entry(term).or_default() += 1;
            }
        }
        if n_docs == 0 {
            return Err(Error::EmptyCorpus);
        }
        // BTreeMap order makes term ids lexicographic, independent of input order.
        let (terms, df): (Vec<String>, Vec<u32>) = df.into_iter().unzip();
        Ok(Self::from_parts(terms, df, n_docs, stopwords))
    }

    pub(crate) fn from_parts(
        terms: Vec<String>,
        df: Vec<u32>,
        n_docs: u32,
        stopwords: Stopwords,
    ) -> Self {
        let term_index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self {
            term_index,
            terms,
            df,
            n_docs,
            stopwords,
        }
    }

    pub fn n_docs(&self) -> u32 {
        self.n_docs
    }

    pub fn vocab_len(&self) -> usize {
        self.terms.len()
    }

    pub fn stopwords(&self) -> &Stopwords {
        &self.stopwords
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.term_index.get(term).copied()
    }

    pub fn term(&self, id: u32) -> &str {
        &self.terms[id as usize]
    }

    pub fn df(&self, id: u32) -> u32 {
        self.df[id as usize]
    }

    pub fn df_of(&self, term: &str) -> Option<u32> {
        self.term_id(term).map(|id| self.df(id))
    }

    pub fn idf(&self, id: u32) -> f64 {
        idf(self.n_docs, self.df(id))
    }

    /// Unnormalized TF-IDF weights; out-of-vocabulary terms are ignored.
    pub fn weights(&self, tokens: &[String]) -> SparseVector {
        let mut counts: HashMap<u32, u32> = HashMap::new();
        for f in features(tokens, &self.stopwords) {
            if let Some(id) = self.term_id(&f) {
                *counts.entry(id).or_default() += 1;
            }
        }
        SparseVector::new(
            counts
                .into_iter()
                .map(|(id, f)| (id, tf(f) * self.idf(id)))
                .collect(),
        )
    }

    /// L2-normalized TF-IDF vector. A document with no known terms maps to the
    /// zero vector.
    pub fn transform(&self, tokens: &[String]) -> SparseVector {
        self.weights(tokens).normalized()
    }

    pub fn index<D, T>(&self, docs: D) -> TfIdfIndex
    where
        D: IntoIterator<Item = T>,
        T: AsRef<[String]>,
    {
        let vectors = docs
            .into_iter()
            .map(|d| self.transform(d.as_ref()))
            .collect();
        TfIdfIndex::new(vectors, self.vocab_len())
    }

    pub(crate) fn terms(&self) -> &[String] {
        &self.terms
    }

    pub(crate) fn df_table(&self) -> &[u32] {
        &self.df
    }
}

#[inline]
pub fn tf(count: u32) -> f64 {
    1.0 + (count as f64).ln()
}

#[inline]
pub fn idf(n_docs: u32, df: u32) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Cosine score between two vectors from the same model.
pub fn score(q: &SparseVector, a: &SparseVector) -> f64 {
    q.cosine(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn document_frequencies_count_documents() {
        let docs = [toks("a b"), toks("b c")];
        let m = TfIdfModel::fit(&docs, Stopwords::empty()).unwrap();
        assert_eq!(m.n_docs(), 2);
        assert_eq!(m.df_of("a"), Some(1));
        assert_eq!(m.df_of("b"), Some(2));
        assert_eq!(m.df_of("c"), Some(1));
        assert_eq!(m.df_of("a b"), Some(1));
        assert_eq!(m.df_of("b c"), Some(1));
        assert_eq!(m.vocab_len(), 5);
    }

    #[test]
    fn repeated_terms_count_once_per_document() {
        let docs = [toks("a a a"), toks("a")];
        let m = TfIdfModel::fit(&docs, Stopwords::empty()).unwrap();
        assert_eq!(m.df_of("a"), Some(2));
        assert_eq!(m.df_of("a a"), Some(1));
    }

    #[test]
    fn stopwords_removed_before_bigrams() {
        let sw = Stopwords::from_words(["the"]);
        let m = TfIdfModel::fit([toks("the cat")], sw.clone()).unwrap();
        assert_eq!(m.vocab_len(), 1);
        assert_eq!(m.df_of("cat"), Some(1));
        assert_eq!(
            features(&toks("the big dog"), &sw),
            ["big", "dog", "big dog"]
        );
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let docs: Vec<Vec<String>> = Vec::new();
        assert!(matches!(
            TfIdfModel::fit(&docs, Stopwords::empty()),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn formula_edges() {
        assert_eq!(tf(1), 1.0);
        assert_eq!(idf(7, 7), 1.0);
        assert!(idf(10, 1) > idf(10, 2));
    }

    #[test]
    fn all_oov_document_is_zero() {
        let m = TfIdfModel::fit([toks("a b")], Stopwords::empty()).unwrap();
        let v = m.transform(&toks("x y z"));
        assert!(v.is_zero());
        assert_eq!(v.norm(), 0.0);
        assert_eq!(score(&v, &m.transform(&toks("a"))), 0.0);
    }

    #[test]
    fn single_term_document_is_a_unit_vector() {
        let m = TfIdfModel::fit([toks("a b"), toks("b c")], Stopwords::empty()).unwrap();
        let v = m.transform(&toks("c c c"));
        let id = m.term_id("c").unwrap();
        assert_eq!(v.entries(), &[(id, 1.0)]);
    }

    #[test]
    fn term_ids_are_lexicographic() {
        let m = TfIdfModel::fit([toks("zeta alpha"), toks("mid")], Stopwords::empty()).unwrap();
        let terms: Vec<&str> = (0..m.vocab_len() as u32).map(|i| m.term(i)).collect();
        let mut sorted = terms.clone();
        sorted.sort();
        assert_eq!(terms, sorted);
    }
}
