//! Okapi BM25 and Dirichlet-smoothed query likelihood.
//!
//! Both scorers read the same [`LexStats`], built over unigram token streams
//! with the TF-IDF stopword list removed.
//!
//! BM25 uses the non-negative idf `ln(1 + (n - df + 0.5) / (df + 0.5))`.
//! The language model skips query terms that never occur in the collection,
//! since their smoothed probability would be zero.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_to_string, write_atomic};
use crate::rank::{top_k, ScoredDoc};
use crate::stopwords::Stopwords;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Bm25Params {
    pub fn new(k1: f64, b: f64) -> Result<Self> {
        if !(k1 > 0.0 && k1.is_finite()) || !(0.0..=1.0).contains(&b) {
            return Err(Error::Config(format!(
                "bm25 needs k1 > 0 and b in [0, 1], got k1={k1} b={b}"
            )));
        }
        Ok(Self { k1, b })
    }
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DirichletParams {
    pub mu: f64,
}

impl DirichletParams {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Config(format!("dirichlet mu must be > 0, got {mu}")));
        }
        Ok(Self { mu })
    }
}

impl Default for DirichletParams {
    fn default() -> Self {
        Self { mu: 1000.0 }
    }
}

/// Collection statistics shared by BM25 and the Dirichlet language model.
#[derive(Debug, Clone, PartialEq)]
pub struct LexStats {
    term_index: HashMap<String, u32>,
    terms: Vec<String>,
    /// Per document: (term id, count), ascending by term id.
    doc_terms: Vec<Vec<(u32, u32)>>,
    doc_len: Vec<u32>,
    avg_doc_len: f64,
    collection_tf: Vec<u64>,
    collection_len: u64,
    df: Vec<u32>,
    /// Term-major postings: `postings[offsets[t]..offsets[t + 1]]` = (doc, count).
    offsets: Vec<usize>,
    postings: Vec<(u32, u32)>,
    stopwords: Stopwords,
}

/// Unique known query terms with their multiplicity, ascending by term id.
/// Unknown terms are dropped.
pub type QueryTerms = Vec<(u32, u32)>;

impl LexStats {
    pub fn build<D, T>(docs: D, stopwords: Stopwords) -> Result<Self>
    where
        D: IntoIterator<Item = T>,
        T: AsRef<[String]>,
    {
        let docs: Vec<Vec<String>> = docs
            .into_iter()
            .map(|d| {
                d.as_ref()
                    .iter()
                    .filter(|t| !stopwords.contains(t))
                    .cloned()
                    .collect()
            })
            .collect();
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let vocab: BTreeMap<&str, ()> = docs.iter().flatten().map(|t| (t.as_str(), ())).collect();
        let terms: Vec<String> = vocab.keys().map(|t| t.to_string()).collect();
        let term_index: HashMap<String, u32> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let doc_terms: Vec<Vec<(u32, u32)>> = docs
            .iter()
            .map(|d| {
                let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
                for t in d {
                    *counts.entry(term_index[t]).or_default() += 1;
                }
                counts.into_iter().collect()
            })
            .collect();
        let doc_len: Vec<u32> = docs.iter().map(|d| d.len() as u32).collect();
        Ok(Self::from_parts(terms, doc_terms, doc_len, stopwords))
    }

    fn from_parts(
        terms: Vec<String>,
        doc_terms: Vec<Vec<(u32, u32)>>,
        doc_len: Vec<u32>,
        stopwords: Stopwords,
    ) -> Self {
        let n_terms = terms.len();
        let term_index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let mut collection_tf = vec![0u64; n_terms];
        let mut df = vec![0u32; n_terms];
        let mut offsets = vec![0usize; n_terms + 1];
        for d in &doc_terms {
            for &(t, c) in d {
                collection_tf[t as usize] += c as u64;
                df[t as usize] += 1;
                offsets[t as usize + 1] += 1;
            }
        }
        for i in 1..offsets.len() {
            offsets[i] += offsets[i - 1];
        }
        let mut cursor = offsets.clone();
        let mut postings = vec![(0u32, 0u32); offsets[n_terms]];
        for (doc, d) in doc_terms.iter().enumerate() {
            for &(t, c) in d {
                postings[cursor[t as usize]] = (doc as u32, c);
                cursor[t as usize] += 1;
            }
        }
        let collection_len: u64 = doc_len.iter().map(|&l| l as u64).sum();
        let avg_doc_len = collection_len as f64 / doc_len.len() as f64;
        Self {
            term_index,
            terms,
            doc_terms,
            doc_len,
            avg_doc_len,
            collection_tf,
            collection_len,
            df,
            offsets,
            postings,
            stopwords,
        }
    }

    pub fn n_docs(&self) -> u32 {
        self.doc_len.len() as u32
    }

    pub fn doc_len(&self, doc: u32) -> u32 {
        self.doc_len[doc as usize]
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_doc_len
    }

    pub fn collection_len(&self) -> u64 {
        self.collection_len
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.term_index.get(term).copied()
    }

    pub fn df(&self, term: u32) -> u32 {
        self.df[term as usize]
    }

    pub fn collection_tf(&self, term: u32) -> u64 {
        self.collection_tf[term as usize]
    }

    pub fn stopwords(&self) -> &Stopwords {
        &self.stopwords
    }

    /// Count of `term` in `doc`.
    pub fn tf(&self, doc: u32, term: u32) -> u32 {
        let row = &self.doc_terms[doc as usize];
        row.binary_search_by_key(&term, |e| e.0)
            .map(|i| row[i].1)
            .unwrap_or(0)
    }

    pub fn query_terms(&self, tokens: &[String]) -> QueryTerms {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for t in tokens {
            if self.stopwords.contains(t) {
                continue;
            }
            if let Some(id) = self.term_id(t) {
                *counts.entry(id).or_default() += 1;
            }
        }
        counts.into_iter().collect()
    }

    pub fn bm25_idf(&self, term: u32) -> f64 {
        bm25_idf(self.n_docs(), self.df(term))
    }

    fn bm25_term(&self, term: u32, tf: u32, doc: u32, p: Bm25Params) -> f64 {
        let f = tf as f64;
        let norm = 1.0 - p.b + p.b * self.doc_len(doc) as f64 / self.avg_doc_len;
        self.bm25_idf(term) * f * (p.k1 + 1.0) / (f + p.k1 * norm)
    }

    fn lm_term(&self, term: u32, tf: u32, doc: u32, p: DirichletParams) -> f64 {
        let p_c = self.collection_tf(term) as f64 / self.collection_len as f64;
        ((tf as f64 + p.mu * p_c) / (self.doc_len(doc) as f64 + p.mu)).ln()
    }

    /// BM25 of `doc` for an analyzed query. Each distinct query term counts once.
    pub fn bm25(&self, query: &QueryTerms, doc: u32, p: Bm25Params) -> f64 {
        let mut s = 0.0;
        for &(t, _) in query {
            let f = self.tf(doc, t);
            if f > 0 {
                s += self.bm25_term(t, f, doc, p);
            }
        }
        s
    }

    /// Dirichlet query log-likelihood of `doc`; repeated query terms count once
    /// per occurrence.
    pub fn lm_dirichlet(&self, query: &QueryTerms, doc: u32, p: DirichletParams) -> f64 {
        let mut s = 0.0;
        for &(t, qc) in query {
            if self.collection_tf(t) == 0 {
                continue;
            }
            s += qc as f64 * self.lm_term(t, self.tf(doc, t), doc, p);
        }
        s
    }

    /// BM25 of every document, walking only the query terms' postings.
    /// Agrees bit-for-bit with [`LexStats::bm25`].
    pub fn bm25_all(&self, query: &QueryTerms, p: Bm25Params) -> Vec<f64> {
        let mut acc = vec![0.0; self.doc_len.len()];
        for &(t, _) in query {
            let t_us = t as usize;
            for &(doc, f) in &self.postings[self.offsets[t_us]..self.offsets[t_us + 1]] {
                acc[doc as usize] += self.bm25_term(t, f, doc, p);
            }
        }
        acc
    }

    /// Dirichlet score of every document.
    pub fn lm_dirichlet_all(&self, query: &QueryTerms, p: DirichletParams) -> Vec<f64> {
        (0..self.n_docs())
            .map(|d| self.lm_dirichlet(query, d, p))
            .collect()
    }

    pub fn rank_bm25(&self, query: &QueryTerms, p: Bm25Params, k: usize) -> Vec<ScoredDoc> {
        top_k(&self.bm25_all(query, p), k)
    }

    pub fn rank_lm(&self, query: &QueryTerms, p: DirichletParams, k: usize) -> Vec<ScoredDoc> {
        top_k(&self.lm_dirichlet_all(query, p), k)
    }
}

#[inline]
pub fn bm25_idf(n_docs: u32, df: u32) -> f64 {
    let (n, df) = (n_docs as f64, df as f64);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

/// BM25 of one document for a raw token query.
pub fn bm25_score(query: &[String], doc: u32, stats: &LexStats, p: Bm25Params) -> f64 {
    stats.bm25(&stats.query_terms(query), doc, p)
}

/// Dirichlet query likelihood of one document for a raw token query.
pub fn lm_dirichlet_score(query: &[String], doc: u32, stats: &LexStats, p: DirichletParams) -> f64 {
    stats.lm_dirichlet(&stats.query_terms(query), doc, p)
}

const STATS_FORMAT: &str = "hybrid-rank.lex-stats";
const STATS_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct StatsFile {
    format: String,
    version: u32,
    stopwords_sha256: String,
    n_docs: u32,
    collection_len: u64,
    terms: Vec<String>,
    doc_len: Vec<u32>,
    doc_terms: Vec<Vec<(u32, u32)>>,
}

impl LexStats {
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = StatsFile {
            format: STATS_FORMAT.into(),
            version: STATS_VERSION,
            stopwords_sha256: self.stopwords.digest().into(),
            n_docs: self.n_docs(),
            collection_len: self.collection_len,
            terms: self.terms.clone(),
            doc_len: self.doc_len.clone(),
            doc_terms: self.doc_terms.clone(),
        };
        write_atomic(path, |w| {
            serde_json::to_writer(&mut *w, &file)?;
            w.write_all(b"\n")
        })
    }

    pub fn load(path: &Path, stopwords: Stopwords) -> Result<Self> {
        let text = read_to_string(path)?;
        let file: StatsFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if file.format != STATS_FORMAT || file.version != STATS_VERSION {
            return Err(Error::Format(format!(
                "{}: unsupported stats {} v{}",
                path.display(),
                file.format,
                file.version
            )));
        }
        if file.stopwords_sha256 != stopwords.digest() {
            return Err(Error::Format(format!(
                "{}: stopword list digest mismatch",
                path.display()
            )));
        }
        if file.doc_len.len() != file.n_docs as usize
            || file.doc_terms.len() != file.n_docs as usize
        {
            return Err(Error::Format(format!(
                "{}: inconsistent document count",
                path.display()
            )));
        }
        let stats = Self::from_parts(file.terms, file.doc_terms, file.doc_len, stopwords);
        if stats.collection_len != file.collection_len {
            return Err(Error::Format(format!(
                "{}: inconsistent collection length",
                path.display()
            )));
        }
        Ok(stats)
    }
}
