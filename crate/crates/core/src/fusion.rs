//! Score matrices and additive fusion.
//!
//! Fusion is a plain elementwise sum of two sources over the same (query, doc)
//! grid. Raw scores are added; per-query min-max scaling is available but off
//! by default.
//!
//! Interchange format is a TSV with header `#query_id\tdoc_id\tscore`; pairs
//! missing from the file score 0.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{read_to_string, write_atomic};
use crate::rank::{top_k, ScoredDoc};

pub const TSV_HEADER: &str = "#query_id\tdoc_id\tscore";

/// Dense query x document score matrix with string ids.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    query_ids: Vec<String>,
    doc_ids: Vec<String>,
    scores: Vec<f64>,
    pub source: String,
}

/// Orders ids numerically when both parse as unsigned integers, otherwise as
/// strings. Numeric ids sort before non-numeric ones.
pub fn id_order(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        _ => a.cmp(b),
    }
}

impl ScoreMatrix {
    pub fn new(
        query_ids: Vec<String>,
        doc_ids: Vec<String>,
        scores: Vec<f64>,
        source: impl Into<String>,
    ) -> Result<Self> {
        if scores.len() != query_ids.len() * doc_ids.len() {
            return Err(Error::Format(format!(
                "{} scores for a {} x {} matrix",
                scores.len(),
                query_ids.len(),
                doc_ids.len()
            )));
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::Format(format!("non-finite score at flat index {i}")));
        }
        for ids in [&query_ids, &doc_ids] {
            let mut seen = HashSet::new();
            if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
                return Err(Error::Format(format!("duplicate id {dup:?}")));
            }
        }
        Ok(Self {
            query_ids,
            doc_ids,
            scores,
            source: source.into(),
        })
    }

    pub fn from_rows(
        query_ids: Vec<String>,
        doc_ids: Vec<String>,
        rows: Vec<Vec<f64>>,
        source: impl Into<String>,
    ) -> Result<Self> {
        if rows.iter().any(|r| r.len() != doc_ids.len()) {
            return Err(Error::Format("ragged score rows".into()));
        }
        Self::new(query_ids, doc_ids, rows.concat(), source)
    }

    pub fn empty(source: impl Into<String>) -> Self {
        Self {
            query_ids: Vec::new(),
            doc_ids: Vec::new(),
            scores: Vec::new(),
            source: source.into(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.query_ids.len(), self.doc_ids.len())
    }

    pub fn query_ids(&self) -> &[String] {
        &self.query_ids
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn row(&self, q: usize) -> &[f64] {
        let n = self.doc_ids.len();
        &self.scores[q * n..(q + 1) * n]
    }

    pub fn get(&self, q: usize, d: usize) -> f64 {
        self.scores[q * self.doc_ids.len() + d]
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn lookup(&self, query_id: &str, doc_id: &str) -> Option<f64> {
        let q = self.query_ids.iter().position(|x| x == query_id)?;
        let d = self.doc_ids.iter().position(|x| x == doc_id)?;
        Some(self.get(q, d))
    }

    /// Top `k` documents for query row `q`; ties go to the earlier column.
    pub fn top_k(&self, q: usize, k: usize) -> Vec<ScoredDoc> {
        top_k(self.row(q), k)
    }

    /// Same scores with rows and columns sorted by [`id_order`].
    pub fn canonical(&self) -> Self {
        let mut qs: Vec<usize> = (0..self.query_ids.len()).collect();
        qs.sort_by(|&a, &b| id_order(&self.query_ids[a], &self.query_ids[b]));
        let mut ds: Vec<usize> = (0..self.doc_ids.len()).collect();
        ds.sort_by(|&a, &b| id_order(&self.doc_ids[a], &self.doc_ids[b]));
        self.permuted(&qs, &ds)
    }

    fn permuted(&self, qs: &[usize], ds: &[usize]) -> Self {
        let scores = qs
            .iter()
            .flat_map(|&q| ds.iter().map(move |&d| self.get(q, d)))
            .collect();
        Self {
            query_ids: qs.iter().map(|&q| self.query_ids[q].clone()).collect(),
            doc_ids: ds.iter().map(|&d| self.doc_ids[d].clone()).collect(),
            scores,
            source: self.source.clone(),
        }
    }

    /// Applies `f` to every score.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            scores: self.scores.iter().map(|&s| f(s)).collect(),
            ..self.clone()
        }
    }

    /// Rescales each query row to [0, 1]; constant rows become all zero.
    pub fn min_max_per_query(&self) -> Self {
        let n = self.doc_ids.len();
        let mut out = self.clone();
        for row in out.scores.chunks_mut(n.max(1)) {
            let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = hi - lo;
            for s in row.iter_mut() {
                *s = if span > 0.0 { (*s - lo) / span } else { 0.0 };
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FuseOptions {
    pub min_max: bool,
}

/// Elementwise sum of two matrices over the same ids. The result is in
/// canonical id order and labelled `"<a>+<b>"`.
pub fn fuse(a: &ScoreMatrix, b: &ScoreMatrix) -> Result<ScoreMatrix> {
    fuse_with(a, b, FuseOptions::default())
}

pub fn fuse_with(a: &ScoreMatrix, b: &ScoreMatrix, opts: FuseOptions) -> Result<ScoreMatrix> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    let (a, b) = if opts.min_max {
        (a.min_max_per_query(), b.min_max_per_query())
    } else {
        (a.clone(), b.clone())
    };
    let a = a.canonical();
    let b = b.canonical();
    let mut offending: Vec<String> = Vec::new();
    for (x, y) in a
        .query_ids
        .iter()
        .zip(&b.query_ids)
        .chain(a.doc_ids.iter().zip(&b.doc_ids))
    {
        if x != y {
            offending.push(x.clone());
            offending.push(y.clone());
        }
    }
    if !offending.is_empty() {
        offending.sort_by(|x, y| id_order(x, y));
        offending.dedup();
        return Err(Error::IdMismatch(offending));
    }
    let scores = a.scores.iter().zip(&b.scores).map(|(x, y)| x + y).collect();
    ScoreMatrix::new(
        a.query_ids,
        a.doc_ids,
        scores,
        format!("{}+{}", a.source, b.source),
    )
}

pub fn export_scores(m: &ScoreMatrix, path: &Path) -> Result<()> {
    write_atomic(path, |w| write_tsv(m, w))
}

pub fn write_tsv(m: &ScoreMatrix, w: &mut dyn std::io::Write) -> std::io::Result<()> {
    writeln!(w, "{TSV_HEADER}")?;
    writeln!(w, "#source\t{}", m.source)?;
    for (qi, q) in m.query_ids.iter().enumerate() {
        for (di, d) in m.doc_ids.iter().enumerate() {
            // `{}` on f64 prints the shortest string that parses back exactly
            writeln!(w, "{q}\t{d}\t{}", m.get(qi, di))?;
        }
    }
    Ok(())
}

pub fn import_scores(path: &Path) -> Result<ScoreMatrix> {
    let text = read_to_string(path)?;
    let default_source = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_tsv(&text, &default_source)
}

/// Parses the TSV interchange format. Ids keep their order of first
/// appearance; absent pairs score 0.
pub fn parse_tsv(text: &str, default_source: &str) -> Result<ScoreMatrix> {
    let mut source = default_source.to_string();
    let mut q_index: HashMap<String, usize> = HashMap::new();
    let mut d_index: HashMap<String, usize> = HashMap::new();
    let mut query_ids = Vec::new();
    let mut doc_ids = Vec::new();
    let mut entries: HashMap<(usize, usize), f64> = HashMap::new();

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(label) = rest.strip_prefix("source\t") {
                source = label.to_string();
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 3 tab-separated fields, got {}", cols.len()),
            });
        }
        let score: f64 = cols[2].trim().parse().map_err(|e| Error::Parse {
            line: line_no,
            message: format!("bad score {:?}: {e}", cols[2]),
        })?;
        if !score.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("non-finite score {:?}", cols[2]),
            });
        }
        let intern = |index: &mut HashMap<String, usize>, ids: &mut Vec<String>, id: &str| {
            *index.entry(id.to_string()).or_insert_with(|| {
                ids.push(id.to_string());
                ids.len() - 1
            })
        };
        let q = intern(&mut q_index, &mut query_ids, cols[0]);
        let d = intern(&mut d_index, &mut doc_ids, cols[1]);
        if entries.insert((q, d), score).is_some() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate entry for ({}, {})", cols[0], cols[1]),
            });
        }
    }

    let n_docs = doc_ids.len();
    let mut scores = vec![0.0; query_ids.len() * n_docs];
    for ((q, d), s) in entries {
        scores[q * n_docs + d] = s;
    }
    ScoreMatrix::new(query_ids, doc_ids, scores, source)
}
