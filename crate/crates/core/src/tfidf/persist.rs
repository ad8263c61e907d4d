//! On-disk forms of a fitted model and its document index.
//!
//! Vocabulary: UTF-8 TSV. Header lines start with `#`:
//!
//! ```text
//! #format<TAB>hybrid-rank.tfidf-vocab<TAB>1
//! #n_docs<TAB>1000
//! #stopwords_sha256<TAB><hex digest>
//! #term<TAB>term_id<TAB>df
//! new york<TAB>0<TAB>12
//! ```
//!
//! Index: little-endian compressed sparse rows.
//!
//! ```text
//! magic "HRCSR\0\0\0" | version u32 | rows u64 | cols u64 | nnz u64
//! row_ptr (rows + 1) x u64 | col_idx nnz x u32 | values nnz x f64
//! ```

use std::path::Path;

use super::{SparseVector, TfIdfIndex, TfIdfModel};
use crate::error::{Error, Result};
use crate::io::{read_bytes, read_to_string, write_atomic};
use crate::stopwords::Stopwords;

pub const VOCAB_FORMAT: &str = "hybrid-rank.tfidf-vocab";
const VOCAB_VERSION: u32 = 1;
pub const CSR_MAGIC: &[u8; 8] = b"HRCSR\0\0\0";
const CSR_VERSION: u32 = 1;

pub fn write_vocab(path: &Path, model: &TfIdfModel) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "#format\t{VOCAB_FORMAT}\t{VOCAB_VERSION}")?;
        writeln!(w, "#n_docs\t{}", model.n_docs())?;
        writeln!(w, "#stopwords_sha256\t{}", model.stopwords().digest())?;
        writeln!(w, "#term\tterm_id\tdf")?;
        for (id, (term, df)) in model.terms().iter().zip(model.df_table()).enumerate() {
            writeln!(w, "{term}\t{id}\t{df}")?;
        }
        Ok(())
    })
}

/// Loads a vocabulary file. `stopwords` must be the list the model was fitted
/// with; a digest mismatch is a format error.
pub fn read_vocab(path: &Path, stopwords: Stopwords) -> Result<TfIdfModel> {
    let text = read_to_string(path)?;
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let mut n_docs = None;
    let mut digest = None;
    let mut seen_format = false;
    let mut terms = Vec::new();
    let mut df = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let cols: Vec<&str> = line.split('\t').collect();
        if let Some(key) = cols[0].strip_prefix('#') {
            match (key, cols.get(1)) {
                ("format", Some(&name)) => {
                    if name != VOCAB_FORMAT || cols.get(2) != Some(&"1") {
                        return Err(Error::Format(format!(
                            "unsupported vocabulary format {line:?}"
                        )));
                    }
                    seen_format = true;
                }
                ("n_docs", Some(v)) => {
                    n_docs = Some(
                        v.parse::<u32>()
                            .map_err(|e| parse_err(line_no, e.to_string()))?,
                    )
                }
                ("stopwords_sha256", Some(v)) => digest = Some(v.to_string()),
                _ => {}
            }
            continue;
        }
        if cols.len() != 3 {
            return Err(parse_err(
                line_no,
                format!("expected 3 columns, got {}", cols.len()),
            ));
        }
        let id: usize = cols[1]
            .parse()
            .map_err(|e: std::num::ParseIntError| parse_err(line_no, e.to_string()))?;
        if id != terms.len() {
            return Err(parse_err(
                line_no,
                format!("term ids not dense: expected {}, got {id}", terms.len()),
            ));
        }
        terms.push(cols[0].to_string());
        df.push(
            cols[2]
                .parse()
                .map_err(|e: std::num::ParseIntError| parse_err(line_no, e.to_string()))?,
        );
    }
    if !seen_format {
        return Err(Error::Format(
            "vocabulary file lacks a #format header".into(),
        ));
    }
    let n_docs = n_docs.ok_or_else(|| Error::Format("vocabulary file lacks #n_docs".into()))?;
    if digest.as_deref() != Some(stopwords.digest()) {
        return Err(Error::Format(format!(
            "stopword list digest {} does not match model ({:?})",
            stopwords.digest(),
            digest
        )));
    }
    Ok(TfIdfModel::from_parts(terms, df, n_docs, stopwords))
}

pub fn write_csr(path: &Path, index: &TfIdfIndex) -> Result<()> {
    let rows = index.vectors();
    let nnz: usize = rows.iter().map(SparseVector::nnz).sum();
    write_atomic(path, |w| {
        w.write_all(CSR_MAGIC)?;
        w.write_all(&CSR_VERSION.to_le_bytes())?;
        w.write_all(&(rows.len() as u64).to_le_bytes())?;
        w.write_all(&(index.n_terms() as u64).to_le_bytes())?;
        w.write_all(&(nnz as u64).to_le_bytes())?;
        let mut ptr = 0u64;
        w.write_all(&ptr.to_le_bytes())?;
        for r in rows {
            ptr += r.nnz() as u64;
            w.write_all(&ptr.to_le_bytes())?;
        }
        for r in rows {
            for &(c, _) in r.entries() {
                w.write_all(&c.to_le_bytes())?;
            }
        }
        for r in rows {
            for &(_, v) in r.entries() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    })
}

pub fn read_csr(path: &Path) -> Result<TfIdfIndex> {
    let bytes = read_bytes(path)?;
    let mut r = Reader {
        bytes: &bytes,
        pos: 0,
    };
    if r.take(8)? != CSR_MAGIC {
        return Err(Error::Format(format!(
            "{}: not a CSR index",
            path.display()
        )));
    }
    let version = r.u32()?;
    if version != CSR_VERSION {
        return Err(Error::Format(format!(
            "{}: unsupported CSR version {version}",
            path.display()
        )));
    }
    let n_rows = r.u64()? as usize;
    let n_cols = r.u64()? as usize;
    let nnz = r.u64()? as usize;
    let ptr: Vec<usize> = (0..=n_rows)
        .map(|_| r.u64().map(|v| v as usize))
        .collect::<Result<_>>()?;
    let cols: Vec<u32> = (0..nnz).map(|_| r.u32()).collect::<Result<_>>()?;
    let vals: Vec<f64> = (0..nnz).map(|_| r.f64()).collect::<Result<_>>()?;
    if ptr.last() != Some(&nnz) || ptr.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Format(format!(
            "{}: corrupt row pointers",
            path.display()
        )));
    }
    if cols.iter().any(|&c| c as usize >= n_cols) {
        return Err(Error::Format(format!(
            "{}: column index out of range",
            path.display()
        )));
    }
    let vectors = ptr
        .windows(2)
        .map(|w| {
            SparseVector::new(
                cols[w[0]..w[1]]
                    .iter()
                    .copied()
                    .zip(vals[w[0]..w[1]].iter().copied())
                    .collect(),
            )
        })
        .collect();
    Ok(TfIdfIndex::new(vectors, n_cols))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        let out = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Format("truncated binary file".into()))?;
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn vocab_and_index_round_trip() {
        let docs = [
            toks("new york city"),
            toks("york minster the"),
            toks("city of light"),
        ];
        let sw = Stopwords::from_words(["the", "of"]);
        let model = TfIdfModel::fit(&docs, sw.clone()).unwrap();
        let index = model.index(&docs);
        let dir = tempfile::tempdir().unwrap();
        let vp = dir.path().join("vocab.tsv");
        let ip = dir.path().join("index.csr");
        write_vocab(&vp, &model).unwrap();
        write_csr(&ip, &index).unwrap();
        assert_eq!(read_vocab(&vp, sw).unwrap(), model);
        assert_eq!(read_csr(&ip).unwrap(), index);
    }

    #[test]
    fn stopword_digest_mismatch_is_rejected() {
        let model = TfIdfModel::fit([toks("a b")], Stopwords::empty()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let vp = dir.path().join("vocab.tsv");
        write_vocab(&vp, &model).unwrap();
        assert!(matches!(
            read_vocab(&vp, Stopwords::english()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn truncated_index_is_rejected() {
        let model = TfIdfModel::fit([toks("a b")], Stopwords::empty()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let ip = dir.path().join("index.csr");
        write_csr(&ip, &model.index([toks("a b")])).unwrap();
        let bytes = std::fs::read(&ip).unwrap();
        std::fs::write(&ip, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(read_csr(&ip), Err(Error::Format(_))));
    }
}
