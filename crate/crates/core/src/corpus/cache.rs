//! Tokenized-corpus cache: a JSONL file whose first line is a format header.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::pairs::{Document, QueryArticlePair};
use crate::error::{Error, Result};
use crate::io::{read_to_string, write_atomic};

pub const CACHE_FORMAT: &str = "hybrid-rank.tokenized-corpus";
pub const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    n_pairs: usize,
}

#[derive(Serialize, Deserialize)]
struct Row {
    pair_id: u32,
    source_id: String,
    query: Vec<String>,
    article: Vec<String>,
}

pub fn write_cache(path: &Path, pairs: &[QueryArticlePair]) -> Result<()> {
    write_atomic(path, |w| {
        let header = Header {
            format: CACHE_FORMAT.into(),
            version: CACHE_VERSION,
            n_pairs: pairs.len(),
        };
        serde_json::to_writer(&mut *w, &header)?;
        w.write_all(b"\n")?;
        for p in pairs {
            let row = Row {
                pair_id: p.pair_id,
                source_id: p.query.source_id.clone(),
                query: p.query.tokens.clone(),
                article: p.article.tokens.clone(),
            };
            serde_json::to_writer(&mut *w, &row)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn read_cache(path: &Path) -> Result<Vec<QueryArticlePair>> {
    let text = read_to_string(path)?;
    let mut lines = text.lines();
    let header: Header = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{}: empty cache", path.display())))
        .and_then(|l| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })
        })?;
    if header.format != CACHE_FORMAT || header.version != CACHE_VERSION {
        return Err(Error::Format(format!(
            "{}: unsupported cache {} v{}",
            path.display(),
            header.format,
            header.version
        )));
    }
    let mut pairs = Vec::with_capacity(header.n_pairs);
    for (i, line) in lines.enumerate() {
        let row: Row = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: i + 2,
            message: e.to_string(),
        })?;
        pairs.push(QueryArticlePair {
            pair_id: row.pair_id,
            query: Document {
                doc_id: row.pair_id,
                tokens: row.query,
                source_id: row.source_id.clone(),
            },
            article: Document {
                doc_id: row.pair_id,
                tokens: row.article,
                source_id: row.source_id,
            },
        });
    }
    if pairs.len() != header.n_pairs {
        return Err(Error::Format(format!(
            "{}: header promises {} pairs, found {}",
            path.display(),
            header.n_pairs,
            pairs.len()
        )));
    }
    Ok(pairs)
}
