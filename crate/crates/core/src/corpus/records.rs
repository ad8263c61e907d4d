use std::collections::HashSet;
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRecord {
    pub id: String,
    pub title: Option<String>,
    pub body: String,
    /// Verbatim query for QA-style corpora; such records skip sentence splitting.
    pub query: Option<String>,
}

/// Field mapping for one JSONL corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorpusFormat {
    Article {
        #[serde(default = "default_id")]
        id: String,
        #[serde(default = "default_title")]
        title: String,
        #[serde(default = "default_body")]
        body: String,
    },
    Qa {
        /// When absent from a line, the 1-based line number is used as the id.
        #[serde(default = "default_id")]
        id: String,
        #[serde(default = "default_question")]
        question: String,
        #[serde(default = "default_article")]
        article: String,
    },
}

fn default_id() -> String {
    "id".into()
}
fn default_title() -> String {
    "title".into()
}
fn default_body() -> String {
    "body".into()
}
fn default_question() -> String {
    "question".into()
}
fn default_article() -> String {
    "article".into()
}

impl CorpusFormat {
    pub fn article() -> Self {
        CorpusFormat::Article {
            id: default_id(),
            title: default_title(),
            body: default_body(),
        }
    }

    pub fn qa() -> Self {
        CorpusFormat::Qa {
            id: default_id(),
            question: default_question(),
            article: default_article(),
        }
    }
}

impl Default for CorpusFormat {
    fn default() -> Self {
        Self::article()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Malformed {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub records: Vec<RawRecord>,
    pub malformed: Vec<Malformed>,
}

/// Reads a JSONL corpus. Malformed lines are skipped and reported; more than
/// half of the non-blank lines being malformed is a hard error.
pub fn ingest(path: &Path, format: &CorpusFormat) -> Result<Ingested> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let out = parse_jsonl(&text, format)?;
    for m in &out.malformed {
        warn!(
            "{}:{}: skipped malformed record: {}",
            path.display(),
            m.line,
            m.reason
        );
    }
    Ok(out)
}

pub fn parse_jsonl(text: &str, format: &CorpusFormat) -> Result<Ingested> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();

    let parsed: Vec<(usize, std::result::Result<RawRecord, String>)> = lines
        .par_iter()
        .map(|&(line, l)| (line, parse_line(l, line, format)))
        .collect();

    let mut out = Ingested::default();
    let mut seen = HashSet::new();
    for (line, rec) in parsed {
        match rec {
            Ok(rec) if !seen.insert(rec.id.clone()) => out.malformed.push(Malformed {
                line,
                reason: format!("duplicate id {:?}", rec.id),
            }),
            Ok(rec) => out.records.push(rec),
            Err(reason) => out.malformed.push(Malformed { line, reason }),
        }
    }

    let total = lines.len();
    if total > 0 && out.malformed.len() * 2 > total {
        return Err(Error::Format(format!(
            "{} of {} lines malformed (first at line {}: {})",
            out.malformed.len(),
            total,
            out.malformed[0].line,
            out.malformed[0].reason
        )));
    }
    Ok(out)
}

fn parse_line(
    line: &str,
    line_no: usize,
    format: &CorpusFormat,
) -> std::result::Result<RawRecord, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("invalid json: {e}"))?;
    let obj = value.as_object().ok_or("not a json object")?;

    let text_field = |name: &str| -> std::result::Result<Option<String>, String> {
        match obj.get(name) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(Value::Number(n)) => Ok(Some(n.to_string())),
            Some(_) => Err(format!("field {name:?} is not a string")),
        }
    };
    let required = |name: &str| -> std::result::Result<String, String> {
        text_field(name)?
            .filter(|s| !s.trim().is_empty())
            .ok_or_else(|| format!("missing or empty field {name:?}"))
    };

    match format {
        CorpusFormat::Article { id, title, body } => Ok(RawRecord {
            id: required(id)?,
            title: text_field(title)?,
            body: required(body)?,
            query: None,
        }),
        CorpusFormat::Qa {
            id,
            question,
            article,
        } => Ok(RawRecord {
            id: text_field(id)?
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| line_no.to_string()),
            title: None,
            body: required(article)?,
            query: Some(required(question)?),
        }),
    }
}
