use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::records::RawRecord;
use super::tokenize::{tokenize, TokenizerConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: u32,
    pub tokens: Vec<String>,
    pub source_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryArticlePair {
    pub pair_id: u32,
    pub query: Document,
    pub article: Document,
}

impl QueryArticlePair {
    /// Article tokens capped at `max_len`, as seen by the encoder during training.
    pub fn training_article(&self, max_len: usize) -> &[String] {
        let toks = &self.article.tokens;
        &toks[..toks.len().min(max_len)]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    #[serde(default)]
    pub tokenizer: TokenizerConfig,
    #[serde(default = "default_min_query_len")]
    pub min_query_len: usize,
    #[serde(default = "default_max_article_len")]
    pub max_article_len: usize,
    /// Truncate articles at construction time instead of only during training.
    #[serde(default)]
    pub truncate_everywhere: bool,
}

fn default_min_query_len() -> usize {
    5
}
fn default_max_article_len() -> usize {
    1000
}

impl Default for PairConfig {
    fn default() -> Self {
        Self {
            tokenizer: TokenizerConfig::default(),
            min_query_len: default_min_query_len(),
            max_article_len: default_max_article_len(),
            truncate_everywhere: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Rejection {
    /// The body is a single sentence, so nothing is left for the article.
    NoRemainder,
    QueryTooShort {
        tokens: usize,
        min: usize,
    },
    EmptyQuery,
    EmptyArticle,
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rejection::NoRemainder => f.write_str("single-sentence body"),
            Rejection::QueryTooShort { tokens, min } => {
                write!(f, "query too short ({tokens} < {min} tokens)")
            }
            Rejection::EmptyQuery => f.write_str("empty query"),
            Rejection::EmptyArticle => f.write_str("article has no tokens"),
        }
    }
}

/// Splits a body into its first sentence and the rest.
///
/// The first sentence ends at the first `.`, `!` or `?` that is followed by
/// whitespace or the end of the text; the terminator stays with the query.
/// Queries shorter than `cfg.min_query_len` tokens are rejected.
pub fn split_first_sentence(
    record: &RawRecord,
    cfg: &PairConfig,
) -> Result<(String, String), Rejection> {
    let body = record.body.trim();
    let mut chars = body.char_indices().peekable();
    let mut cut = None;
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            match chars.peek() {
                None => break,
                Some(&(_, next)) if next.is_whitespace() => {
                    cut = Some(i + c.len_utf8());
                    break;
                }
                _ => {}
            }
        }
    }
    let cut = cut.ok_or(Rejection::NoRemainder)?;
    let (query, rest) = body.split_at(cut);
    let rest = rest.trim();
    if rest.is_empty() {
        return Err(Rejection::NoRemainder);
    }
    let n = super::tokenize::count_tokens(query);
    if n < cfg.min_query_len {
        return Err(Rejection::QueryTooShort {
            tokens: n,
            min: cfg.min_query_len,
        });
    }
    Ok((query.to_string(), rest.to_string()))
}

#[derive(Debug, Clone, Default)]
pub struct PairBuild {
    pub pairs: Vec<QueryArticlePair>,
    /// (source id, reason) for every discarded record, in input order.
    pub rejected: Vec<(String, Rejection)>,
}

type TokenPair = (Vec<String>, Vec<String>);

/// Tokenizes records into pairs. Pair ids are dense and follow input order
/// regardless of how the work is scheduled.
pub fn build_pairs(records: &[RawRecord], cfg: &PairConfig) -> PairBuild {
    let texts: Vec<Result<TokenPair, Rejection>> = records
        .par_iter()
        .map(|rec| to_token_pair(rec, cfg))
        .collect();

    let mut out = PairBuild::default();
    for (rec, res) in records.iter().zip(texts) {
        match res {
            Ok((query, article)) => {
                let pair_id = out.pairs.len() as u32;
                out.pairs.push(QueryArticlePair {
                    pair_id,
                    query: Document {
                        doc_id: pair_id,
                        tokens: query,
                        source_id: rec.id.clone(),
                    },
                    article: Document {
                        doc_id: pair_id,
                        tokens: article,
                        source_id: rec.id.clone(),
                    },
                });
            }
            Err(r) => out.rejected.push((rec.id.clone(), r)),
        }
    }
    out
}

fn to_token_pair(
    rec: &RawRecord,
    cfg: &PairConfig,
) -> Result<(Vec<String>, Vec<String>), Rejection> {
    let (query, article) = match &rec.query {
        Some(q) => (q.clone(), rec.body.clone()),
        None => split_first_sentence(rec, cfg)?,
    };
    let query = tokenize(&query, &cfg.tokenizer);
    if query.is_empty() {
        return Err(Rejection::EmptyQuery);
    }
    let mut article = tokenize(&article, &cfg.tokenizer);
    if article.is_empty() {
        return Err(Rejection::EmptyArticle);
    }
    if cfg.truncate_everywhere {
        article.truncate(cfg.max_article_len);
    }
    Ok((query, article))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(body: &str) -> RawRecord {
        RawRecord {
            id: "r".into(),
            title: None,
            body: body.into(),
            query: None,
        }
    }

    #[test]
    fn first_sentence_is_the_query() {
        let (q, a) = split_first_sentence(
            &rec("A b c d e f. Rest of article here."),
            &PairConfig::default(),
        )
        .unwrap();
        assert_eq!(q, "A b c d e f.");
        assert_eq!(a, "Rest of article here.");
    }

    #[test]
    fn short_first_sentence_is_rejected() {
        let err = split_first_sentence(&rec("Short one. More text."), &PairConfig::default());
        assert_eq!(err, Err(Rejection::QueryTooShort { tokens: 2, min: 5 }));
    }

    #[test]
    fn single_sentence_body_is_rejected() {
        let cfg = PairConfig::default();
        assert_eq!(
            split_first_sentence(&rec("one two three four five six."), &cfg),
            Err(Rejection::NoRemainder)
        );
        assert_eq!(
            split_first_sentence(&rec("no terminator at all here friend"), &cfg),
            Err(Rejection::NoRemainder)
        );
    }

    #[test]
    fn terminator_needs_following_whitespace() {
        let (q, a) = split_first_sentence(
            &rec("Version 2.5 of the tool shipped today! It is fast."),
            &PairConfig::default(),
        )
        .unwrap();
        assert_eq!(q, "Version 2.5 of the tool shipped today!");
        assert_eq!(a, "It is fast.");
    }

    #[test]
    fn question_mark_and_newline_terminate() {
        let (q, a) = split_first_sentence(
            &rec("Is this the end of the line?\nNo."),
            &PairConfig::default(),
        )
        .unwrap();
        assert_eq!(q, "Is this the end of the line?");
        assert_eq!(a, "No.");
    }

    #[test]
    fn qa_records_bypass_splitting() {
        let r = RawRecord {
            id: "q1".into(),
            title: None,
            body: "Hamlet is a tragedy.".into(),
            query: Some("who wrote hamlet".into()),
        };
        let built = build_pairs(&[r], &PairConfig::default());
        assert_eq!(built.pairs.len(), 1);
        assert_eq!(built.pairs[0].query.tokens, ["who", "wrote", "hamlet"]);
    }

    #[test]
    fn pair_ids_are_dense_in_input_order() {
        let records: Vec<RawRecord> = (0..50)
            .map(|i| RawRecord {
                id: format!("r{i}"),
                title: None,
                body: if i % 3 == 0 {
                    "Too short. Body.".into()
                } else {
                    format!("alpha beta gamma delta number {i}. the article body {i}.")
                },
                query: None,
            })
            .collect();
        let built = build_pairs(&records, &PairConfig::default());
        for (i, p) in built.pairs.iter().enumerate() {
            assert_eq!(p.pair_id as usize, i);
            assert_eq!(p.query.doc_id, p.pair_id);
            assert_eq!(p.article.doc_id, p.pair_id);
        }
        let ids: Vec<_> = built
            .pairs
            .iter()
            .map(|p| p.query.source_id.clone())
            .collect();
        let expected: Vec<_> = (0..50)
            .filter(|i| i % 3 != 0)
            .map(|i| format!("r{i}"))
            .collect();
        assert_eq!(ids, expected);
        assert_eq!(built.rejected.len(), 17);
    }

    #[test]
    fn truncation_only_when_requested() {
        let body = format!("w1 w2 w3 w4 w5. {}", "x ".repeat(20));
        let mut cfg = PairConfig {
            max_article_len: 7,
            ..PairConfig::default()
        };
        let full = build_pairs(&[rec(&body)], &cfg);
        assert_eq!(full.pairs[0].article.tokens.len(), 20);
        assert_eq!(full.pairs[0].training_article(7).len(), 7);
        cfg.truncate_everywhere = true;
        let cut = build_pairs(&[rec(&body)], &cfg);
        assert_eq!(cut.pairs[0].article.tokens.len(), 7);
    }
}
