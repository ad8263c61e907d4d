//! Corpus ingestion and query/article pair construction.
//!
//! Article-style corpora (news, encyclopedia) become pairs by taking the first
//! sentence of the body as the query and the remainder as the article. QA-style
//! corpora supply the question verbatim.

mod cache;
mod pairs;
mod records;
mod split;
mod tokenize;

pub use cache::{read_cache, write_cache, CACHE_FORMAT, CACHE_VERSION};
pub use pairs::{
    build_pairs, split_first_sentence, Document, PairBuild, PairConfig, QueryArticlePair, Rejection,
};
pub use records::{ingest, parse_jsonl, CorpusFormat, Ingested, Malformed, RawRecord};
pub use split::{
    make_splits, read_manifest, write_manifest, DatasetSplit, SplitName, SplitSizes,
    MANIFEST_FORMAT,
};
pub use tokenize::{count_tokens, tokenize, TokenizerConfig};
