//! Hybrid lexical + dense retrieval.
//!
//! The crate is organised around the stages of a retrieval experiment:
//!
//! * [`corpus`]: JSONL ingestion, tokenization, query/article pair construction and splits.
//! * [`tfidf`]: sublinear TF-IDF over unigrams and bigrams, cosine ranking.
//! * [`probabilistic`]: Okapi BM25 and Dirichlet-smoothed query likelihood.
//! * [`boe`]: the bag-of-embeddings dual encoder, margin loss and Adam training.
//! * [`fusion`]: additive fusion of score matrices and TSV interchange.
//! * [`eval`]: MRR / Precision@k and parameter grid search.
//!
//! All rankers break score ties by ascending document id.

pub mod boe;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod io;
pub mod probabilistic;
pub mod rank;
pub mod seed;
pub mod stopwords;
pub mod synth;
pub mod tfidf;

pub use boe::{
    AdamState, EmbeddingTable, LossScore, NegativeStrategy, TrainConfig, TrainLogEntry,
    TrainOutcome,
};
pub use corpus::{
    tokenize, CorpusFormat, DatasetSplit, Document, QueryArticlePair, RawRecord, TokenizerConfig,
};
pub use error::{Error, Result};
pub use eval::{evaluate, EvalReport, RankOutcome};
pub use fusion::{fuse, ScoreMatrix};
pub use probabilistic::{Bm25Params, DirichletParams, LexStats};
pub use rank::ScoredDoc;
pub use stopwords::Stopwords;
pub use tfidf::{SparseVector, TfIdfIndex, TfIdfModel};
