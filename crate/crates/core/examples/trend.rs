//! TF-IDF vs bag-of-embeddings vs their sum on a synthetic news corpus.
//!
//!     cargo run --release -p hybrid-rank-core --example trend [pairs] [seed]

use std::collections::HashMap;

use hybrid_rank::boe::{encode, train};
use hybrid_rank::corpus::{build_pairs, DatasetSplit, PairConfig, SplitSizes};
use hybrid_rank::synth::{news_records, NewsConfig};
use hybrid_rank::{evaluate, fuse, ScoreMatrix, Stopwords, TfIdfModel, TrainConfig};

fn main() -> hybrid_rank::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(5000, |s| s.parse().expect("pairs"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let records = news_records(n * 11 / 10, &NewsConfig::default(), seed);
    let pairs = build_pairs(&records, &PairConfig::default()).pairs;
    let test = n / 5;
    let dev = n / 10;
    let split = DatasetSplit::make(
        &pairs,
        SplitSizes {
            train: n - test - dev,
            dev,
            test,
        },
        seed,
    )?;

    let ids: Vec<String> = split.test.iter().map(|p| p.pair_id.to_string()).collect();
    let articles: Vec<&[String]> = split
        .test
        .iter()
        .map(|p| p.article.tokens.as_slice())
        .collect();
    let model = TfIdfModel::fit(&articles, Stopwords::english())?;
    let index = model.index(&articles);
    let tfidf: Vec<Vec<f64>> = split
        .test
        .iter()
        .map(|p| index.scores(&model.transform(&p.query.tokens)))
        .collect();

    let cfg = TrainConfig {
        lr: 0.005,
        epochs: 10,
        seed,
        ..TrainConfig::default()
    };
    let table = train(&split, &cfg)?.table;
    let enc: Vec<Vec<f64>> = articles.iter().map(|a| encode(a, &table).vector).collect();
    let boe: Vec<Vec<f64>> = split
        .test
        .iter()
        .map(|p| {
            let q = encode(&p.query.tokens, &table).vector;
            enc.iter().map(|a| hybrid_rank::boe::dot(&q, a)).collect()
        })
        .collect();

    let gold: HashMap<String, String> = ids.iter().map(|i| (i.clone(), i.clone())).collect();
    let a = ScoreMatrix::from_rows(ids.clone(), ids.clone(), tfidf, "tfidf")?;
    let b = ScoreMatrix::from_rows(ids.clone(), ids, boe, "boe")?;
    let f = fuse(&a, &b)?;
    println!(
        "{:<14} {:>7} {:>7} {:>7} {:>7}",
        "model", "MRR", "P@1", "P@3", "P@10"
    );
    for (name, m) in [("TF-IDF", &a), ("BOE", &b), ("TF-IDF + BOE", &f)] {
        let r = evaluate(m, &gold, &[1, 3, 10])?;
        println!(
            "{name:<14} {:>7.2} {:>7.2} {:>7.2} {:>7.2}",
            100.0 * r.mrr,
            100.0 * r.p_at(1).unwrap(),
            100.0 * r.p_at(3).unwrap(),
            100.0 * r.p_at(10).unwrap()
        );
    }
    Ok(())
}
