use std::collections::HashMap;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hybrid_rank::boe::{build_vocab, grad_step, AdamState, Example};
use hybrid_rank::{
    evaluate, fuse, Bm25Params, DirichletParams, EmbeddingTable, LexStats, ScoreMatrix, Stopwords,
    TfIdfModel, TrainConfig,
};
use hybrid_rank_bench::news_split;

fn lexical(c: &mut Criterion) {
    let split = news_split(100, 0, 1000, 1);
    let articles: Vec<&[String]> = split
        .test
        .iter()
        .map(|p| p.article.tokens.as_slice())
        .collect();
    let query = &split.test[0].query.tokens;

    let model = TfIdfModel::fit(&articles, Stopwords::english()).unwrap();
    let index = model.index(&articles);
    c.bench_function("tfidf_rank_1000_docs", |b| {
        b.iter(|| index.rank(&model.transform(black_box(query)), 10))
    });

    let stats = LexStats::build(&articles, Stopwords::english()).unwrap();
    let q = stats.query_terms(query);
    let bm25 = Bm25Params::new(1.2, 0.75).unwrap();
    c.bench_function("bm25_all_1000_docs", |b| {
        b.iter(|| stats.bm25_all(black_box(&q), bm25))
    });
    let lm = DirichletParams::new(1000.0).unwrap();
    c.bench_function("lm_all_1000_docs", |b| {
        b.iter(|| stats.lm_dirichlet_all(black_box(&q), lm))
    });
}

fn training(c: &mut Criterion) {
    let split = news_split(1000, 0, 10, 2);
    let cfg = TrainConfig::default();
    let vocab = build_vocab(
        split
            .train
            .iter()
            .flat_map(|p| p.query.tokens.iter().chain(&p.article.tokens)),
        2,
    );
    let mut table = EmbeddingTable::init(vocab, cfg.dim, 3).unwrap();
    let batch: Vec<Example> = split.train[..cfg.batch_size]
        .iter()
        .map(|p| Example::from_pair(p, &table, cfg.max_article_len))
        .collect();
    let mut adam = AdamState::new(&table);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    c.bench_function("grad_step_batch_64_dim_64", |b| {
        b.iter(|| grad_step(black_box(&batch), &mut table, &mut adam, &cfg, &mut rng).unwrap())
    });
}

fn scoring(c: &mut Criterion) {
    let n = 1000;
    let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut random = |label: &str| {
        let s = (0..n * n)
            .map(|_| rand::Rng::random::<f64>(&mut rng))
            .collect();
        ScoreMatrix::new(ids.clone(), ids.clone(), s, label).unwrap()
    };
    let (a, b) = (random("a"), random("b"));
    let gold: HashMap<String, String> = ids.iter().map(|i| (i.clone(), i.clone())).collect();
    c.bench_function("fuse_1000x1000", |bch| {
        bch.iter(|| fuse(black_box(&a), &b).unwrap())
    });
    c.bench_function("evaluate_1000x1000", |bch| {
        bch.iter(|| evaluate(black_box(&a), &gold, &[1, 3, 10]).unwrap())
    });
}

criterion_group!(benches, lexical, training, scoring);
criterion_main!(benches);
