use std::collections::HashMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hybrid_rank::eval::{bm25_grid, mu_grid, tune_bm25, tune_mu, DevQuery};
use hybrid_rank::fusion::{export_scores, import_scores, parse_tsv};
use hybrid_rank::{evaluate, fuse, LexStats, ScoreMatrix, Stopwords};

fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn random_matrix(rng: &mut ChaCha8Rng, nq: usize, nd: usize) -> ScoreMatrix {
    let scores = (0..nq * nd).map(|_| rng.random_range(-1.0..1.0)).collect();
    ScoreMatrix::new(ids("q", nq), ids("d", nd), scores, "r").unwrap()
}

fn ranking(m: &ScoreMatrix, q: usize) -> Vec<u32> {
    m.top_k(q, m.shape().1).iter().map(|s| s.doc_id).collect()
}

#[test]
fn sum_promotes_a_consistent_runner_up() {
    // doc 1 is second for both sources; doc 0 and doc 2 each win one source
    let a =
        ScoreMatrix::from_rows(ids("q", 1), ids("d", 3), vec![vec![0.9, 0.6, 0.1]], "a").unwrap();
    let b =
        ScoreMatrix::from_rows(ids("q", 1), ids("d", 3), vec![vec![0.1, 0.6, 0.9]], "b").unwrap();
    assert_eq!(ranking(&a, 0)[1], 1);
    assert_eq!(ranking(&b, 0)[1], 1);
    let f = fuse(&a, &b).unwrap();
    // exhaustive enumeration of the 3! orders, keeping the one consistent with the sums
    let sums = [0.9 + 0.1, 0.6 + 0.6, 0.1 + 0.9];
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let consistent: Vec<_> = perms
        .iter()
        .filter(|p| {
            p.windows(2)
                .all(|w| sums[w[0]] > sums[w[1]] || (sums[w[0]] == sums[w[1]] && w[0] < w[1]))
        })
        .collect();
    assert_eq!(consistent.len(), 1);
    let want: Vec<u32> = consistent[0].iter().map(|&x| x as u32).collect();
    assert_eq!(ranking(&f, 0), want);
    assert_eq!(want[0], 1);
    assert_eq!(f.source, "a+b");
}

#[test]
fn external_ranker_file_fuses_like_hand_arithmetic() {
    let external = "#query_id\tdoc_id\tscore\n#source\tbert\n\
                    q1\td1\t0.25\nq1\td2\t0.75\nq2\td2\t0.5\n";
    let ext = parse_tsv(external, "x").unwrap();
    assert_eq!(ext.source, "bert");
    // q2/d1 is absent and reads as 0
    assert_eq!(ext.lookup("q2", "d1"), Some(0.0));
    let ours = ScoreMatrix::from_rows(
        vec!["q1".into(), "q2".into()],
        vec!["d1".into(), "d2".into()],
        vec![vec![0.6, 0.0], vec![0.3, 0.1]],
        "tfidf",
    )
    .unwrap();
    let f = fuse(&ours, &ext).unwrap();
    assert_eq!(f.lookup("q1", "d1"), Some(0.6 + 0.25));
    assert_eq!(f.lookup("q1", "d2"), Some(0.75));
    assert_eq!(f.lookup("q2", "d1"), Some(0.3));
    assert_eq!(f.lookup("q2", "d2"), Some(0.1 + 0.5));
    // q1: d1 0.85 beats d2 0.75; q2: d2 0.6 beats d1 0.3
    assert_eq!(f.top_k(0, 1)[0].doc_id, 0);
    assert_eq!(f.top_k(1, 1)[0].doc_id, 1);
}

#[test]
fn mismatched_sources_are_rejected() {
    let a = ScoreMatrix::from_rows(ids("q", 1), ids("d", 2), vec![vec![0.0, 1.0]], "a").unwrap();
    let b =
        ScoreMatrix::from_rows(ids("q", 1), ids("d", 3), vec![vec![0.0, 1.0, 2.0]], "b").unwrap();
    assert_eq!(fuse(&a, &b).unwrap_err().kind(), "shape_mismatch");
    let c = ScoreMatrix::from_rows(ids("q", 1), ids("e", 2), vec![vec![0.0, 1.0]], "c").unwrap();
    assert_eq!(fuse(&a, &c).unwrap_err().kind(), "id_mismatch");
    let err = parse_tsv("#query_id\tdoc_id\tscore\nq\td\tnope\n", "x").unwrap_err();
    assert!(matches!(err, hybrid_rank::Error::Parse { line: 2, .. }));
}

#[test]
fn files_round_trip_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = random_matrix(&mut rng, 10, 10);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.tsv");
    export_scores(&m, &p).unwrap();
    assert_eq!(import_scores(&p).unwrap(), m);
    std::fs::write(dir.path().join("empty.tsv"), "").unwrap();
    assert_eq!(
        import_scores(&dir.path().join("empty.tsv"))
            .unwrap()
            .shape(),
        (0, 0)
    );
}

#[test]
fn constant_shift_of_one_source_never_changes_fused_rankings() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1000 {
        let nq = rng.random_range(1..5);
        let nd = rng.random_range(1..8);
        let a = random_matrix(&mut rng, nq, nd);
        let b = random_matrix(&mut rng, nq, nd);
        // binary-exact shift so the sums stay exactly comparable
        let c = rng.random_range(-8..8) as f64 * 0.25;
        let base = fuse(&a, &b).unwrap();
        let shifted = fuse(&a.map(|x| x + c), &b).unwrap();
        for q in 0..nq {
            let order_base = ranking(&base, q);
            // sort the shifted sums with the same oracle order
            let mut want: Vec<u32> = (0..nd as u32).collect();
            let row = shifted.row(q);
            want.sort_by(|&x, &y| row[y as usize].total_cmp(&row[x as usize]).then(x.cmp(&y)));
            assert_eq!(ranking(&shifted, q), want);
            let scores_base: Vec<f64> = order_base
                .iter()
                .map(|&d| base.row(q)[d as usize])
                .collect();
            let scores_shift: Vec<f64> = order_base.iter().map(|&d| row[d as usize]).collect();
            assert!(scores_shift.windows(2).all(|w| w[0] >= w[1]));
            assert!(scores_base.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}

#[test]
fn ranks_one_two_four() {
    let m = ScoreMatrix::from_rows(
        ids("q", 3),
        ids("d", 4),
        vec![
            vec![0.9, 0.1, 0.2, 0.3],
            vec![0.5, 0.9, 0.1, 0.0],
            vec![0.9, 0.8, 0.7, 0.6],
        ],
        "t",
    )
    .unwrap();
    let gold: HashMap<String, String> = [("q0", "d0"), ("q1", "d0"), ("q2", "d3")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    let r = evaluate(&m, &gold, &[1, 3, 10]).unwrap();
    assert_eq!(
        r.per_query.iter().map(|o| o.rank).collect::<Vec<_>>(),
        [1, 2, 4]
    );
    assert_eq!(r.mrr, 7.0 / 12.0);
    assert_eq!(r.p_at(1), Some(1.0 / 3.0));
    assert_eq!(r.p_at(3), Some(2.0 / 3.0));
    assert_eq!(r.p_at(10), Some(1.0));
}

fn sort_oracle(m: &ScoreMatrix, gold: &HashMap<String, String>) -> Vec<usize> {
    (0..m.shape().0)
        .map(|q| {
            let mut docs: Vec<usize> = (0..m.shape().1).collect();
            let row = m.row(q);
            docs.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b)));
            let want = &gold[&m.query_ids()[q]];
            docs.iter().position(|&d| &m.doc_ids()[d] == want).unwrap() + 1
        })
        .collect()
}

#[test]
fn two_hundred_queries_match_a_sort_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let nq = 200;
    let nd = 150;
    // coarse scores so ties are common
    let scores = (0..nq * nd)
        .map(|_| rng.random_range(0..20) as f64 / 4.0)
        .collect();
    let query_ids: Vec<String> = (0..nq).map(|i| i.to_string()).collect();
    let doc_ids: Vec<String> = (0..nd).map(|i| i.to_string()).collect();
    let m = ScoreMatrix::new(query_ids, doc_ids, scores, "r").unwrap();
    let gold: HashMap<String, String> = (0..nq)
        .map(|q| (q.to_string(), rng.random_range(0..nd).to_string()))
        .collect();
    let r = evaluate(&m, &gold, &[1, 3, 10]).unwrap();
    let ranks = sort_oracle(&m, &gold);
    let got: Vec<usize> = r.per_query.iter().map(|o| o.rank).collect();
    assert_eq!(got, ranks);
    let mrr = ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / nq as f64;
    assert_eq!(r.mrr, mrr);
    for k in [1, 3, 10] {
        let p = ranks.iter().filter(|&&r| r <= k).count() as f64 / nq as f64;
        assert_eq!(r.p_at(k), Some(p));
    }
    assert_eq!(r.pool_size, nd);
}

#[test]
fn missing_gold_is_an_error() {
    let m = ScoreMatrix::from_rows(ids("q", 1), ids("d", 2), vec![vec![0.0, 1.0]], "a").unwrap();
    let gold: HashMap<String, String> = [("q0".to_string(), "d9".to_string())].into();
    assert_eq!(
        evaluate(&m, &gold, &[1]).unwrap_err().kind(),
        "missing_gold"
    );
}

fn pad(doc: &mut Vec<String>, len: usize, tag: &str) {
    let mut i = 0;
    while doc.len() < len {
        doc.push(format!("pad{tag}x{i}"));
        i += 1;
    }
}

fn repeat(t: &str, n: usize) -> Vec<String> {
    vec![t.to_string(); n]
}

fn q(words: &[&str], relevant: u32) -> DevQuery {
    DevQuery {
        tokens: words.iter().map(|w| w.to_string()).collect(),
        relevant,
    }
}

/// Documents whose BM25 ranking is perfect only at k1 = 2.5, b = 0.6.
///
/// With every k1-probe document at the average length, query "x" ranks its
/// relevant document (x1 twenty times) above the competitor (x1, x2, x3 once
/// each) iff k1 > 40/17, and query "y" ranks the one-of-each document first iff
/// k1 < 24/9. The b-probe documents have lengths 40 and 20 and single-term
/// queries, where the longer document wins iff b < 3 (fR - fC) / (fR + fC),
/// independent of k1.
fn planted_bm25() -> (Vec<Vec<String>>, Vec<DevQuery>) {
    let mut docs: Vec<Vec<String>> = Vec::new();
    let mut push = |mut d: Vec<String>, len: usize| {
        let tag = docs.len().to_string();
        pad(&mut d, len, &tag);
        docs.push(d);
        docs.len() as u32 - 1
    };
    let rx = push(repeat("x1", 20), 30);
    let _cx = push(vec!["x1".into(), "x2".into(), "x3".into()], 30);
    let _ry = push(repeat("y1", 12), 30);
    let cy = push(vec!["y1".into(), "y2".into(), "y3".into()], 30);
    push(vec!["x2".into(), "y2".into()], 30);
    push(vec!["x3".into(), "y3".into()], 30);
    // b < 9/13 keeps the long document first
    let long1 = push(repeat("z1", 8), 40);
    push(repeat("z1", 5), 20);
    // b > 9/17 puts the short document first
    push(repeat("z2", 10), 40);
    let short2 = push(repeat("z2", 7), 20);
    let dev = vec![
        q(&["x1", "x2", "x3"], rx),
        q(&["y1", "y2", "y3"], cy),
        q(&["z1"], long1),
        q(&["z2"], short2),
    ];
    (docs, dev)
}

/// Documents whose Dirichlet ranking is perfect only at mu = 500.
fn planted_lm() -> (Vec<Vec<String>>, Vec<DevQuery>) {
    let mut docs = Vec::new();
    let mut d = repeat("a", 1);
    pad(&mut d, 5, "sa");
    docs.push(d);
    let mut d = repeat("a", 2);
    pad(&mut d, 260, "ga");
    docs.push(d);
    let mut d = repeat("b", 1);
    pad(&mut d, 5, "sb");
    docs.push(d);
    let mut d = repeat("b", 2);
    pad(&mut d, 300, "gb");
    docs.push(d);
    let mut d = Vec::new();
    pad(&mut d, 1430, "f");
    docs.push(d);
    (docs, vec![q(&["a"], 1), q(&["b"], 2)])
}

fn oracle_rank(scores: &[f64], rel: usize) -> usize {
    1 + (0..scores.len())
        .filter(|&d| scores[d] > scores[rel] || (scores[d] == scores[rel] && d < rel))
        .count()
}

#[test]
fn bm25_tuning_recovers_the_planted_point() {
    let (docs, dev) = planted_bm25();
    let stats = LexStats::build(&docs, Stopwords::empty()).unwrap();
    assert_eq!(stats.avg_doc_len(), 30.0);
    // independent exhaustive search with a from-scratch scorer
    let n = docs.len() as f64;
    let mut perfect = Vec::new();
    for i in 1..=10 {
        for j in 3..=9 {
            let (k1, b) = (i as f64 * 0.5, j as f64 / 10.0);
            let all_first = dev.iter().all(|dq| {
                let scores: Vec<f64> = docs
                    .iter()
                    .map(|d| {
                        let mut terms = dq.tokens.clone();
                        terms.dedup();
                        terms
                            .iter()
                            .map(|t| {
                                let f = d.iter().filter(|x| *x == t).count() as f64;
                                let df = docs.iter().filter(|d| d.contains(t)).count() as f64;
                                let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                                idf * f * (k1 + 1.0)
                                    / (f + k1 * (1.0 - b + b * d.len() as f64 / 30.0))
                            })
                            .sum()
                    })
                    .collect();
                oracle_rank(&scores, dq.relevant as usize) == 1
            });
            if all_first {
                perfect.push((i, j));
            }
        }
    }
    assert_eq!(perfect, [(5, 6)]);
    let tuned = tune_bm25(&dev, &stats).unwrap();
    assert_eq!(tuned.grid.len(), 70);
    assert_eq!((tuned.best.k1, tuned.best.b), (2.5, 0.6));
    assert_eq!(tuned.best_mrr, 1.0);
}

#[test]
fn mu_tuning_recovers_the_planted_value() {
    let (docs, dev) = planted_lm();
    let stats = LexStats::build(&docs, Stopwords::empty()).unwrap();
    assert_eq!(stats.collection_len(), 2000);
    let mut perfect = Vec::new();
    for mu in [
        100.0, 200.0, 300.0, 400.0, 500.0, 1000.0, 1500.0, 2000.0, 2500.0, 3000.0,
    ] {
        let ok = dev.iter().all(|dq| {
            let t = &dq.tokens[0];
            let p = 3.0 / 2000.0;
            let scores: Vec<f64> = docs
                .iter()
                .map(|d| {
                    let f = d.iter().filter(|x| *x == t).count() as f64;
                    ((f + mu * p) / (d.len() as f64 + mu)).ln()
                })
                .collect();
            oracle_rank(&scores, dq.relevant as usize) == 1
        });
        if ok {
            perfect.push(mu);
        }
    }
    assert_eq!(perfect, [500.0]);
    let tuned = tune_mu(&dev, &stats).unwrap();
    assert_eq!(tuned.grid.len(), 10);
    assert_eq!(tuned.best.mu, 500.0);
}

#[test]
fn flat_objective_picks_the_smallest_point() {
    // no query term occurs anywhere, so every point scores the same
    let docs = vec![vec!["a".to_string()], vec!["b".to_string()]];
    let stats = LexStats::build(&docs, Stopwords::empty()).unwrap();
    let dev = vec![q(&["zzz"], 1)];
    assert_eq!(tune_mu(&dev, &stats).unwrap().best.mu, 100.0);
    let b = tune_bm25(&dev, &stats).unwrap().best;
    assert_eq!((b.k1, b.b), (0.5, 0.3));
    assert_eq!(bm25_grid().len(), 70);
    assert_eq!(mu_grid().len(), 10);
}

proptest! {
    #[test]
    fn fusion_commutes(seed in 0u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, 3, 5);
        let b = random_matrix(&mut rng, 3, 5);
        let (ab, ba) = (fuse(&a, &b).unwrap(), fuse(&b, &a).unwrap());
        prop_assert_eq!(ab.scores(), ba.scores());
        let bz = fuse(&b, &a.map(|_| 0.0)).unwrap();
        prop_assert_eq!(bz.scores(), b.scores());
    }

    #[test]
    fn evaluation_ignores_monotone_transforms_and_query_order(seed in 0u64..300) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, 6, 9);
        let gold: HashMap<String, String> = m
            .query_ids()
            .iter()
            .map(|q| (q.clone(), format!("d{}", rng.random_range(0..9))))
            .collect();
        let base = evaluate(&m, &gold, &[1, 3, 10]).unwrap();
        let t = evaluate(&m.map(|x| (3.0 * x).exp() + 1.0), &gold, &[1, 3, 10]).unwrap();
        prop_assert_eq!(&base, &t);
        // reverse the query rows
        let mut qids = m.query_ids().to_vec();
        qids.reverse();
        let rows: Vec<Vec<f64>> = (0..6).rev().map(|q| m.row(q).to_vec()).collect();
        let rev = ScoreMatrix::from_rows(qids, m.doc_ids().to_vec(), rows, "r").unwrap();
        prop_assert_eq!(&evaluate(&rev, &gold, &[1, 3, 10]).unwrap(), &base);
        prop_assert!(base.p_at(1) <= base.p_at(3) && base.p_at(3) <= base.p_at(10));
        prop_assert!(base.p_at(1).unwrap() <= base.mrr && base.mrr <= 1.0);
    }
}
