//! Seeded synthetic corpora for tests, benchmarks and the bundled fixture.
//!
//! Words are pronounceable pseudo-words. Each corpus is built from latent
//! "concepts" that are written one way in queries (headlines) and, for most
//! concepts, a different way in article bodies, so exact-match rankers and a
//! trained embedding model see complementary evidence.

use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Document, QueryArticlePair, RawRecord};
use crate::stopwords::Stopwords;

const ONSETS: &[&str] = &[
    "b", "br", "c", "ch", "d", "dr", "f", "g", "gr", "h", "j", "k", "l", "m", "n", "p", "pl", "r",
    "s", "sh", "st", "t", "tr", "v", "w", "z",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ea", "ou"];
const CODAS: &[&str] = &["", "", "n", "r", "s", "l", "m", "nd", "st", "k"];

/// Generates distinct pseudo-words that are not English stopwords.
pub struct WordGen {
    rng: ChaCha8Rng,
    seen: HashSet<String>,
    stop: Stopwords,
}

impl WordGen {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seen: HashSet::new(),
            stop: Stopwords::english(),
        }
    }

    pub fn word(&mut self, syllables: usize) -> String {
        loop {
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(ONSETS.choose(&mut self.rng).unwrap());
                w.push_str(VOWELS.choose(&mut self.rng).unwrap());
            }
            w.push_str(CODAS.choose(&mut self.rng).unwrap());
            if !self.stop.contains(&w) && self.seen.insert(w.clone()) {
                return w;
            }
        }
    }

    pub fn words(&mut self, n: usize, syllables: usize) -> Vec<String> {
        (0..n).map(|_| self.word(syllables)).collect()
    }
}

fn doc(id: u32, tokens: Vec<String>) -> Document {
    Document {
        doc_id: id,
        tokens,
        source_id: format!("syn-{id}"),
    }
}

/// Query/article pairs whose query words never occur in any article.
///
/// Concept `c` is written `query_words[c]` in queries and `article_words[c]` in
/// articles, so the vocabulary has `2 * n_concepts` words. Each pair draws
/// `query_len` distinct concepts; its article repeats them and adds the same
/// number of random distractor concepts. An untrained encoder ranks at chance;
/// a trained one has to learn the concept alignment.
pub fn aligned_pairs(
    n_pairs: usize,
    n_concepts: usize,
    query_len: usize,
    seed: u64,
) -> Vec<QueryArticlePair> {
    let mut gen = WordGen::new(seed);
    let query_words = gen.words(n_concepts, 2);
    let article_words = gen.words(n_concepts, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let concepts: Vec<usize> = (0..n_concepts).collect();
    (0..n_pairs as u32)
        .map(|id| {
            let chosen: Vec<usize> = concepts
                .choose_multiple(&mut rng, query_len)
                .copied()
                .collect();
            let query = chosen.iter().map(|&c| query_words[c].clone()).collect();
            let mut article: Vec<String> = Vec::new();
            for &c in &chosen {
                for _ in 0..rng.random_range(1..=3) {
                    article.push(article_words[c].clone());
                }
            }
            for _ in 0..query_len {
                article.push(article_words[rng.random_range(0..n_concepts)].clone());
            }
            article.shuffle(&mut rng);
            QueryArticlePair {
                pair_id: id,
                query: doc(id, query),
                article: doc(id, article),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct NewsConfig {
    pub n_topics: usize,
    pub concepts_per_topic: usize,
    /// Fraction of concepts written identically in headlines and bodies.
    pub shared_form: f64,
    pub n_entities: usize,
    /// Probability that a headline names the story's entity.
    pub entity_in_headline: f64,
    pub n_filler: usize,
    /// Fraction of records with a headline too short to become a query.
    pub short_headline: f64,
    /// Fraction of records whose body is a single sentence.
    pub single_sentence: f64,
}

impl Default for NewsConfig {
    fn default() -> Self {
        Self {
            n_topics: 40,
            concepts_per_topic: 15,
            shared_form: 0.25,
            n_entities: 4000,
            entity_in_headline: 0.3,
            n_filler: 800,
            short_headline: 0.06,
            single_sentence: 0.01,
        }
    }
}

const GLUE: &[&str] = &[
    "the", "of", "and", "to", "in", "a", "for", "on", "with", "as", "at", "by", "from", "that",
    "is", "was", "will", "after", "over", "their",
];

/// News-style records: a headline-like first sentence followed by a body.
pub fn news_records(n: usize, cfg: &NewsConfig, seed: u64) -> Vec<RawRecord> {
    let mut gen = WordGen::new(seed);
    let n_concepts = cfg.n_topics * cfg.concepts_per_topic;
    let head_forms = gen.words(n_concepts, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let body_forms: Vec<String> = head_forms
        .iter()
        .map(|h| {
            if rng.random_bool(cfg.shared_form) {
                h.clone()
            } else {
                gen.word(3)
            }
        })
        .collect();
    let entities = gen.words(cfg.n_entities, 3);
    let filler = gen.words(cfg.n_filler, 2);

    (0..n)
        .map(|i| {
            let topic = rng.random_range(0..cfg.n_topics);
            let topic_concepts: Vec<usize> =
                (topic * cfg.concepts_per_topic..(topic + 1) * cfg.concepts_per_topic).collect();
            let keys: Vec<usize> = topic_concepts
                .choose_multiple(&mut rng, 4)
                .copied()
                .collect();
            let entity = entities.choose(&mut rng).unwrap().clone();

            let mut head: Vec<String> = Vec::new();
            if rng.random_bool(cfg.short_headline) {
                head.push(capitalize(&head_forms[keys[0]]));
                head.push(head_forms[keys[1]].clone());
            } else {
                if rng.random_bool(cfg.entity_in_headline) {
                    head.push(entity.clone());
                }
                for &k in &keys {
                    if rng.random_bool(0.5) {
                        head.push(GLUE.choose(&mut rng).unwrap().to_string());
                    }
                    head.push(head_forms[k].clone());
                }
                for _ in 0..rng.random_range(1..=2) {
                    let at = rng.random_range(0..=head.len());
                    head.insert(at, filler.choose(&mut rng).unwrap().clone());
                }
                if rng.random_bool(0.3) {
                    head.push(rng.random_range(1990..2030).to_string());
                }
                head[0] = capitalize(&head[0]);
            }
            let headline = format!("{}.", head.join(" "));

            let n_sentences = if rng.random_bool(cfg.single_sentence) {
                0
            } else {
                rng.random_range(6..=12)
            };
            let mut sentences = Vec::with_capacity(n_sentences);
            for _ in 0..n_sentences {
                let len = rng.random_range(8..=16);
                let words: Vec<String> = (0..len)
                    .map(|_| {
                        let r: f64 = rng.random();
                        if r < 0.22 {
                            body_forms[*keys.choose(&mut rng).unwrap()].clone()
                        } else if r < 0.42 {
                            body_forms[*topic_concepts.choose(&mut rng).unwrap()].clone()
                        } else if r < 0.62 {
                            filler.choose(&mut rng).unwrap().clone()
                        } else if r < 0.66 {
                            entity.clone()
                        } else {
                            GLUE.choose(&mut rng).unwrap().to_string()
                        }
                    })
                    .collect();
                let mut s = words.join(" ");
                s = capitalize(&s);
                s.push(if rng.random_bool(0.05) { '!' } else { '.' });
                sentences.push(s);
            }
            let body = if sentences.is_empty() {
                headline
            } else {
                format!("{headline} {}", sentences.join(" "))
            };
            RawRecord {
                id: format!("news-{i:05}"),
                title: Some(capitalize(&head_forms[keys[0]])),
                body,
                query: None,
            }
        })
        .collect()
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}
