use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const INIT_RANGE: f64 = 0.05;

/// Vocabulary-indexed embedding matrix, row-major `|V| x dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    vocab: HashMap<String, u32>,
    tokens: Vec<String>,
    weights: Vec<f64>,
    dim: usize,
}

/// Tokens seen at least `min_count` times, sorted.
pub fn build_vocab<'a, I>(tokens: I, min_count: usize) -> Vec<String>
where
    I: IntoIterator<Item = &'a String>,
{
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.as_str()).or_default() += 1;
    }
    counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(t, _)| t.to_string())
        .collect()
}

impl EmbeddingTable {
    pub fn from_parts(tokens: Vec<String>, dim: usize, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be >= 1".into()));
        }
        if weights.len() != tokens.len() * dim {
            return Err(Error::Format(format!(
                "weights hold {} values, expected {} x {}",
                weights.len(),
                tokens.len(),
                dim
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Format("embedding weights must be finite".into()));
        }
        let mut vocab = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if vocab.insert(t.clone(), i as u32).is_some() {
                return Err(Error::Format(format!("duplicate vocabulary token {t:?}")));
            }
        }
        Ok(Self {
            vocab,
            tokens,
            weights,
            dim,
        })
    }

    /// Entries drawn i.i.d. uniform in `[-0.05, 0.05]`.
    pub fn init(tokens: Vec<String>, dim: usize, seed: u64) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..tokens.len() * dim)
            .map(|_| rng.random_range(-INIT_RANGE..=INIT_RANGE))
            .collect();
        Self::from_parts(tokens, dim, weights)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.vocab.get(token).copied()
    }

    pub fn row(&self, id: u32) -> &[f64] {
        let start = id as usize * self.dim;
        &self.weights[start..start + self.dim]
    }

    pub fn row_mut(&mut self, id: u32) -> &mut [f64] {
        let start = id as usize * self.dim;
        &mut self.weights[start..start + self.dim]
    }

    /// Maps tokens to row ids, dropping out-of-vocabulary tokens.
    pub fn ids(&self, tokens: &[String]) -> Vec<u32> {
        tokens.iter().filter_map(|t| self.id(t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    #[test]
    fn same_seed_same_table() {
        let a = EmbeddingTable::init(vocab(50), 8, 3).unwrap();
        let b = EmbeddingTable::init(vocab(50), 8, 3).unwrap();
        let c = EmbeddingTable::init(vocab(50), 8, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn entries_are_bounded() {
        let t = EmbeddingTable::init(vocab(100), 16, 1).unwrap();
        assert!(t.weights().iter().all(|w| w.abs() <= INIT_RANGE));
    }

    #[test]
    fn vocabulary_respects_min_count() {
        let toks: Vec<String> = "b a a c b a".split(' ').map(String::from).collect();
        assert_eq!(build_vocab(&toks, 2), ["a", "b"]);
        assert_eq!(build_vocab(&toks, 1), ["a", "b", "c"]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(EmbeddingTable::from_parts(vocab(2), 3, vec![0.0; 5]).is_err());
        assert!(EmbeddingTable::from_parts(vocab(2), 0, vec![]).is_err());
        assert!(EmbeddingTable::init(Vec::new(), 4, 0).is_err());
        assert!(EmbeddingTable::from_parts(vocab(1), 1, vec![f64::NAN]).is_err());
    }
}
