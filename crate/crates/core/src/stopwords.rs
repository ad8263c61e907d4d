//! Stopword lists.
//!
//! The bundled English list has 179 entries and is pinned by the SHA-256 of its
//! canonical form (entries sorted, one per line, trailing newline). Persisted
//! models record that digest so a model is never queried with a different list.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const BUNDLED_EN: &str = include_str!("../data/stopwords_en.txt");

pub const BUNDLED_EN_LEN: usize = 179;
pub const BUNDLED_EN_SHA256: &str =
    "649e2341238138974f7fc014ba2c3655dc334605136791a9d1918a41fca86143";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords {
    words: HashSet<String>,
    digest: String,
}

impl Stopwords {
    /// The bundled English list. Panics only if the embedded file was altered.
    pub fn english() -> Self {
        let list = Self::from_words(BUNDLED_EN.lines());
        assert_eq!(
            list.len(),
            BUNDLED_EN_LEN,
            "bundled stopword list was modified"
        );
        assert_eq!(
            list.digest, BUNDLED_EN_SHA256,
            "bundled stopword list was modified"
        );
        list
    }

    pub fn empty() -> Self {
        Self::from_words(std::iter::empty::<&str>())
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words: HashSet<String> = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_string())
            .filter(|w| !w.is_empty())
            .collect();
        let digest = canonical_digest(&words);
        Self { words, digest }
    }

    /// Reads a newline-separated list; blank lines and `#` comments are ignored.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_words(
            text.lines().filter(|l| !l.trim_start().starts_with('#')),
        ))
    }

    #[inline]
    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Hex SHA-256 of the canonical form.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// Returns the tokens that are not stopwords, in order.
    pub fn filter<'a>(&self, tokens: &'a [String]) -> Vec<&'a str> {
        tokens
            .iter()
            .map(String::as_str)
            .filter(|t| !self.contains(t))
            .collect()
    }
}

fn canonical_digest(words: &HashSet<String>) -> String {
    let sorted: BTreeSet<&str> = words.iter().map(String::as_str).collect();
    let mut hasher = Sha256::new();
    for w in sorted {
        hasher.update(w.as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_list_is_pinned() {
        let sw = Stopwords::english();
        assert_eq!(sw.len(), 179);
        assert!(sw.contains("the"));
        assert!(sw.contains("wouldn't"));
        assert!(!sw.contains("england"));
    }

    #[test]
    fn digest_ignores_order_and_duplicates() {
        let a = Stopwords::from_words(["b", "a", "a"]);
        let b = Stopwords::from_words(["a", "b"]);
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), Stopwords::empty().digest());
    }
}
