use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenizerConfig {
    #[serde(default = "default_true")]
    pub lowercase: bool,
}

fn default_true() -> bool {
    true
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self { lowercase: true }
    }
}

/// Word tokenizer: splits on every maximal run of non-alphanumeric characters
/// and lowercases each token. Digit-only tokens are kept.
///
/// Splitting happens before case folding because some lowercase mappings
/// introduce combining marks that are not alphanumeric.
pub fn tokenize(text: &str, cfg: &TokenizerConfig) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| {
            if cfg.lowercase {
                t.to_lowercase()
            } else {
                t.to_string()
            }
        })
        .collect()
}

/// Number of tokens `tokenize` would produce, without allocating them.
pub fn count_tokens(text: &str) -> usize {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .count()
}
