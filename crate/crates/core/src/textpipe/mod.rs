//! Text normalization: tokenize, lowercase, drop stopwords, stem.

mod porter;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use porter::stem;

/// The shipped English stopword list, one token per line.
pub const ENGLISH_STOPWORDS: &str = include_str!("../../data/english_stopwords.txt");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("min_token_length must be at least 1")]
    ZeroMinTokenLength,
    #[error("stopword `{0}` is not lowercase but lowercasing is enabled")]
    UppercaseStopword(String),
}

/// Parses a stopword file: one token per line, `#` starts a comment, blank
/// lines ignored.
pub fn parse_stopword_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|line| line.split('#').next().unwrap_or("").trim())
        .filter(|line| !line.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn english_stopwords() -> BTreeSet<String> {
    parse_stopword_list(ENGLISH_STOPWORDS)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub lowercase: bool,
    pub stopwords: BTreeSet<String>,
    pub stemming: bool,
    pub min_token_length: usize,
}

impl Default for PipelineConfig {
    /// Lowercasing, the shipped English stopwords, Porter stemming, no length filter.
    fn default() -> Self {
        PipelineConfig {
            lowercase: true,
            stopwords: english_stopwords(),
            stemming: true,
            min_token_length: 1,
        }
    }
}

impl PipelineConfig {
    /// Tokenization only: lowercase, no stopwords, no stemming.
    pub fn bare() -> Self {
        PipelineConfig {
            lowercase: true,
            stopwords: BTreeSet::new(),
            stemming: false,
            min_token_length: 1,
        }
    }

    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.stopwords = words.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_stemming(mut self, stemming: bool) -> Self {
        self.stemming = stemming;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.min_token_length == 0 {
            return Err(ConfigError::ZeroMinTokenLength);
        }
        if self.lowercase {
            if let Some(word) = self.stopwords.iter().find(|w| w.to_lowercase() != **w) {
                return Err(ConfigError::UppercaseStopword(word.clone()));
            }
        }
        Ok(())
    }
}

/// Ordered, non-empty tokens in order of appearance.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenList(Vec<String>);

impl TokenList {
    pub fn new(tokens: Vec<String>) -> Self {
        debug_assert!(tokens.iter().all(|t| !t.is_empty()));
        TokenList(tokens)
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

impl From<Vec<&str>> for TokenList {
    fn from(tokens: Vec<&str>) -> Self {
        TokenList::new(tokens.into_iter().map(str::to_string).collect())
    }
}

impl<'a> IntoIterator for &'a TokenList {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Splits on every maximal run of non-alphanumeric characters.
pub fn tokenize(text: &str, config: &PipelineConfig) -> TokenList {
    let tokens = text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| if config.lowercase { t.to_lowercase() } else { t.to_string() })
        // lowercasing can change length for a handful of code points
        .filter(|t| !t.is_empty() && t.chars().count() >= config.min_token_length)
        .collect();
    TokenList(tokens)
}

pub fn remove_stopwords(tokens: TokenList, stopwords: &BTreeSet<String>) -> TokenList {
    TokenList(tokens.0.into_iter().filter(|t| !stopwords.contains(t)).collect())
}

/// tokenize, then remove stopwords, then stem (when enabled).
pub fn preprocess(text: &str, config: &PipelineConfig) -> TokenList {
    let tokens = remove_stopwords(tokenize(text, config), &config.stopwords);
    if config.stemming {
        TokenList(tokens.0.iter().map(|t| stem(t)).collect())
    } else {
        tokens
    }
}
