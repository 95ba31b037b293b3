//! Vocabulary, sparse count vectors and smoothed TF-IDF.
//!
//! The IDF weight of term `t` over `n` documents is
//! `ln((1 + n) / (1 + df(t))) + 1`, where `df(t)` counts documents with a
//! nonzero entry for `t`. TF-IDF vectors are raw counts times IDF, scaled to
//! unit L2 norm.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textpipe::TokenList;

#[derive(Debug, Error, PartialEq)]
pub enum VectorError {
    #[error("cannot fit a vocabulary: every document is empty")]
    EmptyCorpus,
    #[error("cannot fit idf on an empty matrix")]
    EmptyMatrix,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid sparse entry at index {index}: {reason}")]
    InvalidEntry { index: usize, reason: &'static str },
    #[error("vocabulary tokens must be unique and sorted (at position {0})")]
    UnsortedVocabulary(usize),
}

/// Lexicographically ordered token index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index_of: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from an already sorted, duplicate-free token list.
    pub fn from_sorted_tokens(tokens: Vec<String>) -> Result<Self, VectorError> {
        if let Some(pos) = tokens.windows(2).position(|w| w[0] >= w[1]) {
            return Err(VectorError::UnsortedVocabulary(pos + 1));
        }
        let index_of = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Vocabulary { tokens, index_of })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index_of.get(token).copied()
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

pub fn fit_vocabulary<'a, I>(docs: I) -> Result<Vocabulary, VectorError>
where
    I: IntoIterator<Item = &'a TokenList>,
{
    let mut tokens: Vec<String> = docs
        .into_iter()
        .flat_map(|d| d.iter().cloned())
        .collect();
    if tokens.is_empty() {
        return Err(VectorError::EmptyCorpus);
    }
    tokens.sort_unstable();
    tokens.dedup();
    Vocabulary::from_sorted_tokens(tokens)
}

/// Sparse vector with entries kept sorted by index and no stored zeros.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
    dimension: usize,
}

impl SparseVector {
    pub fn zeros(dimension: usize) -> Self {
        SparseVector {
            entries: Vec::new(),
            dimension,
        }
    }

    /// Accepts entries in any order; zeros are dropped, duplicate or
    /// out-of-range indices and non-finite weights are rejected.
    pub fn from_entries(
        dimension: usize,
        entries: impl IntoIterator<Item = (usize, f64)>,
    ) -> Result<Self, VectorError> {
        let mut entries: Vec<(usize, f64)> = entries.into_iter().filter(|&(_, w)| w != 0.0).collect();
        entries.sort_by_key(|&(i, _)| i);
        for (pos, &(index, weight)) in entries.iter().enumerate() {
            if index >= dimension {
                return Err(VectorError::InvalidEntry {
                    index,
                    reason: "index out of range",
                });
            }
            if !weight.is_finite() {
                return Err(VectorError::InvalidEntry {
                    index,
                    reason: "non-finite weight",
                });
            }
            if pos > 0 && entries[pos - 1].0 == index {
                return Err(VectorError::InvalidEntry {
                    index,
                    reason: "duplicate index",
                });
            }
        }
        Ok(SparseVector { entries, dimension })
    }

    /// Builds from a dense slice, skipping zeros.
    pub fn from_dense(values: &[f64]) -> Result<Self, VectorError> {
        SparseVector::from_entries(values.len(), values.iter().copied().enumerate())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0.0)
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.dimension];
        for &(i, w) in &self.entries {
            dense[i] = w;
        }
        dense
    }

    /// Dot product against a dense vector of the same dimension.
    pub fn dot_dense(&self, dense: &[f64]) -> Result<f64, VectorError> {
        if dense.len() != self.dimension {
            return Err(VectorError::DimensionMismatch {
                expected: dense.len(),
                actual: self.dimension,
            });
        }
        Ok(self.entries.iter().map(|&(i, w)| w * dense[i]).sum())
    }
}

/// Term counts over `vocab`; out-of-vocabulary tokens are dropped.
pub fn count_transform(tokens: &TokenList, vocab: &Vocabulary) -> SparseVector {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for token in tokens {
        if let Some(i) = vocab.index_of(token) {
            *counts.entry(i).or_insert(0.0) += 1.0;
        }
    }
    let mut entries: Vec<(usize, f64)> = counts.into_iter().collect();
    entries.sort_by_key(|&(i, _)| i);
    SparseVector {
        entries,
        dimension: vocab.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfModel {
    idf: Vec<f64>,
    n_docs: usize,
}

impl IdfModel {
    /// Reassembles a fitted model; weights must be finite and at least 1.
    pub fn from_parts(idf: Vec<f64>, n_docs: usize) -> Result<Self, VectorError> {
        if n_docs == 0 {
            return Err(VectorError::EmptyMatrix);
        }
        if let Some(index) = idf.iter().position(|w| !w.is_finite() || *w < 1.0) {
            return Err(VectorError::InvalidEntry {
                index,
                reason: "idf weight below 1 or non-finite",
            });
        }
        Ok(IdfModel { idf, n_docs })
    }

    pub fn weights(&self) -> &[f64] {
        &self.idf
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn dimension(&self) -> usize {
        self.idf.len()
    }
}

pub fn fit_idf(matrix: &[SparseVector]) -> Result<IdfModel, VectorError> {
    let first = matrix.first().ok_or(VectorError::EmptyMatrix)?;
    let dimension = first.dimension();
    let mut df = vec![0usize; dimension];
    for row in matrix {
        if row.dimension() != dimension {
            return Err(VectorError::DimensionMismatch {
                expected: dimension,
                actual: row.dimension(),
            });
        }
        for &(i, _) in row.entries() {
            df[i] += 1;
        }
    }
    let n = matrix.len() as f64;
    let idf = df
        .iter()
        .map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0)
        .collect();
    Ok(IdfModel {
        idf,
        n_docs: matrix.len(),
    })
}

/// Scales counts by IDF and L2-normalizes. The zero vector stays zero.
pub fn tfidf_transform(counts: &SparseVector, idf: &IdfModel) -> Result<SparseVector, VectorError> {
    if counts.dimension() != idf.dimension() {
        return Err(VectorError::DimensionMismatch {
            expected: idf.dimension(),
            actual: counts.dimension(),
        });
    }
    let mut entries: Vec<(usize, f64)> = counts
        .entries()
        .iter()
        .map(|&(i, c)| (i, c * idf.idf[i]))
        .collect();
    let norm = entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for entry in &mut entries {
            entry.1 /= norm;
        }
    }
    entries.retain(|&(_, w)| w != 0.0);
    Ok(SparseVector {
        entries,
        dimension: counts.dimension(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(words: &[&str]) -> TokenList {
        TokenList::from(words.to_vec())
    }

    fn abc() -> Vocabulary {
        fit_vocabulary(&[toks(&["b", "a"]), toks(&["b", "c"])]).unwrap()
    }

    #[test]
    fn vocabulary_is_sorted_and_deduped() {
        let vocab = abc();
        assert_eq!(vocab.tokens(), ["a", "b", "c"]);
        assert_eq!(vocab.index_of("c"), Some(2));
        let single = fit_vocabulary(&[toks(&["x", "x"])]).unwrap();
        assert_eq!(single.tokens(), ["x"]);
        assert_eq!(fit_vocabulary(&[toks(&[]), toks(&[])]), Err(VectorError::EmptyCorpus));
    }

    #[test]
    fn vocabulary_rejects_unsorted_tokens() {
        let err = Vocabulary::from_sorted_tokens(vec!["b".into(), "a".into()]).unwrap_err();
        assert_eq!(err, VectorError::UnsortedVocabulary(1));
        assert!(Vocabulary::from_sorted_tokens(vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn counting() {
        let vocab = abc();
        let v = count_transform(&toks(&["a", "b", "a"]), &vocab);
        assert_eq!(v.entries(), &[(0, 2.0), (1, 1.0)]);
        assert_eq!(v.dimension(), 3);
        let unseen = count_transform(&toks(&["z"]), &vocab);
        assert!(unseen.is_zero());
        assert_eq!(unseen.dimension(), 3);
        assert!(count_transform(&toks(&[]), &vocab).is_zero());
    }

    fn two_doc_matrix() -> (Vocabulary, Vec<SparseVector>) {
        let docs = [toks(&["a", "b", "a"]), toks(&["b", "c"])];
        let vocab = fit_vocabulary(&docs).unwrap();
        let matrix = docs.iter().map(|d| count_transform(d, &vocab)).collect();
        (vocab, matrix)
    }

    #[test]
    fn idf_hand_values() {
        let (_, matrix) = two_doc_matrix();
        let idf = fit_idf(&matrix).unwrap();
        let expected = (1.5f64).ln() + 1.0;
        assert!((idf.weights()[0] - 1.405465).abs() < 1e-6);
        assert_eq!(idf.weights(), &[expected, 1.0, expected]);
        assert_eq!(idf.n_docs(), 2);
    }

    #[test]
    fn idf_for_unused_term() {
        let matrix = vec![SparseVector::from_dense(&[1.0, 0.0]).unwrap(); 3];
        let idf = fit_idf(&matrix).unwrap();
        assert_eq!(idf.weights()[0], 1.0);
        assert_eq!(idf.weights()[1], (4.0f64).ln() + 1.0);
    }

    #[test]
    fn idf_errors() {
        assert_eq!(fit_idf(&[]), Err(VectorError::EmptyMatrix));
        let ragged = [SparseVector::zeros(2), SparseVector::zeros(3)];
        assert!(matches!(fit_idf(&ragged), Err(VectorError::DimensionMismatch { .. })));
    }

    #[test]
    fn tfidf_hand_values() {
        let (_, matrix) = two_doc_matrix();
        let idf = fit_idf(&matrix).unwrap();
        let v = tfidf_transform(&matrix[1], &idf).unwrap();
        assert_eq!(v.nnz(), 2);
        assert!((v.get(1) - 0.579739).abs() < 1e-6);
        assert!((v.get(2) - 0.814802).abs() < 1e-6);
        // independent reference values, 16 digits
        assert!((v.get(1) - 0.5797386715376657).abs() < 1e-15);
        assert!((v.get(2) - 0.8148024746671689).abs() < 1e-15);
    }

    #[test]
    fn tfidf_edge_cases() {
        let (_, matrix) = two_doc_matrix();
        let idf = fit_idf(&matrix).unwrap();
        assert!(tfidf_transform(&SparseVector::zeros(3), &idf).unwrap().is_zero());
        let one = SparseVector::from_entries(3, [(2, 4.0)]).unwrap();
        assert_eq!(tfidf_transform(&one, &idf).unwrap().entries(), &[(2, 1.0)]);
        assert!(matches!(
            tfidf_transform(&SparseVector::zeros(4), &idf),
            Err(VectorError::DimensionMismatch { expected: 3, actual: 4 })
        ));
    }

    #[test]
    fn sparse_construction_checks() {
        assert!(SparseVector::from_entries(2, [(2, 1.0)]).is_err());
        assert!(SparseVector::from_entries(2, [(0, 1.0), (0, 2.0)]).is_err());
        assert!(SparseVector::from_entries(2, [(0, f64::NAN)]).is_err());
        let v = SparseVector::from_entries(3, [(2, 1.0), (0, 0.0), (1, -2.0)]).unwrap();
        assert_eq!(v.entries(), &[(1, -2.0), (2, 1.0)]);
        assert_eq!(v.dot_dense(&[5.0, 1.0, 3.0]).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn count_sum_equals_in_vocab_tokens(words in prop::collection::vec("[a-f]", 0..40)) {
            let vocab = fit_vocabulary(&[toks(&["a", "b", "c", "d"])]).unwrap();
            let list = TokenList::new(words.clone());
            let in_vocab = words.iter().filter(|w| vocab.index_of(w).is_some()).count();
            prop_assert_eq!(count_transform(&list, &vocab).sum(), in_vocab as f64);
        }

        #[test]
        fn idf_at_least_one_with_equality_iff_full_df(
            rows in prop::collection::vec(prop::collection::vec(0u8..3, 4), 1..8)
        ) {
            let matrix: Vec<SparseVector> = rows
                .iter()
                .map(|r| SparseVector::from_dense(&r.iter().map(|&c| c as f64).collect::<Vec<_>>()).unwrap())
                .collect();
            let idf = fit_idf(&matrix).unwrap();
            for t in 0..4 {
                let df = rows.iter().filter(|r| r[t] > 0).count();
                prop_assert!(idf.weights()[t] >= 1.0);
                prop_assert_eq!(idf.weights()[t] == 1.0, df == rows.len());
            }
        }

        #[test]
        fn vocabulary_fit_is_stable(words in prop::collection::vec("[a-z]{1,4}", 1..30)) {
            let docs = [TokenList::new(words.clone())];
            prop_assert_eq!(fit_vocabulary(&docs).unwrap(), fit_vocabulary(&docs).unwrap());
        }
    }
}
