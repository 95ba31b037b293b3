//! Multinomial naive Bayes.
//!
//! Under the naive independence assumption the joint likelihood of a
//! document factorizes into per-term probabilities, so the class score is
//!
//! ```text
//! score[c] = ln P(c) + Σ_t x[t] · ln P(t | c)
//! P(c)     = n_c / n
//! P(t | c) = (N_tc + α) / (N_c + α·V)
//! ```
//!
//! where `N_tc` is the summed weight of term `t` over class-`c` documents and
//! `N_c = Σ_t N_tc`. Weights need only be non-negative, so TF-IDF features
//! work as well as raw counts.

use serde::{Deserialize, Serialize};

use super::ClassifierError;
use crate::corpus::Label;
use crate::vectorspace::{SparseVector, VectorError};

pub const DEFAULT_ALPHA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnbModel {
    alpha: f64,
    class_log_prior: [f64; 2],
    feature_log_prob: [Vec<f64>; 2],
}

impl MnbModel {
    /// Reassembles a model from stored parameters, checking that both
    /// probability rows and the prior are normalized.
    pub fn from_parts(
        alpha: f64,
        class_log_prior: [f64; 2],
        feature_log_prob: [Vec<f64>; 2],
    ) -> Result<Self, ClassifierError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(ClassifierError::NonPositiveAlpha(alpha));
        }
        if feature_log_prob[0].len() != feature_log_prob[1].len() {
            return Err(ClassifierError::InvalidModel(
                "feature_log_prob rows differ in length".into(),
            ));
        }
        let normalized = |logs: &[f64]| (logs.iter().map(|l| l.exp()).sum::<f64>() - 1.0).abs() <= 1e-9;
        if !class_log_prior.iter().all(|l| l.is_finite()) || !normalized(&class_log_prior) {
            return Err(ClassifierError::InvalidModel("class_log_prior does not sum to 1".into()));
        }
        for row in &feature_log_prob {
            if !row.iter().all(|l| l.is_finite()) || (!row.is_empty() && !normalized(row)) {
                return Err(ClassifierError::InvalidModel(
                    "feature_log_prob row does not sum to 1".into(),
                ));
            }
        }
        Ok(MnbModel {
            alpha,
            class_log_prior,
            feature_log_prob,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn class_log_prior(&self) -> &[f64; 2] {
        &self.class_log_prior
    }

    pub fn feature_log_prob(&self, label: Label) -> &[f64] {
        &self.feature_log_prob[label.index()]
    }

    pub fn vocab_size(&self) -> usize {
        self.feature_log_prob[0].len()
    }
}

pub fn train_mnb(
    matrix: &[SparseVector],
    labels: &[Label],
    alpha: f64,
) -> Result<MnbModel, ClassifierError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(ClassifierError::NonPositiveAlpha(alpha));
    }
    let first = matrix.first().ok_or(ClassifierError::EmptyMatrix)?;
    if matrix.len() != labels.len() {
        return Err(ClassifierError::LengthMismatch {
            rows: matrix.len(),
            labels: labels.len(),
        });
    }
    let vocab_size = first.dimension();
    let mut doc_counts = [0usize; 2];
    let mut term_weight = [vec![0.0f64; vocab_size], vec![0.0f64; vocab_size]];
    for (row, &label) in matrix.iter().zip(labels) {
        if row.dimension() != vocab_size {
            return Err(VectorError::DimensionMismatch {
                expected: vocab_size,
                actual: row.dimension(),
            }
            .into());
        }
        let c = label.index();
        doc_counts[c] += 1;
        for &(t, w) in row.entries() {
            if w < 0.0 {
                return Err(ClassifierError::NegativeWeight { index: t, weight: w });
            }
            term_weight[c][t] += w;
        }
    }
    if doc_counts.contains(&0) {
        return Err(ClassifierError::SingleClassCorpus);
    }

    let n = matrix.len() as f64;
    let class_log_prior = doc_counts.map(|nc| (nc as f64 / n).ln());
    let feature_log_prob = term_weight.map(|weights| {
        let denominator = weights.iter().sum::<f64>() + alpha * vocab_size as f64;
        weights
            .iter()
            .map(|&w| ((w + alpha) / denominator).ln())
            .collect()
    });
    Ok(MnbModel {
        alpha,
        class_log_prior,
        feature_log_prob,
    })
}

/// Per-class log joint `ln P(c) + Σ_t x[t]·ln P(t|c)`.
pub fn mnb_log_joint(model: &MnbModel, vec: &SparseVector) -> Result<[f64; 2], VectorError> {
    if vec.dimension() != model.vocab_size() {
        return Err(VectorError::DimensionMismatch {
            expected: model.vocab_size(),
            actual: vec.dimension(),
        });
    }
    let mut scores = model.class_log_prior;
    for (c, score) in scores.iter_mut().enumerate() {
        let row = &model.feature_log_prob[c];
        *score += vec.entries().iter().map(|&(t, w)| w * row[t]).sum::<f64>();
    }
    Ok(scores)
}

/// Relative tolerance under which two log joints count as tied.
///
/// Mathematically equal joints can differ in the last bits after being
/// summed from different terms; such ties resolve to [`Label::NonBullying`].
pub const TIE_TOLERANCE: f64 = 1e-12;

pub fn decide(scores: [f64; 2]) -> Label {
    let scale = 1.0f64.max(scores[0].abs()).max(scores[1].abs());
    if scores[1] - scores[0] > TIE_TOLERANCE * scale {
        Label::Bullying
    } else {
        Label::NonBullying
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// vocab [bad, day, good]; class 0 = "good day", class 1 = "bad day".
    fn toy() -> MnbModel {
        let matrix = [
            SparseVector::from_dense(&[0.0, 1.0, 1.0]).unwrap(),
            SparseVector::from_dense(&[1.0, 1.0, 0.0]).unwrap(),
        ];
        train_mnb(&matrix, &[Label::NonBullying, Label::Bullying], 1.0).unwrap()
    }

    fn assert_close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn smoothing_formula_on_toy_corpus() {
        let model = toy();
        let p0: Vec<f64> = model.feature_log_prob(Label::NonBullying).iter().map(|l| l.exp()).collect();
        let p1: Vec<f64> = model.feature_log_prob(Label::Bullying).iter().map(|l| l.exp()).collect();
        for (got, want) in p0.iter().zip([0.2, 0.4, 0.4]) {
            assert_close(*got, want);
        }
        for (got, want) in p1.iter().zip([0.4, 0.4, 0.2]) {
            assert_close(*got, want);
        }
        assert_close(model.class_log_prior()[0].exp(), 0.5);
        assert_close(model.class_log_prior()[1].exp(), 0.5);
    }

    #[test]
    fn rows_are_normalized() {
        let model = toy();
        for label in Label::ALL {
            let s: f64 = model.feature_log_prob(label).iter().map(|l| l.exp()).sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn bad_scores_higher_for_bullying() {
        let model = toy();
        let scores = mnb_log_joint(&model, &SparseVector::from_entries(3, [(0, 1.0)]).unwrap()).unwrap();
        assert_close(scores[1] - scores[0], std::f64::consts::LN_2);
        assert_eq!(decide(scores), Label::Bullying);
    }

    #[test]
    fn empty_vector_scores_are_priors() {
        let model = toy();
        assert_eq!(mnb_log_joint(&model, &SparseVector::zeros(3)).unwrap(), *model.class_log_prior());
        // equal priors tie, ties deliver
        assert_eq!(decide(*model.class_log_prior()), Label::NonBullying);
    }

    #[test]
    fn training_errors() {
        let row = SparseVector::from_dense(&[1.0]).unwrap();
        assert_eq!(
            train_mnb(&[row.clone(), row.clone()], &[Label::NonBullying; 2], 1.0),
            Err(ClassifierError::SingleClassCorpus)
        );
        assert_eq!(
            train_mnb(std::slice::from_ref(&row), &[Label::NonBullying], 0.0),
            Err(ClassifierError::NonPositiveAlpha(0.0))
        );
        assert_eq!(train_mnb(&[], &[], 1.0), Err(ClassifierError::EmptyMatrix));
        assert!(matches!(
            train_mnb(&[row], &[], 1.0),
            Err(ClassifierError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn dimension_checked_at_scoring() {
        assert!(mnb_log_joint(&toy(), &SparseVector::zeros(4)).is_err());
    }

    #[test]
    fn from_parts_rejects_unnormalized_rows() {
        let model = toy();
        let mut rows = [model.feature_log_prob(Label::NonBullying).to_vec(), model.feature_log_prob(Label::Bullying).to_vec()];
        assert!(MnbModel::from_parts(1.0, *model.class_log_prior(), rows.clone()).is_ok());
        rows[1][0] += 0.1;
        assert!(MnbModel::from_parts(1.0, *model.class_log_prior(), rows).is_err());
    }
}
