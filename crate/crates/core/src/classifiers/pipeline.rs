use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::mnb::{self, MnbModel};
use super::svm::{self, SvmHyper, SvmModel};
use super::{ClassifierError, Variant};
use crate::corpus::{Corpus, Label};
use crate::textpipe::{preprocess, PipelineConfig, TokenList};
use crate::vectorspace::{count_transform, fit_idf, fit_vocabulary, tfidf_transform, IdfModel, SparseVector, Vocabulary};

/// Feature weighting fed to the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Features {
    #[default]
    Tfidf,
    Counts,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    /// Naive Bayes smoothing.
    pub mnb_alpha: f64,
    pub svm: SvmHyper,
    pub features: Features,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            mnb_alpha: mnb::DEFAULT_ALPHA,
            svm: SvmHyper::default(),
            features: Features::Tfidf,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Mnb(MnbModel),
    Svm(SvmModel),
}

impl Model {
    pub fn variant(&self) -> Variant {
        match self {
            Model::Mnb(_) => Variant::Mnb,
            Model::Svm(_) => Variant::Svm,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Model::Mnb(m) => m.vocab_size(),
            Model::Svm(m) => m.dimension(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    pub label: Label,
    /// Naive Bayes: per-class log joints. SVM: `[0, margin]`.
    pub scores: [f64; 2],
    /// `scores[1] - scores[0]`: the log-joint gap or the SVM margin.
    pub score: f64,
}

/// Provenance recorded at training time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingInfo {
    pub n_docs: usize,
    pub class_counts: [usize; 2],
    /// SGD shuffle seed; absent for naive Bayes.
    pub seed: Option<u64>,
    pub trained_at: DateTime<Utc>,
}

/// Preprocessing, vocabulary, optional IDF and a fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedPipeline {
    config: PipelineConfig,
    vocabulary: Vocabulary,
    idf: Option<IdfModel>,
    model: Model,
    training: TrainingInfo,
}

impl TrainedPipeline {
    pub fn from_parts(
        config: PipelineConfig,
        vocabulary: Vocabulary,
        idf: Option<IdfModel>,
        model: Model,
        training: TrainingInfo,
    ) -> Result<Self, ClassifierError> {
        if model.dimension() != vocabulary.len() {
            return Err(ClassifierError::InvalidModel(format!(
                "model dimension {} does not match vocabulary size {}",
                model.dimension(),
                vocabulary.len()
            )));
        }
        if let Some(idf) = &idf {
            if idf.dimension() != vocabulary.len() {
                return Err(ClassifierError::InvalidModel(format!(
                    "idf length {} does not match vocabulary size {}",
                    idf.dimension(),
                    vocabulary.len()
                )));
            }
        }
        config
            .validate()
            .map_err(|e| ClassifierError::InvalidModel(e.to_string()))?;
        Ok(TrainedPipeline {
            config,
            vocabulary,
            idf,
            model,
            training,
        })
    }

    pub fn training(&self) -> &TrainingInfo {
        &self.training
    }

    /// Overrides the recorded training time, e.g. for reproducible files.
    pub fn with_trained_at(mut self, at: DateTime<Utc>) -> Self {
        self.training.trained_at = at;
        self
    }

    /// Equality of everything that influences predictions.
    pub fn same_parameters(&self, other: &TrainedPipeline) -> bool {
        self.config == other.config
            && self.vocabulary == other.vocabulary
            && self.idf == other.idf
            && self.model == other.model
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn idf(&self) -> Option<&IdfModel> {
        self.idf.as_ref()
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn variant(&self) -> Variant {
        self.model.variant()
    }

    pub fn features(&self) -> Features {
        if self.idf.is_some() {
            Features::Tfidf
        } else {
            Features::Counts
        }
    }

    pub fn label_name(label: Label) -> &'static str {
        label.name()
    }

    /// The feature vector the model sees for `text`.
    pub fn vectorize(&self, text: &str) -> SparseVector {
        let counts = count_transform(&preprocess(text, &self.config), &self.vocabulary);
        match &self.idf {
            // dimensions agree by construction
            Some(idf) => tfidf_transform(&counts, idf).expect("idf dimension matches vocabulary"),
            None => counts,
        }
    }

    pub fn predict(&self, text: &str) -> Prediction {
        self.predict_vector(&self.vectorize(text))
            .expect("vectorize yields vocabulary-sized vectors")
    }

    pub fn predict_vector(&self, vec: &SparseVector) -> Result<Prediction, ClassifierError> {
        Ok(match &self.model {
            Model::Mnb(m) => {
                let scores = mnb::mnb_log_joint(m, vec)?;
                Prediction {
                    label: mnb::decide(scores),
                    scores,
                    score: scores[1] - scores[0],
                }
            }
            Model::Svm(m) => {
                let margin = svm::decision_function(m, vec)?;
                Prediction {
                    label: svm::decide(margin),
                    scores: [0.0, margin],
                    score: margin,
                }
            }
        })
    }
}

/// Fits vocabulary and IDF on `train`, then the chosen classifier.
pub fn train_pipeline(
    train: &Corpus,
    variant: Variant,
    config: PipelineConfig,
    hyper: &Hyperparameters,
) -> Result<TrainedPipeline, ClassifierError> {
    config
        .validate()
        .map_err(|e| ClassifierError::BadHyperparameter(e.to_string()))?;
    if train.class_counts().contains(&0) {
        return Err(ClassifierError::SingleClassCorpus);
    }
    let tokens: Vec<TokenList> = train.texts().map(|t| preprocess(t, &config)).collect();
    let vocabulary = fit_vocabulary(&tokens)?;
    let counts: Vec<SparseVector> = tokens.iter().map(|t| count_transform(t, &vocabulary)).collect();
    let (idf, features) = match hyper.features {
        Features::Tfidf => {
            let idf = fit_idf(&counts)?;
            let weighted = counts
                .iter()
                .map(|c| tfidf_transform(c, &idf))
                .collect::<Result<Vec<_>, _>>()?;
            (Some(idf), weighted)
        }
        Features::Counts => (None, counts),
    };
    let labels = train.labels();
    let model = match variant {
        Variant::Mnb => Model::Mnb(mnb::train_mnb(&features, &labels, hyper.mnb_alpha)?),
        Variant::Svm => Model::Svm(svm::train_svm_sgd(&features, &labels, &hyper.svm)?),
    };
    let training = TrainingInfo {
        n_docs: train.len(),
        class_counts: train.class_counts(),
        seed: matches!(variant, Variant::Svm).then_some(hyper.svm.seed),
        trained_at: Utc::now(),
    };
    TrainedPipeline::from_parts(config, vocabulary, idf, model, training)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LabeledDocument;

    fn corpus(rows: &[(&str, Label)]) -> Corpus {
        rows.iter().map(|(t, l)| LabeledDocument::new(*t, *l).unwrap()).collect()
    }

    fn toy() -> Corpus {
        corpus(&[("good day", Label::NonBullying), ("bad day", Label::Bullying)])
    }

    #[test]
    fn counts_pipeline_reproduces_toy_model() {
        let hyper = Hyperparameters { features: Features::Counts, ..Default::default() };
        let p = train_pipeline(&toy(), Variant::Mnb, PipelineConfig::bare(), &hyper).unwrap();
        assert_eq!(p.vocabulary().tokens(), ["bad", "day", "good"]);
        let out = p.predict("bad");
        assert_eq!(out.label, Label::Bullying);
        assert!((out.score - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(p.idf().is_none());
    }

    #[test]
    fn tfidf_pipeline_predicts_bad_as_bullying() {
        let p = train_pipeline(&toy(), Variant::Mnb, PipelineConfig::bare(), &Hyperparameters::default()).unwrap();
        assert_eq!(p.predict("bad").label, Label::Bullying);
        assert_eq!(p.predict("good").label, Label::NonBullying);
        assert_eq!(p.features(), Features::Tfidf);
    }

    #[test]
    fn stopword_only_text_uses_priors() {
        let c = corpus(&[
            ("nice edit", Label::NonBullying),
            ("thanks for the edit", Label::NonBullying),
            ("idiot", Label::Bullying),
        ]);
        let p = train_pipeline(&c, Variant::Mnb, PipelineConfig::default(), &Hyperparameters::default()).unwrap();
        let out = p.predict("the and of");
        let Model::Mnb(m) = p.model() else { unreachable!() };
        assert_eq!(out.scores, *m.class_log_prior());
        assert_eq!(out.label, Label::NonBullying);
        assert_eq!(p.predict("the and of"), out);
    }

    #[test]
    fn svm_pipeline_is_deterministic() {
        let c = corpus(&[
            ("thanks for the citation", Label::NonBullying),
            ("please add a source", Label::NonBullying),
            ("you are an idiot", Label::Bullying),
            ("shut up idiot", Label::Bullying),
        ]);
        let a = train_pipeline(&c, Variant::Svm, PipelineConfig::default(), &Hyperparameters::default()).unwrap();
        let b = train_pipeline(&c, Variant::Svm, PipelineConfig::default(), &Hyperparameters::default()).unwrap();
        assert!(a.same_parameters(&b));
        assert_eq!(a.training().seed, Some(42));
        assert_eq!(a.predict("idiot").label, Label::Bullying);
        let out = a.predict("");
        let Model::Svm(m) = a.model() else { unreachable!() };
        assert_eq!(out.score, m.bias());
    }

    #[test]
    fn single_class_rejected() {
        let c = corpus(&[("a", Label::Bullying), ("b", Label::Bullying)]);
        for variant in [Variant::Mnb, Variant::Svm] {
            assert_eq!(
                train_pipeline(&c, variant, PipelineConfig::bare(), &Hyperparameters::default()),
                Err(ClassifierError::SingleClassCorpus)
            );
        }
    }

    #[test]
    fn dimension_mismatch_rejected_at_assembly() {
        let p = train_pipeline(&toy(), Variant::Mnb, PipelineConfig::bare(), &Hyperparameters::default()).unwrap();
        let small = Vocabulary::from_sorted_tokens(vec!["a".into()]).unwrap();
        let info = p.training().clone();
        assert!(TrainedPipeline::from_parts(p.config().clone(), small, None, p.model().clone(), info).is_err());
    }
}
