//! The two moderation classifiers and the pipeline that feeds them.
//!
//! * [`mnb`]: multinomial naive Bayes with additive (Laplace) smoothing,
//!   scored in log space.
//! * [`svm`]: linear SVM fitted by per-sample SGD on the L2-regularized
//!   hinge loss.
//! * [`pipeline`]: preprocessing, vocabulary, TF-IDF and one of the models
//!   bundled as a [`TrainedPipeline`].

pub mod mnb;
pub mod pipeline;
pub mod svm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vectorspace::VectorError;

pub use mnb::{mnb_log_joint, train_mnb, MnbModel};
pub use pipeline::{train_pipeline, Features, Hyperparameters, Model, Prediction, TrainedPipeline, TrainingInfo};
pub use svm::{decision_function, train_svm_sgd, SvmHyper, SvmModel};

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("training data contains a single class")]
    SingleClassCorpus,
    #[error("smoothing alpha must be positive and finite, got {0}")]
    NonPositiveAlpha(f64),
    #[error("bad hyperparameter: {0}")]
    BadHyperparameter(String),
    #[error("training matrix is empty")]
    EmptyMatrix,
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("negative feature weight {weight} at index {index}")]
    NegativeWeight { index: usize, weight: f64 },
    #[error("model parameters are inconsistent: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Vector(#[from] VectorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Mnb,
    Svm,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Mnb => "mnb",
            Variant::Svm => "svm",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mnb" => Ok(Variant::Mnb),
            "svm" => Ok(Variant::Svm),
            other => Err(format!("unknown variant `{other}` (expected mnb or svm)")),
        }
    }
}
