//! JSON persistence for [`TrainedPipeline`].
//!
//! A model file is one UTF-8 JSON object:
//!
//! ```text
//! format_version   1
//! variant          "mnb" | "svm"
//! features         "tfidf" | "counts"
//! pipeline_config  { lowercase, stopwords: [..], stemming, min_token_length }
//! vocabulary       [token, ..]                      (index order)
//! idf              { weights: [..], n_docs } | null
//! mnb              { alpha, class_log_prior: [p0, p1],
//!                    feature_log_prob: [[..], [..]] }         (variant mnb)
//! svm              { weights: [..], bias, epochs_run,
//!                    hyper: { lambda, max_epochs, seed, tol, eta0 } } (variant svm)
//! training         { n_docs, class_counts: [n0, n1], seed, trained_at }
//! ```
//!
//! Floats are written in shortest round-trip form and parsed with correct
//! rounding, so every parameter survives save/load bit for bit. Files are
//! written to a temporary sibling and renamed into place. Unknown keys are
//! ignored on load.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::svm::SvmHyper;
use crate::classifiers::{Features, MnbModel, Model, SvmModel, TrainedPipeline, TrainingInfo, Variant};
use crate::textpipe::PipelineConfig;
use crate::vectorspace::{IdfModel, Vocabulary};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported model format version {0} (this build reads version {FORMAT_VERSION})")]
    UnsupportedVersion(u64),
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfSection {
    pub weights: Vec<f64>,
    pub n_docs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnbSection {
    pub alpha: f64,
    pub class_log_prior: [f64; 2],
    pub feature_log_prob: [Vec<f64>; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmSection {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub epochs_run: usize,
    pub hyper: SvmHyper,
}

/// On-disk form of a trained pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub variant: Variant,
    pub features: Features,
    pub pipeline_config: PipelineConfig,
    pub vocabulary: Vec<String>,
    pub idf: Option<IdfSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mnb: Option<MnbSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svm: Option<SvmSection>,
    pub training: TrainingInfo,
}

impl ModelDocument {
    pub fn from_pipeline(pipeline: &TrainedPipeline) -> Self {
        let (mnb, svm) = match pipeline.model() {
            Model::Mnb(m) => (
                Some(MnbSection {
                    alpha: m.alpha(),
                    class_log_prior: *m.class_log_prior(),
                    feature_log_prob: [
                        m.feature_log_prob(crate::Label::NonBullying).to_vec(),
                        m.feature_log_prob(crate::Label::Bullying).to_vec(),
                    ],
                }),
                None,
            ),
            Model::Svm(m) => (
                None,
                Some(SvmSection {
                    weights: m.weights().to_vec(),
                    bias: m.bias(),
                    epochs_run: m.epochs_run(),
                    hyper: *m.hyper(),
                }),
            ),
        };
        ModelDocument {
            format_version: FORMAT_VERSION,
            variant: pipeline.variant(),
            features: pipeline.features(),
            pipeline_config: pipeline.config().clone(),
            vocabulary: pipeline.vocabulary().tokens().to_vec(),
            idf: pipeline.idf().map(|idf| IdfSection {
                weights: idf.weights().to_vec(),
                n_docs: idf.n_docs(),
            }),
            mnb,
            svm,
            training: pipeline.training().clone(),
        }
    }

    /// Validates every cross-field invariant and builds the pipeline.
    pub fn into_pipeline(self) -> Result<TrainedPipeline, StoreError> {
        let corrupt = |msg: String| StoreError::CorruptModel(msg);
        if self.format_version != FORMAT_VERSION {
            return Err(StoreError::UnsupportedVersion(self.format_version as u64));
        }
        let v = self.vocabulary.len();
        let vocabulary = Vocabulary::from_sorted_tokens(self.vocabulary).map_err(|e| corrupt(e.to_string()))?;

        let idf = match (self.features, self.idf) {
            (Features::Tfidf, Some(section)) => {
                if section.weights.len() != v {
                    return Err(corrupt(format!("idf has {} weights for {v} tokens", section.weights.len())));
                }
                Some(IdfModel::from_parts(section.weights, section.n_docs).map_err(|e| corrupt(e.to_string()))?)
            }
            (Features::Counts, None) => None,
            (Features::Tfidf, None) => return Err(corrupt("tfidf features but no idf section".into())),
            (Features::Counts, Some(_)) => return Err(corrupt("count features but an idf section".into())),
        };

        let model = match (self.variant, self.mnb, self.svm) {
            (Variant::Mnb, Some(m), None) => {
                for row in &m.feature_log_prob {
                    if row.len() != v {
                        return Err(corrupt(format!("feature_log_prob row has {} entries for {v} tokens", row.len())));
                    }
                }
                Model::Mnb(
                    MnbModel::from_parts(m.alpha, m.class_log_prior, m.feature_log_prob)
                        .map_err(|e| corrupt(e.to_string()))?,
                )
            }
            (Variant::Svm, None, Some(s)) => {
                if s.weights.len() != v {
                    return Err(corrupt(format!("svm has {} weights for {v} tokens", s.weights.len())));
                }
                Model::Svm(
                    SvmModel::from_parts(s.weights, s.bias, s.hyper, s.epochs_run)
                        .map_err(|e| corrupt(e.to_string()))?,
                )
            }
            (variant, _, _) => {
                return Err(corrupt(format!("parameters do not match variant {variant}")));
            }
        };

        TrainedPipeline::from_parts(self.pipeline_config, vocabulary, idf, model, self.training)
            .map_err(|e| corrupt(e.to_string()))
    }
}

pub fn to_json(pipeline: &TrainedPipeline) -> String {
    serde_json::to_string(&ModelDocument::from_pipeline(pipeline)).expect("model document serializes")
}

pub fn from_json(text: &str) -> Result<TrainedPipeline, StoreError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| StoreError::CorruptModel(e.to_string()))?;
    match value.get("format_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == FORMAT_VERSION as u64 => {}
        Some(v) => return Err(StoreError::UnsupportedVersion(v)),
        None => return Err(StoreError::CorruptModel("missing or non-integer format_version".into())),
    }
    let doc: ModelDocument = serde_json::from_value(value).map_err(|e| StoreError::CorruptModel(e.to_string()))?;
    doc.into_pipeline()
}

/// Writes atomically: the target either holds the full document or is untouched.
pub fn save(pipeline: &TrainedPipeline, path: impl AsRef<Path>) -> Result<(), StoreError> {
    let path = path.as_ref();
    let io_err = |source: std::io::Error| StoreError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new()
        .prefix(".model-")
        .suffix(".json.tmp")
        .tempfile_in(dir)
        .map_err(io_err)?;
    tmp.write_all(to_json(pipeline).as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<TrainedPipeline, StoreError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_json(&text)
}
