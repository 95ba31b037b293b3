//! Message moderation engine.
//!
//! The crate covers the offline half of the moderation gateway: loading and
//! cleaning labeled corpora, turning text into TF-IDF weighted bag-of-words
//! vectors, training a multinomial naive Bayes or a hinge-loss linear SVM,
//! evaluating the result and persisting the trained pipeline so that the
//! relay service can load it.
//!
//! ```
//! use sentinel_core::corpus::{Corpus, LabeledDocument, Label};
//! use sentinel_core::classifiers::{train_pipeline, Hyperparameters, Variant};
//! use sentinel_core::textpipe::PipelineConfig;
//!
//! let corpus = Corpus::new(vec![
//!     LabeledDocument::new("thanks for fixing the citation", Label::NonBullying).unwrap(),
//!     LabeledDocument::new("you are a worthless idiot", Label::Bullying).unwrap(),
//! ]);
//! let pipeline = train_pipeline(
//!     &corpus,
//!     Variant::Mnb,
//!     PipelineConfig::default(),
//!     &Hyperparameters::default(),
//! )
//! .unwrap();
//! assert_eq!(pipeline.predict("idiot").label, Label::Bullying);
//! ```

pub mod classifiers;
pub mod corpus;
pub mod evaluate;
pub mod modelstore;
pub mod synth;
pub mod textpipe;
pub mod vectorspace;

pub use classifiers::{Prediction, TrainedPipeline, Variant};
pub use corpus::{Corpus, Label, LabeledDocument};
