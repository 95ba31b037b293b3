use std::sync::Arc;
use std::time::Instant;

use sentinel_core::modelstore::FORMAT_VERSION;
use sentinel_core::{Label, TrainedPipeline};
use serde::Serialize;

/// One screening decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Screened {
    pub label: Label,
    pub scores: [f64; 2],
    pub score: f64,
    pub elapsed_us: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelInfo {
    pub model_variant: String,
    pub vocab_size: usize,
    pub format_version: u32,
}

/// Decides whether a message body may be delivered.
pub trait Screen: Send + Sync {
    fn screen(&self, text: &str) -> Screened;
    fn info(&self) -> ModelInfo;
}

/// Screens with a trained pipeline. Shared read-only across requests.
pub struct PipelineScreen {
    pipeline: Arc<TrainedPipeline>,
}

impl PipelineScreen {
    pub fn new(pipeline: TrainedPipeline) -> Self {
        PipelineScreen {
            pipeline: Arc::new(pipeline),
        }
    }

    pub fn pipeline(&self) -> &TrainedPipeline {
        &self.pipeline
    }
}

impl Screen for PipelineScreen {
    fn screen(&self, text: &str) -> Screened {
        let start = Instant::now();
        let p = self.pipeline.predict(text);
        Screened {
            label: p.label,
            scores: p.scores,
            score: p.score,
            elapsed_us: start.elapsed().as_micros() as u64,
        }
    }

    fn info(&self) -> ModelInfo {
        ModelInfo {
            model_variant: self.pipeline.variant().to_string(),
            vocab_size: self.pipeline.vocabulary().len(),
            format_version: FORMAT_VERSION,
        }
    }
}

/// Delivers everything; the baseline for overhead measurements.
pub struct PassThrough;

impl Screen for PassThrough {
    fn screen(&self, _text: &str) -> Screened {
        Screened {
            label: Label::NonBullying,
            scores: [0.0, 0.0],
            score: 0.0,
            elapsed_us: 0,
        }
    }

    fn info(&self) -> ModelInfo {
        ModelInfo {
            model_variant: "passthrough".into(),
            vocab_size: 0,
            format_version: FORMAT_VERSION,
        }
    }
}
