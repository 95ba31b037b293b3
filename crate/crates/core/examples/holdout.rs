//! Trains both classifiers on a held-out split of the stand-in corpus and
//! prints their reports.
//!
//! cargo run --release -p sentinel-core --example holdout -- [SEED]

use sentinel_core::classifiers::{train_pipeline, Hyperparameters};
use sentinel_core::corpus::{split, SplitSpec};
use sentinel_core::evaluate::evaluate_pipeline;
use sentinel_core::synth::{self, SynthConfig};
use sentinel_core::textpipe::PipelineConfig;
use sentinel_core::Variant;

fn main() {
    let seed: u64 = std::env::args().nth(1).map_or(7, |s| s.parse().expect("SEED must be an integer"));
    let corpus = synth::generate(16_000, seed, &SynthConfig::default());
    let (train, test) = split(&corpus, SplitSpec::new(0.25, 42).unwrap()).unwrap();
    for variant in [Variant::Mnb, Variant::Svm] {
        let start = std::time::Instant::now();
        let p = train_pipeline(&train, variant, PipelineConfig::default(), &Hyperparameters::default()).unwrap();
        let report = evaluate_pipeline(&p, &test).unwrap();
        println!("== {variant} ({:.2?})\n{}", start.elapsed(), report.render());
    }
}
