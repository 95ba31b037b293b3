//! Property checks that run the production pipeline against the references.
//!
//! Each check returns an [`Outcome`] rather than panicking so the same code
//! backs both ordinary integration tests and the acceptance report.

use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sentinel_core::classifiers::mnb::{self, train_mnb};
use sentinel_core::classifiers::svm::{decision_function, train_svm_sgd, train_svm_sgd_traced, SvmHyper};
use sentinel_core::classifiers::{train_pipeline, Hyperparameters, Model, TrainedPipeline};
use sentinel_core::evaluate::{confusion, report};
use sentinel_core::modelstore;
use sentinel_core::synth::{self, SynthConfig};
use sentinel_core::textpipe::PipelineConfig;
use sentinel_core::vectorspace::{fit_idf, tfidf_transform, SparseVector};
use sentinel_core::{Label, Variant};

use crate::{exact_metrics, hinge_objective, rational, tfidf_reference, to_f64, BigRational, ExactMnb};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Outcome {
    fn new(passed: bool, detail: String, start: Instant) -> Self {
        Outcome {
            passed,
            detail,
            elapsed: start.elapsed(),
        }
    }
}

fn labels_of(bits: &[u8]) -> Vec<Label> {
    bits.iter().map(|&b| Label::try_from(b).expect("0/1 label")).collect()
}

fn dense(row: &[u32]) -> SparseVector {
    let values: Vec<f64> = row.iter().map(|&c| f64::from(c)).collect();
    SparseVector::from_dense(&values).expect("finite counts")
}

pub const MNB_MAX_VOCAB: usize = 5;
pub const MNB_MAX_DOCS: usize = 4;
pub const MNB_MAX_COUNT: u32 = 3;
/// Shapes with at most this many cells are enumerated completely.
pub const MNB_EXHAUSTIVE_CELLS: usize = 6;
pub const MNB_SAMPLES_PER_SHAPE: usize = 300;
pub const MNB_TOLERANCE: f64 = 1e-9;

/// Calls `visit(counts, labels)` for every corpus in the naive Bayes family:
/// all `docs × vocab` count matrices with entries `0..=3` when the shape has
/// at most [`MNB_EXHAUSTIVE_CELLS`] cells, a seeded sample of matrices for
/// the larger shapes, and for each matrix every labeling with both classes.
pub fn for_each_mnb_corpus(seed: u64, mut visit: impl FnMut(&[Vec<u32>], &[u8])) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = MNB_MAX_COUNT + 1;
    for n in 2..=MNB_MAX_DOCS {
        for v in 1..=MNB_MAX_VOCAB {
            let cells = n * v;
            let matrices: Vec<Vec<Vec<u32>>> = if cells <= MNB_EXHAUSTIVE_CELLS {
                (0..base.pow(cells as u32))
                    .map(|code| {
                        let mut code = code;
                        (0..n)
                            .map(|_| {
                                (0..v)
                                    .map(|_| {
                                        let digit = code % base;
                                        code /= base;
                                        digit
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            } else {
                (0..MNB_SAMPLES_PER_SHAPE)
                    .map(|_| (0..n).map(|_| (0..v).map(|_| rng.gen_range(0..base)).collect()).collect())
                    .collect()
            };
            for counts in &matrices {
                for mask in 1..(1u32 << n) - 1 {
                    let labels: Vec<u8> = (0..n).map(|d| ((mask >> d) & 1) as u8).collect();
                    visit(counts, &labels);
                }
            }
        }
    }
}

/// Trained naive Bayes log joints against exact rational evaluation.
///
/// Probes are the training documents, the empty document, each unit vector
/// and the all-`MNB_MAX_COUNT` document.
pub fn mnb_oracle_equivalence(alphas: &[(i64, i64)]) -> Outcome {
    let start = Instant::now();
    let mut corpora = 0u64;
    let mut probes = 0u64;
    let mut worst = 0.0f64;
    let mut mismatched: Vec<String> = Vec::new();
    for &(num, den) in alphas {
        let alpha_exact = rational(num, den);
        let alpha = num as f64 / den as f64;
        for_each_mnb_corpus(0x5eed, |counts, labels| {
            corpora += 1;
            let matrix: Vec<SparseVector> = counts.iter().map(|r| dense(r)).collect();
            let model = train_mnb(&matrix, &labels_of(labels), alpha).expect("valid corpus");
            let exact = ExactMnb::fit(counts, labels, &alpha_exact);
            let v = counts[0].len();
            let mut probe_rows: Vec<Vec<u32>> = counts.to_vec();
            probe_rows.push(vec![0; v]);
            probe_rows.extend((0..v).map(|t| (0..v).map(|i| u32::from(i == t)).collect()));
            probe_rows.push(vec![MNB_MAX_COUNT; v]);
            for probe in &probe_rows {
                probes += 1;
                let got = mnb::mnb_log_joint(&model, &dense(probe)).expect("dimension");
                let want = exact.log_joint(probe);
                for c in 0..2 {
                    worst = worst.max((got[c] - want[c]).abs());
                }
                let predicted = mnb::decide(got).index() as u8;
                if predicted != exact.predict(probe) && mismatched.len() < 5 {
                    mismatched.push(format!("counts={counts:?} labels={labels:?} probe={probe:?}"));
                }
            }
        });
    }
    let passed = worst <= MNB_TOLERANCE && mismatched.is_empty();
    let mut detail = format!("{corpora} corpora, {probes} probes, max |log-joint error| {worst:.3e}");
    if !mismatched.is_empty() {
        detail.push_str(&format!("; prediction mismatches: {}", mismatched.join(" | ")));
    }
    Outcome::new(passed, detail, start)
}

pub const TFIDF_TOLERANCE: f64 = 1e-9;

/// `fit_idf` + `tfidf_transform` against the direct formula on random count
/// matrices, plus the unit-norm property of every non-zero row.
pub fn tfidf_formula_check(matrices: usize, seed: u64) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_value = 0.0f64;
    let mut worst_norm = 0.0f64;
    let mut rows_checked = 0usize;
    for _ in 0..matrices {
        let n = rng.gen_range(1..=12);
        let v = rng.gen_range(1..=15);
        let density = rng.gen_range(0.1..0.9);
        let counts: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..v)
                    .map(|_| if rng.gen_bool(density) { f64::from(rng.gen_range(1..=6u32)) } else { 0.0 })
                    .collect()
            })
            .collect();
        let sparse: Vec<SparseVector> = counts.iter().map(|r| SparseVector::from_dense(r).unwrap()).collect();
        let idf = fit_idf(&sparse).expect("non-empty");
        let (want_idf, want_rows) = tfidf_reference(&counts);
        for (a, b) in idf.weights().iter().zip(&want_idf) {
            worst_value = worst_value.max((a - b).abs());
        }
        for (row, want) in sparse.iter().zip(&want_rows) {
            rows_checked += 1;
            let got = tfidf_transform(row, &idf).expect("dimension").to_dense();
            for (a, b) in got.iter().zip(want) {
                worst_value = worst_value.max((a - b).abs());
            }
            let norm = got.iter().map(|x| x * x).sum::<f64>().sqrt();
            if got.iter().any(|&x| x != 0.0) {
                worst_norm = worst_norm.max((norm - 1.0).abs());
            }
        }
    }
    Outcome::new(
        worst_value <= TFIDF_TOLERANCE && worst_norm <= TFIDF_TOLERANCE,
        format!("{matrices} matrices, {rows_checked} rows, max |Δ| {worst_value:.3e}, max |‖x‖−1| {worst_norm:.3e}"),
        start,
    )
}

pub const SVM_EPOCHS: usize = 50;
pub const SVM_MONOTONE_SLACK: f64 = 1e-6;

/// Twenty seeded 2-D points split by the line `x − y/2 + 1/10 = 0`, none
/// closer than 0.15 to it, ten per class.
pub fn separable_points(seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut per_class = [0usize; 2];
    let norm = (1.0f64 + 0.25).sqrt();
    while xs.len() < 20 {
        let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let f: f64 = p[0] - 0.5 * p[1] + 0.1;
        if f.abs() / norm < 0.15 {
            continue;
        }
        let y = u8::from(f > 0.0);
        if per_class[y as usize] == 10 {
            continue;
        }
        per_class[y as usize] += 1;
        xs.push(p.to_vec());
        ys.push(y);
    }
    (xs, ys)
}

/// Hinge SGD on [`separable_points`]: full training accuracy within
/// [`SVM_EPOCHS`], a non-increasing per-epoch objective, an objective trace
/// matching the reference formula, and bit-identical reruns.
pub fn svm_convergence(seed: u64) -> Outcome {
    let start = Instant::now();
    let (xs, ys) = separable_points(seed);
    let matrix: Vec<SparseVector> = xs.iter().map(|r| SparseVector::from_dense(r).unwrap()).collect();
    let labels = labels_of(&ys);
    let hyper = SvmHyper {
        max_epochs: SVM_EPOCHS,
        ..SvmHyper::default()
    };
    let (model, trace) = train_svm_sgd_traced(&matrix, &labels, &hyper).expect("valid problem");
    let correct = matrix
        .iter()
        .zip(&labels)
        .filter(|(x, &l)| (decision_function(&model, x).unwrap() > 0.0) == (l == Label::Bullying))
        .count();
    let worst_rise = trace
        .objective
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let final_objective = *trace.objective.last().expect("at least one epoch");
    let reference = hinge_objective(model.weights(), model.bias(), hyper.lambda, &xs, &ys);
    let again = train_svm_sgd(&matrix, &labels, &hyper).unwrap();
    let bits = |m: &sentinel_core::classifiers::SvmModel| {
        let mut b: Vec<u64> = m.weights().iter().map(|w| w.to_bits()).collect();
        b.push(m.bias().to_bits());
        b
    };
    let identical = bits(&model) == bits(&again) && model.epochs_run() == again.epochs_run();
    let monotone = trace.objective.len() < 2 || worst_rise <= SVM_MONOTONE_SLACK;
    let passed = correct == 20
        && model.epochs_run() <= SVM_EPOCHS
        && monotone
        && (final_objective - reference).abs() <= 1e-12
        && identical;
    Outcome::new(
        passed,
        format!(
            "train accuracy {correct}/20 after {} epochs, max objective rise {worst_rise:.3e}, final objective {final_objective:.6} (reference {reference:.6}), rerun bit-identical {identical}",
            model.epochs_run()
        ),
        start,
    )
}

pub const WEIGHTED_F1_TOLERANCE: f64 = 1e-12;

/// Metric identities on random label/prediction pairs, checked against
/// exact fractions: accuracy is trace over total, `mse = 1 − accuracy` as
/// exact ratios with both floats correctly rounded, and weighted F1 equals
/// the support-weighted mean of per-class F1.
pub fn evaluation_identities(pairs: usize, seed: u64) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures: Vec<String> = Vec::new();
    let mut worst_f1 = 0.0f64;
    let mut float_complement_mismatch = 0usize;
    for case in 0..pairs {
        let len = rng.gen_range(1..=400);
        let positive = rng.gen_range(0.0..1.0);
        let flip = rng.gen_range(0.0..0.6);
        let y_true: Vec<u8> = (0..len).map(|_| u8::from(rng.gen_bool(positive))).collect();
        let y_pred: Vec<u8> = y_true.iter().map(|&y| if rng.gen_bool(flip) { 1 - y } else { y }).collect();
        let cm = confusion(&labels_of(&y_true), &labels_of(&y_pred)).unwrap();
        let r = report(&cm).unwrap();
        let exact = exact_metrics(&y_true, &y_pred);

        let trace = cm.cells[0][0] + cm.cells[1][1];
        let exact_error = rational(cm.errors() as i64, cm.total() as i64);
        let mut fail = |what: &str| {
            if failures.len() < 5 {
                failures.push(format!("case {case}: {what}"));
            }
        };
        if rational(trace as i64, cm.total() as i64) != exact.accuracy || r.accuracy != to_f64(&exact.accuracy) {
            fail("accuracy != trace/total");
        }
        if exact_error != BigRational::from_integer(1.into()) - &exact.accuracy || r.mse != to_f64(&exact.error_rate) {
            fail("mse != 1 - accuracy");
        }
        if r.mse != 1.0 - r.accuracy {
            float_complement_mismatch += 1;
        }
        for c in 0..2 {
            let m = &r.classes[c];
            if m.precision != to_f64(&exact.precision[c]) || m.recall != to_f64(&exact.recall[c]) {
                fail("per-class precision/recall");
            }
        }
        let recomposed = r.classes.iter().map(|m| m.f1 * m.support as f64).sum::<f64>() / r.total as f64;
        let err = (r.weighted_avg.f1 - recomposed)
            .abs()
            .max((r.weighted_avg.f1 - to_f64(&exact.weighted_f1)).abs());
        worst_f1 = worst_f1.max(err);
        if exact.weighted_f1.is_zero() != (r.weighted_avg.f1 == 0.0) {
            fail("weighted f1 zero mismatch");
        }
    }
    let passed = failures.is_empty() && worst_f1 <= WEIGHTED_F1_TOLERANCE;
    let mut detail = format!(
        "{pairs} pairs, max weighted-F1 recomposition error {worst_f1:.3e}, \
         float 1−accuracy differs from mse by one rounding in {float_complement_mismatch} cases"
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; failures: {}", failures.join(" | ")));
    }
    Outcome::new(passed, detail, start)
}

/// Every floating-point parameter of a pipeline, as raw bits, in a fixed order.
pub fn parameter_bits(pipeline: &TrainedPipeline) -> Vec<u64> {
    let mut bits: Vec<u64> = Vec::new();
    if let Some(idf) = pipeline.idf() {
        bits.extend(idf.weights().iter().map(|w| w.to_bits()));
    }
    match pipeline.model() {
        Model::Mnb(m) => {
            bits.push(m.alpha().to_bits());
            bits.extend(m.class_log_prior().iter().map(|w| w.to_bits()));
            for label in Label::ALL {
                bits.extend(m.feature_log_prob(label).iter().map(|w| w.to_bits()));
            }
        }
        Model::Svm(m) => {
            bits.extend(m.weights().iter().map(|w| w.to_bits()));
            bits.push(m.bias().to_bits());
            let h = m.hyper();
            bits.extend([h.lambda, h.tol, h.eta0].map(f64::to_bits));
        }
    }
    bits
}

pub const PROBE_TEXTS: usize = 1000;

/// Save/load through a real file for both variants: parameters bit-exact,
/// metadata equal, and identical predictions on a probe set.
pub fn model_round_trip(train_docs: usize, seed: u64) -> Outcome {
    let start = Instant::now();
    let corpus = synth::generate(train_docs, seed, &SynthConfig::default());
    let probes = synth::messages(PROBE_TEXTS, seed ^ 0xabcd);
    let dir = tempfile::tempdir().expect("temp dir");
    let mut notes = Vec::new();
    let mut passed = true;
    for variant in [Variant::Mnb, Variant::Svm] {
        let pipeline = train_pipeline(&corpus, variant, PipelineConfig::default(), &Hyperparameters::default())
            .expect("trainable corpus");
        let path = dir.path().join(format!("{variant}.json"));
        let loaded = modelstore::save(&pipeline, &path).and_then(|()| modelstore::load(&path));
        let Ok(loaded) = loaded else {
            passed = false;
            notes.push(format!("{variant}: {}", loaded.unwrap_err()));
            continue;
        };
        let bits_equal = parameter_bits(&pipeline) == parameter_bits(&loaded);
        let meta_equal = loaded == pipeline;
        let differing = probes
            .iter()
            .filter(|t| {
                let (a, b) = (pipeline.predict(t), loaded.predict(t));
                a.label != b.label || a.scores.map(f64::to_bits) != b.scores.map(f64::to_bits)
            })
            .count();
        passed &= bits_equal && meta_equal && differing == 0;
        notes.push(format!(
            "{variant}: {} parameters bit-exact {bits_equal}, metadata equal {meta_equal}, {differing}/{} probe predictions differ",
            parameter_bits(&pipeline).len(),
            probes.len()
        ));
    }
    Outcome::new(passed, notes.join("; "), start)
}
