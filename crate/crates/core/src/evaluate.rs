//! Confusion matrix, classification report and stratified k-fold
//! cross-validation for the binary moderation task.

use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{train_pipeline, ClassifierError, Hyperparameters, TrainedPipeline, Variant};
use crate::corpus::{Corpus, Label};
use crate::textpipe::PipelineConfig;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("label and prediction lists differ in length ({truth} vs {predicted})")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("need k >= 2 and at least k documents per class (k = {k}, class counts {counts:?})")]
    TooFewSamples { k: usize, counts: [usize; 2] },
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

/// Rows are true labels, columns predicted labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub cells: [[u64; 2]; 2],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        self.cells[0][0] + self.cells[1][1]
    }

    pub fn errors(&self) -> u64 {
        self.cells[0][1] + self.cells[1][0]
    }

    pub fn row_sum(&self, truth: Label) -> u64 {
        self.cells[truth.index()].iter().sum()
    }

    pub fn column_sum(&self, predicted: Label) -> u64 {
        self.cells[0][predicted.index()] + self.cells[1][predicted.index()]
    }
}

impl fmt::Display for ConfusionMatrix {
    /// numpy-style rendering, e.g. `[[28189     0]\n [ 2149   346]]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .cells
            .iter()
            .flatten()
            .map(|c| c.to_string().len())
            .max()
            .unwrap_or(1);
        let [[a, b], [c, d]] = self.cells;
        write!(f, "[[{a:>width$} {b:>width$}]\n [{c:>width$} {d:>width$}]]")
    }
}

pub fn confusion(y_true: &[Label], y_pred: &[Label]) -> Result<ConfusionMatrix, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch {
            truth: y_true.len(),
            predicted: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut cm = ConfusionMatrix::default();
    for (t, p) in y_true.iter().zip(y_pred) {
        cm.cells[t.index()][p.index()] += 1;
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub confusion: ConfusionMatrix,
    pub classes: [ClassMetrics; 2],
    pub accuracy: f64,
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    /// Mean squared error of the 0/1 labels; for binary labels this is the
    /// error rate, `1 - accuracy`.
    pub mse: f64,
    pub total: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Derives every metric from the matrix alone. Zero denominators give 0.
pub fn report(cm: &ConfusionMatrix) -> Result<ClassReport, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::Empty);
    }
    let classes = Label::ALL.map(|c| {
        let hit = cm.cells[c.index()][c.index()];
        let precision = ratio(hit, cm.column_sum(c));
        let recall = ratio(hit, cm.row_sum(c));
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassMetrics {
            precision,
            recall,
            f1,
            support: cm.row_sum(c),
        }
    });
    let macro_avg = Averages {
        precision: (classes[0].precision + classes[1].precision) / 2.0,
        recall: (classes[0].recall + classes[1].recall) / 2.0,
        f1: (classes[0].f1 + classes[1].f1) / 2.0,
    };
    let weighted = |pick: fn(&ClassMetrics) -> f64| {
        classes.iter().map(|m| pick(m) * m.support as f64).sum::<f64>() / total as f64
    };
    let weighted_avg = Averages {
        precision: weighted(|m| m.precision),
        recall: weighted(|m| m.recall),
        f1: weighted(|m| m.f1),
    };
    Ok(ClassReport {
        confusion: *cm,
        classes,
        accuracy: ratio(cm.correct(), total),
        macro_avg,
        weighted_avg,
        mse: ratio(cm.errors(), total),
        total,
    })
}

impl ClassReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Two-decimal table in the familiar `classification_report` layout.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>12}  {:>9} {:>9} {:>9} {:>9}", "", "precision", "recall", "f1-score", "support");
        out.push('\n');
        for label in Label::ALL {
            let m = &self.classes[label.index()];
            let _ = writeln!(
                out,
                "{:>12}  {:>9.2} {:>9.2} {:>9.2} {:>9}",
                label.to_string(),
                m.precision,
                m.recall,
                m.f1,
                m.support
            );
        }
        out.push('\n');
        let _ = writeln!(out, "{:>12}  {:>9} {:>9} {:>9.2} {:>9}", "accuracy", "", "", self.accuracy, self.total);
        for (name, avg) in [("macro avg", &self.macro_avg), ("weighted avg", &self.weighted_avg)] {
            let _ = writeln!(
                out,
                "{:>12}  {:>9.2} {:>9.2} {:>9.2} {:>9}",
                name, avg.precision, avg.recall, avg.f1, self.total
            );
        }
        out
    }

    /// Confusion matrix, table, full-precision accuracy and MSE.
    pub fn render(&self) -> String {
        let rule = "-----";
        format!(
            "{rule}\n{}\n{rule}\n{}{rule}\naccuracy {}\nmse {}\n{rule}\n",
            self.confusion,
            self.render_table(),
            self.accuracy,
            self.mse
        )
    }
}

/// Runs `pipeline` over `corpus` and reports.
pub fn evaluate_pipeline(pipeline: &TrainedPipeline, corpus: &Corpus) -> Result<ClassReport, EvalError> {
    let predicted: Vec<Label> = corpus.texts().map(|t| pipeline.predict(t).label).collect();
    report(&confusion(&corpus.labels(), &predicted)?)
}

/// Stratified fold assignment. Each class is shuffled and dealt round-robin,
/// continuing the deal across classes so fold sizes differ by at most one.
/// Indices inside a fold are ascending.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    let mut counts = [0usize; 2];
    for l in labels {
        counts[l.index()] += 1;
    }
    if k < 2 || counts.iter().any(|&c| c < k) {
        return Err(EvalError::TooFewSamples { k, counts });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0usize;
    for label in Label::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        members.shuffle(&mut rng);
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub fold_accuracies: Vec<f64>,
    pub fold_sizes: Vec<usize>,
    pub mean: f64,
    /// Population standard deviation over folds.
    pub stddev: f64,
}

pub fn kfold_cv(
    corpus: &Corpus,
    k: usize,
    seed: u64,
    variant: Variant,
    config: &PipelineConfig,
    hyper: &Hyperparameters,
) -> Result<CrossValidation, EvalError> {
    let folds = stratified_folds(&corpus.labels(), k, seed)?;
    let n = corpus.len();

    // folds train independently; results are collected in fold order
    let results: Vec<Result<f64, EvalError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = folds
            .iter()
            .map(|fold| {
                scope.spawn(move || {
                    let mut held_out = vec![false; n];
                    fold.iter().for_each(|&i| held_out[i] = true);
                    let train_idx: Vec<usize> = (0..n).filter(|&i| !held_out[i]).collect();
                    let pipeline = train_pipeline(&corpus.select(&train_idx), variant, config.clone(), hyper)?;
                    Ok(evaluate_pipeline(&pipeline, &corpus.select(fold))?.accuracy)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("fold worker panicked")).collect()
    });
    let fold_accuracies = results.into_iter().collect::<Result<Vec<f64>, _>>()?;
    let mean = fold_accuracies.iter().sum::<f64>() / k as f64;
    let variance = fold_accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / k as f64;
    Ok(CrossValidation {
        fold_sizes: folds.iter().map(Vec::len).collect(),
        fold_accuracies,
        mean,
        stddev: variance.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LabeledDocument;
    use proptest::prelude::*;

    fn labels(bits: &[u8]) -> Vec<Label> {
        bits.iter().map(|&b| Label::try_from(b).unwrap()).collect()
    }

    #[test]
    fn confusion_counts() {
        let cm = confusion(&labels(&[0, 0, 1, 1]), &labels(&[0, 1, 1, 1])).unwrap();
        assert_eq!(cm.cells, [[1, 1], [0, 2]]);
        let perfect = confusion(&labels(&[0, 1, 1]), &labels(&[0, 1, 1])).unwrap();
        assert_eq!((perfect.cells[0][1], perfect.cells[1][0]), (0, 0));
    }

    #[test]
    fn confusion_errors() {
        assert_eq!(confusion(&[], &[]), Err(EvalError::Empty));
        assert!(matches!(
            confusion(&labels(&[0]), &labels(&[0, 1])),
            Err(EvalError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn report_hand_values() {
        let r = report(&ConfusionMatrix { cells: [[1, 1], [0, 2]] }).unwrap();
        assert_eq!(r.accuracy, 0.75);
        assert!((r.classes[1].precision - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.classes[1].recall, 1.0);
        assert!((r.classes[1].f1 - 0.8).abs() < 1e-15);
        assert_eq!(r.mse, 0.25);
    }

    #[test]
    fn zero_denominators_give_zero() {
        // nothing predicted as class 1
        let r = report(&ConfusionMatrix { cells: [[5, 0], [3, 0]] }).unwrap();
        assert_eq!(r.classes[1].precision, 0.0);
        assert_eq!(r.classes[1].f1, 0.0);
        assert!(r.to_json().contains("\"precision\": 0.0"));
        assert_eq!(report(&ConfusionMatrix::default()), Err(EvalError::Empty));
    }

    #[test]
    fn published_validation_matrix_pattern() {
        let cm = ConfusionMatrix { cells: [[28189, 0], [2149, 346]] };
        let r = report(&cm).unwrap();
        assert_eq!(cm.cells[0][1], 0);
        assert_eq!(format!("{:.2}", r.classes[0].recall), "1.00");
        assert!(r.classes[1].recall < 0.15);
        assert_eq!(format!("{:.2}", r.classes[1].precision), "1.00");
        assert_eq!(cm.to_string(), "[[28189     0]\n [ 2149   346]]");
    }

    #[test]
    fn table_layout() {
        let r = report(&ConfusionMatrix { cells: [[1, 1], [0, 2]] }).unwrap();
        // byte-for-byte the reference classification_report output for this matrix
        let expected = "              precision    recall  f1-score   support\n\n           0       1.00      0.50      0.67         2\n           1       0.67      1.00      0.80         2\n\n    accuracy                           0.75         4\n   macro avg       0.83      0.75      0.73         4\nweighted avg       0.83      0.75      0.73         4\n";
        assert_eq!(r.render_table(), expected);
        assert!(r.render().contains("accuracy 0.75\n"));
    }

    fn synthetic(n_per_class: usize) -> Corpus {
        (0..2 * n_per_class)
            .map(|i| {
                let label = if i % 2 == 0 { Label::NonBullying } else { Label::Bullying };
                let text = match label {
                    Label::NonBullying => format!("thanks for the edit number{i}"),
                    Label::Bullying => format!("idiot idiot comment number{i}"),
                };
                LabeledDocument::new(text, label).unwrap()
            })
            .collect()
    }

    #[test]
    fn kfold_partition_arithmetic() {
        let corpus = synthetic(50);
        let folds = stratified_folds(&corpus.labels(), 5, 7).unwrap();
        assert!(folds.iter().all(|f| f.len() == 20));
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn kfold_separable_corpus() {
        let corpus = synthetic(50);
        for variant in [Variant::Mnb, Variant::Svm] {
            let cv = kfold_cv(&corpus, 5, 3, variant, &PipelineConfig::default(), &Hyperparameters::default()).unwrap();
            assert_eq!(cv.fold_accuracies.len(), 5);
            assert_eq!(cv.fold_sizes, vec![20; 5]);
            assert_eq!(cv.mean, 1.0, "{variant}");
            assert_eq!(cv.stddev, 0.0);
            let again = kfold_cv(&corpus, 5, 3, variant, &PipelineConfig::default(), &Hyperparameters::default()).unwrap();
            assert_eq!(cv, again);
        }
    }

    #[test]
    fn kfold_too_few() {
        let corpus = synthetic(2);
        assert!(matches!(
            kfold_cv(&corpus, 3, 1, Variant::Mnb, &PipelineConfig::default(), &Hyperparameters::default()),
            Err(EvalError::TooFewSamples { k: 3, .. })
        ));
        assert!(stratified_folds(&corpus.labels(), 1, 1).is_err());
    }

    proptest! {
        #[test]
        fn macro_f1_between_class_extremes(cells in prop::array::uniform4(0u64..50)) {
            let cm = ConfusionMatrix { cells: [[cells[0], cells[1]], [cells[2], cells[3]]] };
            prop_assume!(cm.total() > 0);
            let r = report(&cm).unwrap();
            let (lo, hi) = (r.classes[0].f1.min(r.classes[1].f1), r.classes[0].f1.max(r.classes[1].f1));
            prop_assert!(r.macro_avg.f1 >= lo - 1e-15 && r.macro_avg.f1 <= hi + 1e-15);
            prop_assert!((0.0..=1.0).contains(&r.accuracy));
            prop_assert_eq!(report(&cm).unwrap(), r);
        }

        #[test]
        fn folds_partition(bits in prop::collection::vec(0u8..2, 10..60), k in 2usize..5, seed: u64) {
            let labels = labels(&bits);
            let counts = [bits.iter().filter(|&&b| b == 0).count(), bits.iter().filter(|&&b| b == 1).count()];
            prop_assume!(counts.iter().all(|&c| c >= k));
            let folds = stratified_folds(&labels, k, seed).unwrap();
            let mut all: Vec<usize> = folds.concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..bits.len()).collect::<Vec<_>>());
        }
    }
}
