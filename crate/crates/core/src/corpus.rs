//! Labeled corpus ingestion, cleaning and train/test splitting.
//!
//! A corpus file is a UTF-8 CSV with a header row. Two columns matter: the
//! message text (default `text`) and a binary label (default `oh_label`,
//! where `1` marks bullying content). Labels may be written as `0`/`1` or
//! `0.0`/`1.0`; anything else is rejected rather than coerced.
//!
//! Loading produces a [`RawCorpus`] that still contains incomplete rows
//! (empty text, empty label cell). [`clean`] drops those rows and yields a
//! [`Corpus`] whose documents all satisfy the [`LabeledDocument`] invariants.

use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_TEXT_COLUMN: &str = "text";
pub const DEFAULT_LABEL_COLUMN: &str = "oh_label";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing column `{0}` in header")]
    MissingColumn(String),
    #[error("row {row}: bad label `{value}` (expected 0 or 1)")]
    BadLabel { row: u64, value: String },
    #[error("row {row}: malformed csv: {detail}")]
    Malformed { row: u64, detail: String },
    #[error("corpus too small: need at least 2 documents, have {0}")]
    CorpusTooSmall(usize),
    #[error("test fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error("document text is empty")]
    EmptyText,
}

/// Binary moderation label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Label {
    NonBullying = 0,
    Bullying = 1,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::NonBullying, Label::Bullying];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Label> {
        match index {
            0 => Some(Label::NonBullying),
            1 => Some(Label::Bullying),
            _ => None,
        }
    }

    /// Human-readable class name used in reports and CLI output.
    pub fn name(self) -> &'static str {
        match self {
            Label::NonBullying => "non-bullying",
            Label::Bullying => "bullying",
        }
    }

    /// Parses the label cell of a corpus row. Accepts `0`, `1`, `0.0`, `1.0`.
    pub fn parse_cell(cell: &str) -> Option<Label> {
        match cell.trim() {
            "0" | "0.0" => Some(Label::NonBullying),
            "1" | "1.0" => Some(Label::Bullying),
            _ => None,
        }
    }
}

impl From<Label> for u8 {
    fn from(label: Label) -> u8 {
        label as u8
    }
}

impl TryFrom<u8> for Label {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Label::from_index(value as usize).ok_or_else(|| format!("label must be 0 or 1, got {value}"))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledDocument {
    text: String,
    label: Label,
}

impl LabeledDocument {
    /// Fails with [`CorpusError::EmptyText`] when the text is blank after trimming.
    pub fn new(text: impl Into<String>, label: Label) -> Result<Self, CorpusError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(CorpusError::EmptyText);
        }
        Ok(LabeledDocument { text, label })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn label(&self) -> Label {
        self.label
    }
}

/// Ordered collection of clean labeled documents.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Corpus {
    docs: Vec<LabeledDocument>,
    class_counts: [usize; 2],
}

impl Corpus {
    pub fn new(docs: Vec<LabeledDocument>) -> Self {
        let mut class_counts = [0usize; 2];
        for doc in &docs {
            class_counts[doc.label.index()] += 1;
        }
        Corpus { docs, class_counts }
    }

    pub fn docs(&self) -> &[LabeledDocument] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Number of documents per label, indexed by [`Label::index`].
    pub fn class_counts(&self) -> [usize; 2] {
        self.class_counts
    }

    pub fn labels(&self) -> Vec<Label> {
        self.docs.iter().map(|d| d.label).collect()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.docs.iter().map(|d| d.text.as_str())
    }

    /// Sub-corpus made of the documents at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Corpus {
        Corpus::new(indices.iter().map(|&i| self.docs[i].clone()).collect())
    }
}

impl FromIterator<LabeledDocument> for Corpus {
    fn from_iter<I: IntoIterator<Item = LabeledDocument>>(iter: I) -> Self {
        Corpus::new(iter.into_iter().collect())
    }
}

/// A corpus row as read from disk, before cleaning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    /// 1-based data row number (the header is row 0).
    pub row: u64,
    pub text: Option<String>,
    pub label: Option<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawCorpus {
    pub records: Vec<RawRecord>,
}

impl RawCorpus {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl From<&Corpus> for RawCorpus {
    fn from(corpus: &Corpus) -> Self {
        let records = corpus
            .docs
            .iter()
            .enumerate()
            .map(|(i, d)| RawRecord {
                row: i as u64 + 1,
                text: Some(d.text.clone()),
                label: Some(d.label),
            })
            .collect();
        RawCorpus { records }
    }
}

/// Reads a labeled CSV corpus.
///
/// Empty text or label cells (and short rows) are kept as incomplete records
/// for [`clean`] to drop. A non-empty label cell outside `{0, 1}` is an error.
pub fn load_labeled_csv(
    path: impl AsRef<Path>,
    text_column: &str,
    label_column: &str,
) -> Result<RawCorpus, CorpusError> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => CorpusError::FileNotFound(path.to_path_buf()),
        _ => CorpusError::Io {
            path: path.to_path_buf(),
            source,
        },
    })?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_labeled_csv(&bytes, text_column, label_column)
}

/// Same as [`load_labeled_csv`] over an in-memory CSV document.
pub fn parse_labeled_csv(
    data: &[u8],
    text_column: &str,
    label_column: &str,
) -> Result<RawCorpus, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(data);

    let headers = reader.headers().map_err(|e| CorpusError::Malformed {
        row: 0,
        detail: e.to_string(),
    })?;
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}').trim() == name)
            .ok_or_else(|| CorpusError::MissingColumn(name.to_string()))
    };
    let text_idx = column(text_column)?;
    let label_idx = column(label_column)?;

    let mut records = Vec::new();
    for (i, result) in reader.records().enumerate() {
        let row = i as u64 + 1;
        let record = result.map_err(|e| CorpusError::Malformed {
            row,
            detail: e.to_string(),
        })?;
        let text = record.get(text_idx).map(str::to_string);
        let label = match record.get(label_idx).map(str::trim) {
            None | Some("") => None,
            Some(cell) => Some(Label::parse_cell(cell).ok_or_else(|| CorpusError::BadLabel {
                row,
                value: cell.to_string(),
            })?),
        };
        records.push(RawRecord { row, text, label });
    }
    Ok(RawCorpus { records })
}

/// Keeps the rows with non-blank text and a label, preserving order.
pub fn clean(raw: &RawCorpus) -> Corpus {
    raw.records
        .iter()
        .filter_map(|r| match (&r.text, r.label) {
            (Some(text), Some(label)) => LabeledDocument::new(text.clone(), label).ok(),
            _ => None,
        })
        .collect()
}

/// Loads and cleans in one step.
pub fn load_corpus(
    path: impl AsRef<Path>,
    text_column: &str,
    label_column: &str,
) -> Result<Corpus, CorpusError> {
    load_labeled_csv(path, text_column, label_column).map(|raw| clean(&raw))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    test_fraction: f64,
    seed: u64,
}

impl SplitSpec {
    pub fn new(test_fraction: f64, seed: u64) -> Result<Self, CorpusError> {
        if !(test_fraction > 0.0 && test_fraction < 1.0) {
            return Err(CorpusError::BadFraction(test_fraction));
        }
        Ok(SplitSpec {
            test_fraction,
            seed,
        })
    }

    pub fn test_fraction(&self) -> f64 {
        self.test_fraction
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Deterministic train/test partition.
///
/// The test side holds `round(test_fraction * n)` documents. When both
/// classes have at least two members the split is stratified: per-class
/// quotas are floored and the remainder goes to the classes with the largest
/// fractional parts. Both sides keep the corpus order.
pub fn split(corpus: &Corpus, spec: SplitSpec) -> Result<(Corpus, Corpus), CorpusError> {
    let n = corpus.len();
    if n < 2 {
        return Err(CorpusError::CorpusTooSmall(n));
    }
    let n_test = (spec.test_fraction * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let counts = corpus.class_counts();
    let mut in_test = vec![false; n];
    if counts.iter().all(|&c| c >= 2) {
        let quotas = stratified_quotas(&counts, n_test);
        for label in Label::ALL {
            let mut members: Vec<usize> = (0..n)
                .filter(|&i| corpus.docs[i].label == label)
                .collect();
            members.shuffle(&mut rng);
            for &i in &members[..quotas[label.index()]] {
                in_test[i] = true;
            }
        }
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        for &i in &all[..n_test] {
            in_test[i] = true;
        }
    }

    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (doc, &t) in corpus.docs.iter().zip(&in_test) {
        if t {
            test.push(doc.clone());
        } else {
            train.push(doc.clone());
        }
    }
    Ok((Corpus::new(train), Corpus::new(test)))
}

fn stratified_quotas(counts: &[usize; 2], n_test: usize) -> [usize; 2] {
    let n: usize = counts.iter().sum();
    let exact: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 * n_test as f64 / n as f64)
        .collect();
    let mut quotas = [exact[0].floor() as usize, exact[1].floor() as usize];
    let mut remaining = n_test - quotas.iter().sum::<usize>();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &c in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        if quotas[c] < counts[c] {
            quotas[c] += 1;
            remaining -= 1;
        }
    }
    quotas
}
