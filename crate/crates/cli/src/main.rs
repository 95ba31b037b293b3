//! `sentinel`: train, evaluate and serve message-moderation models.
//!
//! Exit codes: 0 on success, 2 on any operational error. `classify` instead
//! exits with the predicted label (0 or 1).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sentinel_core::classifiers::{Features, Hyperparameters, SvmHyper};
use sentinel_core::corpus::{DEFAULT_LABEL_COLUMN, DEFAULT_TEXT_COLUMN};
use sentinel_core::Variant;

#[derive(Parser)]
#[command(name = "sentinel", version, about = "Cyberbullying message classifier and interception relay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model on a labeled CSV and write it as JSON.
    Train {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_enum, default_value_t = VariantArg::Mnb)]
        variant: VariantArg,
        #[command(flatten)]
        hyper: HyperArgs,
        /// Hold out this fraction (seeded by --seed) and report on it.
        #[arg(long)]
        test_fraction: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the confusion matrix and classification report of a model on a labeled CSV.
    Evaluate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        model: PathBuf,
        /// Also write the report as JSON.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Stratified k-fold cross-validation.
    CrossValidate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_enum, default_value_t = VariantArg::Mnb)]
        variant: VariantArg,
        #[command(flatten)]
        hyper: HyperArgs,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Classify one text; exits 0 for non-bullying, 1 for bullying.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        text: String,
    },
    /// Run the interception relay.
    Serve {
        /// Model file; without one the relay runs degraded and refuses to classify.
        #[arg(long, env = "SENTINEL_MODEL")]
        model: Option<PathBuf>,
        #[arg(long, env = "SENTINEL_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Append-only message log, replayed on start.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Measure per-message interception overhead against a pass-through relay.
    BenchLatency {
        #[arg(long, env = "SENTINEL_MODEL")]
        model: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Labeled CSV whose texts are replayed; synthetic chat messages otherwise.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_TEXT_COLUMN)]
        text_column: String,
        #[arg(long, default_value = DEFAULT_LABEL_COLUMN)]
        label_column: String,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = DEFAULT_TEXT_COLUMN)]
    text_column: String,
    #[arg(long, default_value = DEFAULT_LABEL_COLUMN)]
    label_column: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Mnb,
    Svm,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Mnb => Variant::Mnb,
            VariantArg::Svm => Variant::Svm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FeaturesArg {
    Tfidf,
    Counts,
}

#[derive(Args)]
struct HyperArgs {
    /// Naive Bayes additive smoothing.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// SVM L2 regularization strength.
    #[arg(long, default_value_t = 0.001)]
    lambda: f64,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    /// SGD shuffle seed; also seeds splits and folds.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0.1)]
    eta0: f64,
    #[arg(long, value_enum, default_value_t = FeaturesArg::Tfidf)]
    features: FeaturesArg,
    /// Keep stopwords.
    #[arg(long)]
    no_stopwords: bool,
    /// Skip stemming.
    #[arg(long)]
    no_stemming: bool,
}

impl HyperArgs {
    fn hyperparameters(&self) -> Hyperparameters {
        Hyperparameters {
            mnb_alpha: self.alpha,
            svm: SvmHyper {
                lambda: self.lambda,
                max_epochs: self.epochs,
                seed: self.seed,
                tol: self.tol,
                eta0: self.eta0,
            },
            features: match self.features {
                FeaturesArg::Tfidf => Features::Tfidf,
                FeaturesArg::Counts => Features::Counts,
            },
        }
    }

    fn pipeline_config(&self) -> sentinel_core::textpipe::PipelineConfig {
        let mut config = sentinel_core::textpipe::PipelineConfig::default().with_stemming(!self.no_stemming);
        if self.no_stopwords {
            config = config.with_stopwords(std::iter::empty::<String>());
        }
        config
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
