use std::fs;
use std::net::SocketAddr;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use chrono::{DateTime, Utc};
use sentinel_core::classifiers::train_pipeline;
use sentinel_core::corpus::{load_corpus, split, Corpus, SplitSpec};
use sentinel_core::evaluate::{evaluate_pipeline, kfold_cv};
use sentinel_core::{modelstore, synth, Label, TrainedPipeline};
use sentinel_relay::{bench_overhead, AppState, MessageStore, PipelineScreen, Screen};

use crate::{Command, CorpusArgs, HyperArgs};

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Train {
            corpus,
            variant,
            hyper,
            test_fraction,
            out,
        } => train(&corpus, variant.into(), &hyper, test_fraction, &out),
        Command::Evaluate { corpus, model, json_out } => evaluate(&corpus, &model, json_out.as_deref()),
        Command::CrossValidate {
            corpus,
            variant,
            hyper,
            k,
            json_out,
        } => cross_validate(&corpus, variant.into(), &hyper, k, json_out.as_deref()),
        Command::Classify { model, text } => classify(&model, &text),
        Command::Serve { model, port, host, log } => serve(model.as_deref(), &host, port, log.as_deref()),
        Command::BenchLatency {
            model,
            n,
            data,
            text_column,
            label_column,
            json_out,
        } => {
            let texts = match data {
                Some(path) => load(&CorpusArgs {
                    data: path,
                    text_column,
                    label_column,
                })?
                .texts()
                .map(str::to_string)
                .collect(),
                None => synth::messages(500, 5150),
            };
            bench(&model, n, &texts, json_out.as_deref())
        }
    }
}

fn load(args: &CorpusArgs) -> Result<Corpus> {
    let corpus = load_corpus(&args.data, &args.text_column, &args.label_column)
        .with_context(|| format!("loading {}", args.data.display()))?;
    if corpus.is_empty() {
        bail!("{} has no usable labeled rows", args.data.display());
    }
    Ok(corpus)
}

fn load_model(path: &Path) -> Result<TrainedPipeline> {
    modelstore::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn write_json(path: Option<&Path>, json: &str) -> Result<()> {
    if let Some(path) = path {
        fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// `SOURCE_DATE_EPOCH` pins the recorded training time.
fn source_date_epoch() -> Result<Option<DateTime<Utc>>> {
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(s) => {
            let secs: i64 = s.trim().parse().with_context(|| format!("SOURCE_DATE_EPOCH `{s}`"))?;
            let at = DateTime::from_timestamp(secs, 0).with_context(|| format!("SOURCE_DATE_EPOCH {secs} out of range"))?;
            Ok(Some(at))
        }
        Err(_) => Ok(None),
    }
}

fn train(
    args: &CorpusArgs,
    variant: sentinel_core::Variant,
    hyper: &HyperArgs,
    test_fraction: Option<f64>,
    out: &Path,
) -> Result<ExitCode> {
    let corpus = load(args)?;
    let (train, test) = match test_fraction {
        Some(f) => {
            let (train, test) = split(&corpus, SplitSpec::new(f, hyper.seed)?)?;
            (train, Some(test))
        }
        None => (corpus, None),
    };
    let mut pipeline = train_pipeline(&train, variant, hyper.pipeline_config(), &hyper.hyperparameters())?;
    if let Some(at) = source_date_epoch()? {
        pipeline = pipeline.with_trained_at(at);
    }
    modelstore::save(&pipeline, out)?;

    let counts = train.class_counts();
    let train_report = evaluate_pipeline(&pipeline, &train)?;
    println!("variant        {variant}");
    println!("documents      {} ({} non-bullying, {} bullying)", train.len(), counts[0], counts[1]);
    println!("vocabulary     {}", pipeline.vocabulary().len());
    println!("features       {:?}", pipeline.features());
    match variant {
        sentinel_core::Variant::Mnb => println!("alpha          {}", hyper.alpha),
        sentinel_core::Variant::Svm => println!(
            "svm            lambda {} epochs {} seed {} tol {} eta0 {}",
            hyper.lambda, hyper.epochs, hyper.seed, hyper.tol, hyper.eta0
        ),
    }
    println!("train accuracy {:.4}", train_report.accuracy);
    if let Some(test) = test {
        let report = evaluate_pipeline(&pipeline, &test)?;
        println!("\nheld-out ({} documents)\n{}", test.len(), report.render());
    }
    println!("model written to {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn evaluate(args: &CorpusArgs, model: &Path, json_out: Option<&Path>) -> Result<ExitCode> {
    let pipeline = load_model(model)?;
    let corpus = load(args)?;
    let report = evaluate_pipeline(&pipeline, &corpus)?;
    print!("{}", report.render());
    write_json(json_out, &report.to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn cross_validate(
    args: &CorpusArgs,
    variant: sentinel_core::Variant,
    hyper: &HyperArgs,
    k: usize,
    json_out: Option<&Path>,
) -> Result<ExitCode> {
    let corpus = load(args)?;
    let cv = kfold_cv(&corpus, k, hyper.seed, variant, &hyper.pipeline_config(), &hyper.hyperparameters())?;
    for (i, (acc, size)) in cv.fold_accuracies.iter().zip(&cv.fold_sizes).enumerate() {
        println!("fold {:<3} n {:<7} accuracy {acc:.4}", i + 1, size);
    }
    println!("mean {:.4} stddev {:.4}", cv.mean, cv.stddev);
    write_json(json_out, &serde_json::to_string_pretty(&cv)?)?;
    Ok(ExitCode::SUCCESS)
}

fn classify(model: &Path, text: &str) -> Result<ExitCode> {
    let pipeline = load_model(model)?;
    let p = pipeline.predict(text);
    println!("{} {}", p.label.index(), p.label.name());
    println!("scores {} {}", p.scores[0], p.scores[1]);
    Ok(match p.label {
        Label::NonBullying => ExitCode::SUCCESS,
        Label::Bullying => ExitCode::from(1),
    })
}

fn runtime() -> Result<tokio::runtime::Runtime> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("starting async runtime")
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
    tracing::info!("shutting down");
}

fn serve(model: Option<&Path>, host: &str, port: u16, log: Option<&Path>) -> Result<ExitCode> {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let screen: Option<Arc<dyn Screen>> = match model {
        Some(path) => {
            let pipeline = load_model(path)?;
            tracing::info!(
                variant = %pipeline.variant(),
                vocab = pipeline.vocabulary().len(),
                "loaded model {}",
                path.display()
            );
            Some(Arc::new(PipelineScreen::new(pipeline)))
        }
        None => {
            tracing::warn!("no model configured; classification endpoints answer 503");
            None
        }
    };
    let store = match log {
        Some(path) => MessageStore::with_log(path).with_context(|| format!("opening log {}", path.display()))?,
        None => MessageStore::new(),
    };
    let state = AppState::new(screen, store);
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .with_context(|| format!("bad listen address {host}:{port}"))?;
    runtime()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        tracing::info!("listening on {}", listener.local_addr()?);
        sentinel_relay::serve(listener, state, shutdown_signal()).await?;
        Ok(ExitCode::SUCCESS)
    })
}

fn bench(model: &Path, n: usize, texts: &[String], json_out: Option<&Path>) -> Result<ExitCode> {
    let pipeline = load_model(model)?;
    let vocab = pipeline.vocabulary().len();
    let screen: Arc<dyn Screen> = Arc::new(PipelineScreen::new(pipeline));
    let report = runtime()?.block_on(bench_overhead(screen, n, texts))?;
    println!("vocabulary {vocab}, {n} messages per mode");
    print!("{}", report.render());
    write_json(json_out, &serde_json::to_string_pretty(&report)?)?;
    Ok(ExitCode::SUCCESS)
}
