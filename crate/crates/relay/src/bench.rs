//! Interception overhead: the same traffic through the relay with a real
//! screen and with [`PassThrough`], timed per message.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use serde::Serialize;
use thiserror::Error;
use tower::ServiceExt;

use crate::api::{router, AppState};
use crate::screen::{PassThrough, Screen};
use crate::store::MessageStore;

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("need at least one message (n >= 1)")]
    NoMessages,
    #[error("need at least one text to send")]
    NoTexts,
    #[error("relay answered {0} during the benchmark")]
    Relay(StatusCode),
}

/// Summary of microsecond samples. Quantiles interpolate linearly between
/// order statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub n: usize,
    pub median: f64,
    pub p95: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Stats {
    pub fn from_samples(samples: &[f64]) -> Option<Stats> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Stats {
            n: sorted.len(),
            median: quantile(&sorted, 0.5),
            p95: quantile(&sorted, 0.95),
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        })
    }
}

/// Per-message differences `a[i] - b[i]`.
pub fn paired_delta(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub with_classifier_us: Stats,
    pub passthrough_us: Stats,
    pub delta_us: Stats,
    #[serde(skip)]
    pub with_classifier_samples: Vec<f64>,
    #[serde(skip)]
    pub passthrough_samples: Vec<f64>,
}

impl BenchReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:>8} {:>12} {:>12} {:>12} {:>12}",
            "mode", "n", "median_us", "p95_us", "mean_us", "max_us"
        );
        for (name, s) in [
            ("with_classifier", &self.with_classifier_us),
            ("passthrough", &self.passthrough_us),
            ("delta", &self.delta_us),
        ] {
            let _ = writeln!(
                out,
                "{:<16} {:>8} {:>12.1} {:>12.1} {:>12.1} {:>12.1}",
                name, s.n, s.median, s.p95, s.mean, s.max
            );
        }
        out
    }
}

const WARMUP: usize = 20;

/// Sends `n` messages (cycling through `texts`) through two in-process
/// relays, one screening with `screen` and one passing everything, and
/// times each request end to end. The two modes alternate which goes first
/// so drift affects both equally.
pub async fn bench_overhead(screen: Arc<dyn Screen>, n: usize, texts: &[String]) -> Result<BenchReport, BenchError> {
    if n == 0 {
        return Err(BenchError::NoMessages);
    }
    if texts.is_empty() {
        return Err(BenchError::NoTexts);
    }
    let screened = router(AppState::new(Some(screen), MessageStore::new()));
    let passing = router(AppState::new(Some(Arc::new(PassThrough)), MessageStore::new()));
    let request = |text: &str| {
        let body = serde_json::json!({ "sender": "bench-sender", "recipient": "bench-recipient", "body": text });
        Request::post("/messages")
            .header("content-type", "application/json")
            .body(Body::from(body.to_string()))
            .expect("valid request")
    };
    let time = |app: axum::Router, req: Request<Body>| async move {
        let start = Instant::now();
        let response = app.oneshot(req).await.expect("router is infallible");
        let elapsed = start.elapsed().as_secs_f64() * 1e6;
        if response.status() != StatusCode::CREATED {
            return Err(BenchError::Relay(response.status()));
        }
        Ok(elapsed)
    };

    for text in texts.iter().cycle().take(WARMUP.min(n)) {
        time(screened.clone(), request(text)).await?;
        time(passing.clone(), request(text)).await?;
    }
    let mut with = Vec::with_capacity(n);
    let mut pass = Vec::with_capacity(n);
    for (i, text) in texts.iter().cycle().take(n).enumerate() {
        if i % 2 == 0 {
            with.push(time(screened.clone(), request(text)).await?);
            pass.push(time(passing.clone(), request(text)).await?);
        } else {
            pass.push(time(passing.clone(), request(text)).await?);
            with.push(time(screened.clone(), request(text)).await?);
        }
    }
    let delta = paired_delta(&with, &pass);
    Ok(BenchReport {
        with_classifier_us: Stats::from_samples(&with).expect("n >= 1"),
        passthrough_us: Stats::from_samples(&pass).expect("n >= 1"),
        delta_us: Stats::from_samples(&delta).expect("n >= 1"),
        with_classifier_samples: with,
        passthrough_samples: pass,
    })
}
