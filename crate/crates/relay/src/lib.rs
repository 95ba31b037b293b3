//! Message relay that screens every message in transit.
//!
//! A sender posts a message; the relay classifies the body once, stores it
//! with status `delivered` or `blocked`, and only delivered messages ever
//! reach the recipient's inbox. Senders see their own messages, blocked ones
//! included, in their outbox.
//!
//! ```no_run
//! use std::sync::Arc;
//! use sentinel_relay::{AppState, MessageStore, PipelineScreen};
//!
//! # async fn run(pipeline: sentinel_core::TrainedPipeline) -> std::io::Result<()> {
//! let state = AppState::new(Some(Arc::new(PipelineScreen::new(pipeline))), MessageStore::new());
//! let listener = tokio::net::TcpListener::bind("127.0.0.1:8080").await?;
//! sentinel_relay::serve(listener, state, async { let _ = tokio::signal::ctrl_c().await; }).await
//! # }
//! ```

pub mod api;
pub mod bench;
pub mod screen;
pub mod store;

pub use api::{router, serve, AppState};
pub use bench::{bench_overhead, BenchReport, Stats};
pub use screen::{ModelInfo, PassThrough, PipelineScreen, Screen, Screened};
pub use store::{Message, MessageId, MessageStore, Status, Verdict};
