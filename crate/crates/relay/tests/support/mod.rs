//! Shared fixtures for the relay test targets.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use sentinel_core::classifiers::{train_pipeline, Hyperparameters};
use sentinel_core::synth::{self, SynthConfig};
use sentinel_core::textpipe::PipelineConfig;
use sentinel_core::{Label, TrainedPipeline, Variant};
use sentinel_relay::{router, AppState, MessageStore, PipelineScreen};
use serde_json::{json, Value};
use tower::ServiceExt;

pub fn trained(variant: Variant, docs: usize, seed: u64) -> TrainedPipeline {
    let corpus = synth::generate(docs, seed, &SynthConfig::default());
    train_pipeline(&corpus, variant, PipelineConfig::default(), &Hyperparameters::default()).expect("trainable")
}

pub fn app(pipeline: &TrainedPipeline) -> (Router, Arc<MessageStore>) {
    let state = AppState::new(Some(Arc::new(PipelineScreen::new(pipeline.clone()))), MessageStore::new());
    let store = state.store.clone();
    (router(state), store)
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<String>) -> (StatusCode, Value) {
    let mut builder = Request::builder().method(method).uri(uri);
    if body.is_some() {
        builder = builder.header("content-type", "application/json");
    }
    let request = builder.body(body.map_or_else(Body::empty, Body::from)).unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

pub async fn send(app: &Router, sender: &str, recipient: &str, body: &str) -> (StatusCode, Value) {
    let payload = json!({ "sender": sender, "recipient": recipient, "body": body }).to_string();
    call(app, Method::POST, "/messages", Some(payload)).await
}

pub async fn messages(app: &Router, uri: &str) -> Vec<Value> {
    let (status, value) = call(app, Method::GET, uri, None).await;
    assert_eq!(status, StatusCode::OK, "{uri}: {value}");
    value["messages"].as_array().expect("messages array").clone()
}

fn expected_status(pipeline: &TrainedPipeline, body: &str) -> &'static str {
    match pipeline.predict(body).label {
        Label::Bullying => "blocked",
        Label::NonBullying => "delivered",
    }
}

struct Sent {
    sender: String,
    recipient: String,
    status: &'static str,
}

/// Checks the mailbox views against what was sent: each delivered message is
/// in its recipient's inbox exactly once, no blocked id is in any inbox, and
/// the outboxes together hold every message exactly once with its status.
async fn check_mailboxes(app: &Router, users: &[String], sent: &HashMap<String, Sent>) -> Result<(), String> {
    let mut seen_in_outbox: HashMap<String, usize> = HashMap::new();
    for user in users {
        let inbox = messages(app, &format!("/inbox/{user}")).await;
        let mut inbox_ids = HashSet::new();
        for m in &inbox {
            let id = m["id"].as_str().unwrap().to_string();
            let record = sent.get(&id).ok_or(format!("unknown id {id} in inbox of {user}"))?;
            if record.status != "delivered" || m["status"] != "delivered" {
                return Err(format!("blocked message {id} visible in inbox of {user}"));
            }
            if record.recipient != *user {
                return Err(format!("message {id} for {} in inbox of {user}", record.recipient));
            }
            if !inbox_ids.insert(id.clone()) {
                return Err(format!("message {id} twice in inbox of {user}"));
            }
        }
        let expected: HashSet<&String> = sent
            .iter()
            .filter(|(_, s)| s.recipient == *user && s.status == "delivered")
            .map(|(id, _)| id)
            .collect();
        if expected.len() != inbox_ids.len() {
            return Err(format!("inbox of {user}: {} messages, expected {}", inbox_ids.len(), expected.len()));
        }
        for m in messages(app, &format!("/outbox/{user}")).await {
            let id = m["id"].as_str().unwrap().to_string();
            let record = sent.get(&id).ok_or(format!("unknown id {id} in outbox of {user}"))?;
            if record.sender != *user || m["status"] != record.status {
                return Err(format!("outbox of {user} misreports {id}"));
            }
            *seen_in_outbox.entry(id).or_default() += 1;
        }
    }
    if seen_in_outbox.len() != sent.len() || seen_in_outbox.values().any(|&c| c != 1) {
        return Err(format!(
            "outboxes hold {} distinct of {} messages",
            seen_in_outbox.len(),
            sent.len()
        ));
    }
    Ok(())
}

/// Sends `n` synthetic messages round-robin between four users and checks
/// interception soundness through the HTTP views.
pub async fn interception_script(pipeline: &TrainedPipeline, n: usize, seed: u64) -> Result<String, String> {
    let (app, _) = app(pipeline);
    let users: Vec<String> = ["ana", "ben", "cai", "dev"].map(String::from).to_vec();
    let bodies = synth::messages(n, seed);
    let mut sent = HashMap::new();
    for (i, body) in bodies.iter().enumerate() {
        let sender = &users[i % 4];
        let recipient = &users[(i + 1 + (i / 4) % 3) % 4];
        let (status, reply) = send(&app, sender, recipient, body).await;
        if status != StatusCode::CREATED {
            return Err(format!("send {i} answered {status}: {reply}"));
        }
        let want = expected_status(pipeline, body);
        if reply["status"] != want {
            return Err(format!("message {i} got status {}, classifier says {want}", reply["status"]));
        }
        sent.insert(
            reply["id"].as_str().unwrap().to_string(),
            Sent {
                sender: sender.clone(),
                recipient: recipient.clone(),
                status: want,
            },
        );
    }
    let blocked = sent.values().filter(|s| s.status == "blocked").count();
    if blocked == 0 || blocked == n {
        return Err(format!("traffic not mixed: {blocked}/{n} blocked"));
    }
    check_mailboxes(&app, &users, &sent).await?;
    Ok(format!("{n} messages, {blocked} blocked, {} delivered", n - blocked))
}

/// `senders` tasks each send `per_sender` messages at once; afterwards ids
/// are unique and every mailbox invariant holds.
pub async fn concurrent_senders(pipeline: &TrainedPipeline, senders: usize, per_sender: usize) -> Result<String, String> {
    let (app, store) = app(pipeline);
    let bodies = Arc::new(synth::messages(senders * per_sender, 4242));
    let mut tasks = Vec::new();
    for k in 0..senders {
        let app = app.clone();
        let bodies = bodies.clone();
        tasks.push(tokio::spawn(async move {
            let sender = format!("s{k}");
            let mut out = Vec::new();
            for j in 0..per_sender {
                let body = &bodies[k * per_sender + j];
                let recipient = format!("s{}", (k + 1 + j % (senders - 1)) % senders);
                let (status, reply) = send(&app, &sender, &recipient, body).await;
                assert_eq!(status, StatusCode::CREATED, "{reply}");
                out.push((reply["id"].as_str().unwrap().to_string(), sender.clone(), recipient, body.clone(), reply));
            }
            out
        }));
    }
    let mut sent = HashMap::new();
    for task in tasks {
        for (id, sender, recipient, body, reply) in task.await.map_err(|e| e.to_string())? {
            let want = expected_status(pipeline, &body);
            if reply["status"] != want {
                return Err(format!("{id}: status {} but classifier says {want}", reply["status"]));
            }
            if sent.insert(id.clone(), Sent { sender, recipient, status: want }).is_some() {
                return Err(format!("duplicate id {id}"));
            }
        }
    }
    let total = senders * per_sender;
    let snapshot = store.snapshot();
    if snapshot.len() != total || sent.len() != total {
        return Err(format!("store holds {} messages, {} acknowledged, {total} sent", snapshot.len(), sent.len()));
    }
    if !snapshot.windows(2).all(|w| w[0].id < w[1].id && w[0].created_at <= w[1].created_at) {
        return Err("store order is not (created_at, id) ascending".into());
    }
    let users: Vec<String> = (0..senders).map(|k| format!("s{k}")).collect();
    check_mailboxes(&app, &users, &sent).await?;
    Ok(format!("{senders} senders x {per_sender} messages, ids unique, invariants hold"))
}
