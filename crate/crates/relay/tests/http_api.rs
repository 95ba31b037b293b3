mod support;

use std::sync::{Arc, OnceLock};

use axum::http::{Method, StatusCode};
use sentinel_core::{TrainedPipeline, Variant};
use sentinel_relay::{router, AppState, MessageStore, PipelineScreen};
use serde_json::json;
use support::{call, messages, send};
use tokio::io::{AsyncReadExt, AsyncWriteExt};

fn pipeline() -> &'static TrainedPipeline {
    static P: OnceLock<TrainedPipeline> = OnceLock::new();
    P.get_or_init(|| support::trained(Variant::Mnb, 3000, 21))
}

const BULLYING: &str = "you pathetic worthless idiot, nobody wants you here";
const BENIGN: &str = "have a great day";

#[tokio::test]
async fn classify_benign_and_bullying() {
    let (app, _) = support::app(pipeline());
    let (status, body) = call(&app, Method::POST, "/classify", Some(json!({ "text": BENIGN }).to_string())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["label"], 0);
    assert_eq!(body["scores"].as_array().unwrap().len(), 2);
    assert!(body["elapsed_us"].is_u64());
    let (_, body) = call(&app, Method::POST, "/classify", Some(json!({ "text": BULLYING }).to_string())).await;
    assert_eq!(body["label"], 1);
}

#[tokio::test]
async fn classify_empty_text_uses_priors() {
    let (app, _) = support::app(pipeline());
    let (status, body) = call(&app, Method::POST, "/classify", Some(r#"{"text": ""}"#.into())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["label"], 0);
}

#[tokio::test]
async fn classify_rejects_malformed_bodies() {
    let (app, _) = support::app(pipeline());
    for bad in ["{}", r#"{"text": null}"#, r#"{"text": 3}"#, "not json", ""] {
        let (status, body) = call(&app, Method::POST, "/classify", Some(bad.into())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad:?}");
        assert!(body["error"].is_string());
    }
}

#[tokio::test]
async fn without_model_service_is_degraded() {
    let app = router(AppState::new(None, MessageStore::new()));
    let (status, _) = call(&app, Method::POST, "/classify", Some(r#"{"text": "hi"}"#.into())).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    let (status, _) = send(&app, "a", "b", "hi").await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    let (status, health) = call(&app, Method::GET, "/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(health["status"], "degraded");
    assert!(health["vocab_size"].is_null());
}

#[tokio::test]
async fn health_reports_loaded_model() {
    let (app, _) = support::app(pipeline());
    let (status, first) = call(&app, Method::GET, "/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(first["status"], "ok");
    assert_eq!(first["model_variant"], "mnb");
    assert_eq!(first["vocab_size"], pipeline().vocabulary().len());
    assert_eq!(first["format_version"], 1);
    let (_, second) = call(&app, Method::GET, "/health", None).await;
    assert_eq!(first, second);
}

#[tokio::test]
async fn blocked_message_stays_with_sender() {
    let (app, _) = support::app(pipeline());
    let (status, reply) = send(&app, "alice", "bob", BULLYING).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(reply["status"], "blocked");
    assert!(reply["score"].as_f64().unwrap() > 0.0);
    assert!(messages(&app, "/inbox/bob").await.is_empty());
    let outbox = messages(&app, "/outbox/alice").await;
    assert_eq!(outbox.len(), 1);
    assert_eq!(outbox[0]["status"], "blocked");
    assert_eq!(outbox[0]["body"], BULLYING);
}

#[tokio::test]
async fn delivered_message_reaches_recipient() {
    let (app, _) = support::app(pipeline());
    let (_, reply) = send(&app, "alice", "bob", BENIGN).await;
    assert_eq!(reply["status"], "delivered");
    let inbox = messages(&app, "/inbox/bob").await;
    assert_eq!(inbox.len(), 1);
    assert_eq!(inbox[0]["id"], reply["id"]);
    assert_eq!(inbox[0]["sender"], "alice");
    assert!(inbox[0]["created_at"].is_string());
    assert!(inbox[0]["classify_elapsed_us"].is_u64());
}

#[tokio::test]
async fn one_delivered_one_blocked_inbox_lists_delivered_only() {
    let (app, _) = support::app(pipeline());
    let (_, ok) = send(&app, "alice", "bob", BENIGN).await;
    send(&app, "alice", "bob", BULLYING).await;
    let inbox = messages(&app, "/inbox/bob").await;
    assert_eq!(inbox.len(), 1);
    assert_eq!(inbox[0]["id"], ok["id"]);
    assert_eq!(messages(&app, "/outbox/alice").await.len(), 2);
}

#[tokio::test]
async fn send_validates_fields() {
    let (app, store) = support::app(pipeline());
    for bad in [
        json!({ "recipient": "b", "body": "hi" }),
        json!({ "sender": "a", "body": "hi" }),
        json!({ "sender": "a", "recipient": "b" }),
        json!({ "sender": "", "recipient": "b", "body": "hi" }),
        json!({ "sender": "a", "recipient": "b", "body": "   " }),
        json!({ "sender": "a", "recipient": "b", "body": null }),
    ] {
        let (status, _) = call(&app, Method::POST, "/messages", Some(bad.to_string())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad}");
    }
    assert!(store.is_empty());
}

#[tokio::test]
async fn since_cursor_polls_newer_messages() {
    let (app, _) = support::app(pipeline());
    assert!(messages(&app, "/inbox/bob").await.is_empty());
    let (_, first) = send(&app, "alice", "bob", "thanks for the fix").await;
    let (_, second) = send(&app, "alice", "bob", BENIGN).await;
    let cursor = first["id"].as_str().unwrap();
    let newer = messages(&app, &format!("/inbox/bob?since={cursor}")).await;
    assert_eq!(newer.len(), 1);
    assert_eq!(newer[0]["id"], second["id"]);
    let outbox = messages(&app, &format!("/outbox/alice?since={}", second["id"].as_str().unwrap())).await;
    assert!(outbox.is_empty());
    let (status, _) = call(&app, Method::GET, "/inbox/bob?since=banana", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn outbox_of_unknown_user_is_empty() {
    let (app, _) = support::app(pipeline());
    assert!(messages(&app, "/outbox/nobody").await.is_empty());
}

#[tokio::test]
async fn unknown_routes_and_methods() {
    let (app, _) = support::app(pipeline());
    let (status, body) = call(&app, Method::GET, "/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(body["error"].is_string());
    let (status, _) = call(&app, Method::GET, "/classify", None).await;
    assert_eq!(status, StatusCode::METHOD_NOT_ALLOWED);
}

#[tokio::test]
async fn cors_is_permissive() {
    let (app, _) = support::app(pipeline());
    let request = axum::http::Request::builder()
        .method(Method::OPTIONS)
        .uri("/messages")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "POST")
        .body(axum::body::Body::empty())
        .unwrap();
    let response = tower::ServiceExt::oneshot(app, request).await.unwrap();
    assert_eq!(response.headers()["access-control-allow-origin"], "*");
}

#[tokio::test]
async fn interception_soundness_200_messages() {
    let summary = support::interception_script(pipeline(), 200, 77).await.unwrap();
    println!("{summary}");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_senders_keep_invariants() {
    let summary = support::concurrent_senders(pipeline(), 8, 40).await.unwrap();
    println!("{summary}");
}

#[tokio::test]
async fn serves_over_tcp_and_shuts_down() {
    let state = AppState::new(Some(Arc::new(PipelineScreen::new(pipeline().clone()))), MessageStore::new());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(sentinel_relay::serve(listener, state, async {
        let _ = stopped.await;
    }));

    let mut stream = tokio::net::TcpStream::connect(addr).await.unwrap();
    stream
        .write_all(b"GET /health HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).await.unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains("\"status\":\"ok\""));

    stop.send(()).unwrap();
    server.await.unwrap().unwrap();
}

#[tokio::test]
async fn log_file_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("messages.jsonl");
    let screen = Arc::new(PipelineScreen::new(pipeline().clone()));
    let app = router(AppState::new(Some(screen.clone()), MessageStore::with_log(&path).unwrap()));
    let (_, first) = send(&app, "alice", "bob", BENIGN).await;
    drop(app);

    let app = router(AppState::new(Some(screen), MessageStore::with_log(&path).unwrap()));
    let (_, second) = send(&app, "alice", "bob", "thanks for the fix").await;
    assert_ne!(first["id"], second["id"]);
    let cursor = first["id"].as_str().unwrap();
    let newer = messages(&app, &format!("/inbox/bob?since={cursor}")).await;
    assert_eq!(newer.len(), 1);
    assert_eq!(messages(&app, "/inbox/bob").await.len(), 2);
}
