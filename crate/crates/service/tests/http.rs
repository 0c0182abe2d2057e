use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tacit_core::document::{compile, DirResolver, SessionConfig};
use tacit_core::syntax::split_sentences;
use tacit_service::http::{router, AppState};
use tower::ServiceExt;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn app() -> Router {
    router(AppState::new(fixtures(), SessionConfig::default()))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn new_session(app: &Router, body: Value) -> String {
    let (status, v) = call(app, Method::POST, "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    v["id"].as_str().unwrap().to_string()
}

async fn command(app: &Router, id: &str, text: &str) -> (StatusCode, Value) {
    call(app, Method::POST, &format!("/sessions/{id}/command"), Some(json!({ "text": text }))).await
}

fn source(file: &str) -> String {
    std::fs::read_to_string(fixtures().join(format!("{file}.tac"))).unwrap()
}

/// The fixture up to (not including) the proof of `lemma`.
fn prefix(file: &str, lemma: &str) -> String {
    let src = source(file);
    let at = src.find(&format!("Lemma {lemma} ")).unwrap();
    let stmt_end = at + src[at..].find(".\n").unwrap() + 1;
    src[..stmt_end].to_string()
}

#[tokio::test]
async fn fresh_sessions_have_no_suggestions() {
    let app = app();
    let id = new_session(&app, json!({})).await;
    let (status, v) = call(&app, Method::GET, &format!("/sessions/{id}/suggest"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v, json!({ "suggestions": [] }));
    command(&app, &id, "Require Prelude.").await;
    command(&app, &id, "Lemma t : O = O.").await;
    let (_, v) = call(&app, Method::GET, &format!("/sessions/{id}/suggest"), None).await;
    assert_eq!(v, json!({ "suggestions": [] }));
}

#[tokio::test]
async fn undo_zero_is_the_identity() {
    let app = app();
    let id = new_session(&app, json!({ "file": "lists.tac" })).await;
    let (_, st) = call(&app, Method::GET, &format!("/sessions/{id}/state"), None).await;
    let pos = st["position"].as_u64().unwrap();
    assert!(pos > 0);
    let (status, v) = call(&app, Method::POST, &format!("/sessions/{id}/undo"), Some(json!({ "k": 0 }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["position"].as_u64(), Some(pos));
    let (_, v) = call(&app, Method::POST, &format!("/sessions/{id}/undo"), Some(json!({ "k": 2 }))).await;
    assert_eq!(v["position"].as_u64(), Some(pos - 2));
    let (status, _) = call(&app, Method::POST, &format!("/sessions/{id}/undo"), Some(json!({ "k": 1000 }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn unknown_ids_are_not_found() {
    let app = app();
    let (status, _) = call(&app, Method::GET, "/sessions/nope/state", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = command(&app, "nope", "intros.").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let id = new_session(&app, json!({})).await;
    let (status, _) = call(&app, Method::GET, &format!("/sessions/{id}/search/j99"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = new_session_raw(&app, json!({ "file": "missing.tac" })).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = new_session_raw(&app, json!({ "file": "../Cargo.toml" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

async fn new_session_raw(app: &Router, body: Value) -> (StatusCode, Value) {
    call(app, Method::POST, "/sessions", Some(body)).await
}

#[tokio::test]
async fn command_errors_map_to_status_codes() {
    let app = app();
    let id = new_session(&app, json!({ "source": "Require Prelude." })).await;
    let (status, v) = command(&app, &id, "Lemma t : O = .").await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{v}");
    assert!(v["at"].is_u64());
    assert_eq!(v["ok"], json!(false));
    let (status, _) = command(&app, &id, "intros.").await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, v) = command(&app, &id, "Lemma t : S O = S O.").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["proof_state"]["hyps"], json!([]));
    let (status, _) = command(&app, &id, "symmetry. symmetry.").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = command(&app, &id, "Qed.").await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, v) = command(&app, &id, "reflexivity.").await;
    assert_eq!(status, StatusCode::OK);
    assert!(v.get("proof_state").is_none());
    let (_, st) = call(&app, Method::GET, &format!("/sessions/{id}/state"), None).await;
    assert_eq!(st["commands"], json!(["Require Prelude.", "Lemma t : S O = S O.", "reflexivity."]));
    assert_eq!(st["goals"], json!([]));
}

#[tokio::test]
async fn suggestions_follow_the_manual_proof() {
    let app = app();
    let id = new_session(&app, json!({ "source": prefix("lists", "concat_assoc") })).await;
    let (_, v) = call(&app, Method::GET, &format!("/sessions/{id}/suggest"), None).await;
    let list = v["suggestions"].as_array().unwrap();
    assert_eq!(list[0]["tactic"], json!("intros"));
    assert!(list[0]["score"].as_f64().unwrap() > 0.0);
    let (_, v) = command(&app, &id, "intros.").await;
    let hyps: Vec<&str> = v["proof_state"]["hyps"].as_array().unwrap().iter().map(|h| h[0].as_str().unwrap()).collect();
    assert_eq!(hyps, ["ls₁", "ls₂", "ls₃"]);
}

#[tokio::test]
async fn search_command_yields_a_finished_job() {
    let app = app();
    let id = new_session(&app, json!({ "source": prefix("lists", "concat_assoc") })).await;
    let (status, v) = command(&app, &id, "search.").await;
    assert_eq!(status, StatusCode::OK, "{v}");
    let job = v["job"].as_str().unwrap();
    let cache = v["messages"][0].as_str().unwrap().to_string();
    let (_, j) = call(&app, Method::GET, &format!("/sessions/{id}/search/{job}"), None).await;
    assert_eq!(j["status"], json!("found"));
    assert_eq!(j["reconstruction"], json!(cache));
    assert!(cache.starts_with("search failing ("));
    assert!(j["trace"].as_str().unwrap().starts_with('.'));
    let (status, _) = command(&app, &id, "Qed.").await;
    assert_eq!(status, StatusCode::OK);
}

async fn poll(app: &Router, id: &str, job: &str) -> Value {
    for _ in 0..600 {
        let (_, j) = call(app, Method::GET, &format!("/sessions/{id}/search/{job}"), None).await;
        if j["status"] != json!("running") {
            return j;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    panic!("job did not finish");
}

#[tokio::test]
async fn background_search_does_not_touch_the_session() {
    let app = app();
    let id = new_session(&app, json!({ "source": prefix("lists", "concat_assoc") })).await;
    let (_, before) = call(&app, Method::GET, &format!("/sessions/{id}/state"), None).await;
    let (status, v) = call(&app, Method::POST, &format!("/sessions/{id}/search"), Some(json!({ "nodes": 5000 }))).await;
    assert_eq!(status, StatusCode::OK);
    let job = v["job"].as_str().unwrap().to_string();
    let j = poll(&app, &id, &job).await;
    assert_eq!(j["status"], json!("found"), "{j}");
    assert!(j["expansions"].as_u64().unwrap() > 0);
    let (_, after) = call(&app, Method::GET, &format!("/sessions/{id}/state"), None).await;
    assert_eq!(before, after);
    let (status, v) = command(&app, &id, j["reconstruction"].as_str().unwrap()).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    let (_, j2) = call(&app, Method::GET, &format!("/sessions/{id}/search/{}", v["job"].as_str().unwrap()), None).await;
    assert_eq!(j2["expansions"], json!(0));
}

#[tokio::test]
async fn search_without_a_goal_conflicts() {
    let app = app();
    let id = new_session(&app, json!({})).await;
    let (status, _) = call(&app, Method::POST, &format!("/sessions/{id}/search"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn one_search_at_a_time_and_deletion_cancels() {
    let app = app();
    let src = format!("{}\nLemma hard : ∀ n m p, add n (add m p) = add p (add n (S m)).", source("nat"));
    let id = new_session(&app, json!({ "source": src })).await;
    let body = json!({ "nodes": 100_000_000u64, "seconds": 120.0 });
    let (status, v) = call(&app, Method::POST, &format!("/sessions/{id}/search"), Some(body.clone())).await;
    assert_eq!(status, StatusCode::OK);
    let job = v["job"].as_str().unwrap().to_string();
    let (_, j) = call(&app, Method::GET, &format!("/sessions/{id}/search/{job}"), None).await;
    if j["status"] == json!("running") {
        let (status, _) = call(&app, Method::POST, &format!("/sessions/{id}/search"), Some(body)).await;
        assert_eq!(status, StatusCode::CONFLICT);
    }
    let (status, _) = call(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    let (status, _) = call(&app, Method::GET, &format!("/sessions/{id}/state"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn http_stepping_digest_equals_compiled_digest() {
    for file in ["lists", "nat"] {
        let app = app();
        let id = new_session(&app, json!({})).await;
        for s in split_sentences(&source(file)).unwrap() {
            let (status, v) = command(&app, &id, &s.text).await;
            assert_eq!(status, StatusCode::OK, "{}: {v}", s.text);
        }
        let (_, d) = call(&app, Method::GET, &format!("/sessions/{id}/digest"), None).await;
        let resolver = Arc::new(DirResolver::new(vec![fixtures()]));
        let unit = compile(file, &source(file), resolver, &SessionConfig::default()).unwrap();
        assert_eq!(d["digest"], json!(unit.digest()));
        assert_eq!(d["records"], json!(unit.records.len()));
    }
}
