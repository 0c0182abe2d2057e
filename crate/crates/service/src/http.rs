//! JSON session API.
//!
//! Commands and undos on one session are serialized by its lock. Search jobs
//! run on a copy of the current goal, environment and model, so they never
//! touch the session they were started from.

use std::collections::HashMap;
use std::path::{Component, Path as FsPath, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tacit_core::document::{DirResolver, DocError, Session, SessionConfig, SUGGEST_LIMIT};
use tacit_core::learner::encode_state;
use tacit_core::search::{search, suggest, SearchOutcome, Status};
use tacit_core::tactic::print_cache;

pub struct AppState {
    root: PathBuf,
    config: SessionConfig,
    next: AtomicU64,
    sessions: Mutex<HashMap<String, Arc<Slot>>>,
}

impl AppState {
    pub fn new(root: PathBuf, config: SessionConfig) -> Arc<AppState> {
        Arc::new(AppState { root, config, next: AtomicU64::new(1), sessions: Mutex::new(HashMap::new()) })
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown session `{id}`")))
    }
}

struct Slot {
    session: Mutex<Session>,
    jobs: Mutex<Jobs>,
}

#[derive(Default)]
struct Jobs {
    next: u64,
    map: HashMap<String, Arc<Job>>,
}

impl Jobs {
    fn insert(&mut self, job: Arc<Job>) -> String {
        self.next += 1;
        let id = format!("j{}", self.next);
        self.map.insert(id.clone(), job);
        id
    }

    fn running(&self) -> bool {
        self.map.values().any(|j| j.outcome.lock().unwrap().is_none())
    }
}

struct Job {
    started: Instant,
    progress: Arc<AtomicUsize>,
    cancel: Arc<AtomicBool>,
    outcome: Mutex<Option<SearchOutcome>>,
}

impl Job {
    fn finished(outcome: SearchOutcome) -> Job {
        Job {
            started: Instant::now(),
            progress: Arc::new(AtomicUsize::new(outcome.expansions)),
            cancel: Arc::new(AtomicBool::new(false)),
            outcome: Mutex::new(Some(outcome)),
        }
    }

    fn view(&self) -> Value {
        match &*self.outcome.lock().unwrap() {
            None => json!({
                "status": "running",
                "expansions": self.progress.load(Ordering::Relaxed),
                "elapsed": self.started.elapsed().as_secs_f64(),
            }),
            Some(o) => {
                let status = match o.status {
                    Status::Found => "found",
                    Status::Exhausted => "exhausted",
                    Status::Cancelled => "cancelled",
                };
                let mut v = json!({ "status": status, "expansions": o.expansions, "elapsed": o.elapsed });
                if o.found() {
                    v["proof"] = json!(o.proof.iter().map(|t| t.to_string()).collect::<Vec<_>>());
                    v["trace"] = json!(o.trace);
                    v["reconstruction"] = json!(print_cache(&o.proof));
                }
                v
            }
        }
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> ApiError {
        ApiError { status, body: json!({ "ok": false, "error": message.into() }) }
    }

    fn doc(e: &DocError, position: usize) -> ApiError {
        let mut pos = None;
        let mut inner = e;
        while let DocError::At { pos: p, error } = inner {
            pos.get_or_insert(*p);
            inner = error;
        }
        let status = match inner {
            DocError::Parse(p) => {
                pos = Some(pos.unwrap_or(0) + p.pos);
                StatusCode::BAD_REQUEST
            }
            _ => StatusCode::CONFLICT,
        };
        let mut body = json!({ "ok": false, "error": e.to_string(), "position": position, "messages": [e.to_string()] });
        if let Some(p) = pos {
            body["at"] = json!(p);
        }
        ApiError { status, body }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", axum::routing::delete(remove))
        .route("/sessions/{id}/command", post(command))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/state", get(session_state))
        .route("/sessions/{id}/suggest", get(suggestions))
        .route("/sessions/{id}/digest", get(digest))
        .route("/sessions/{id}/search", post(start_search))
        .route("/sessions/{id}/search/{job}", get(job_status))
        .with_state(state)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

fn relative(root: &FsPath, file: &str) -> Result<PathBuf, ApiError> {
    let rel = FsPath::new(file);
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, format!("`{file}` is not a path inside the corpus")));
    }
    Ok(root.join(rel))
}

#[derive(Deserialize, Default)]
struct CreateBody {
    /// Corpus file to pre-execute, relative to the server root.
    file: Option<String>,
    /// Source text to pre-execute.
    source: Option<String>,
}

async fn create(State(app): State<Arc<AppState>>, body: Option<Json<CreateBody>>) -> ApiResult {
    let body = body.map(|Json(b)| b).unwrap_or_default();
    let mut src = String::new();
    if let Some(file) = &body.file {
        let path = relative(&app.root, file)?;
        src = std::fs::read_to_string(&path)
            .map_err(|e| ApiError::new(StatusCode::NOT_FOUND, format!("{}: {e}", path.display())))?;
    }
    if let Some(s) = &body.source {
        src.push('\n');
        src.push_str(s);
    }
    let resolver = Arc::new(DirResolver::with_config(vec![app.root.clone()], app.config.clone()));
    let config = app.config.clone();
    let session = blocking(move || {
        let mut session = Session::new(resolver, config).map_err(|e| ApiError::doc(&e, 0))?;
        session.execute_source(&src).map_err(|e| ApiError::doc(&e, session.position()))?;
        Ok::<_, ApiError>(session)
    })
    .await??;
    let id = format!("s{}", app.next.fetch_add(1, Ordering::Relaxed));
    let position = session.position();
    let slot = Arc::new(Slot { session: Mutex::new(session), jobs: Mutex::default() });
    app.sessions.lock().unwrap().insert(id.clone(), slot);
    Ok(Json(json!({ "id": id, "position": position })))
}

async fn remove(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    let slot = app
        .sessions
        .lock()
        .unwrap()
        .remove(&id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown session `{id}`")))?;
    for job in slot.jobs.lock().unwrap().map.values() {
        job.cancel.store(true, Ordering::Relaxed);
    }
    Ok(StatusCode::NO_CONTENT)
}

fn proof_state(session: &Session) -> Option<Value> {
    let goal = session.state().goals().first()?;
    serde_json::to_value(encode_state(goal)).ok()
}

#[derive(Deserialize)]
struct CommandBody {
    text: String,
}

async fn command(State(app): State<Arc<AppState>>, Path(id): Path<String>, Json(body): Json<CommandBody>) -> ApiResult {
    let slot = app.slot(&id)?;
    blocking(move || {
        let mut session = slot.session.lock().unwrap();
        let reply = session.execute(&body.text).map_err(|e| ApiError::doc(&e, session.position()))?;
        let mut v = json!({
            "ok": true,
            "position": session.position(),
            "messages": reply.messages,
        });
        if let Some(ps) = proof_state(&session) {
            v["proof_state"] = ps;
        }
        if let Some(outcome) = reply.search {
            let job = slot.jobs.lock().unwrap().insert(Arc::new(Job::finished(outcome)));
            v["job"] = json!(job);
        }
        Ok(Json(v))
    })
    .await?
}

#[derive(Deserialize)]
struct UndoBody {
    #[serde(default = "one")]
    k: usize,
}

fn one() -> usize {
    1
}

async fn undo(State(app): State<Arc<AppState>>, Path(id): Path<String>, Json(body): Json<UndoBody>) -> ApiResult {
    let slot = app.slot(&id)?;
    let mut session = slot.session.lock().unwrap();
    session.undo(body.k).map_err(|e| ApiError::doc(&e, session.position()))?;
    Ok(Json(json!({ "position": session.position() })))
}

async fn session_state(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let slot = app.slot(&id)?;
    let session = slot.session.lock().unwrap();
    let st = session.state();
    let goals: Vec<Value> = st.goals().iter().map(|g| serde_json::to_value(encode_state(g)).unwrap_or(Value::Null)).collect();
    Ok(Json(json!({
        "position": session.position(),
        "lemma": st.proof.as_ref().map(|p| p.name.to_string()),
        "goals": goals,
        "commands": session.commands().collect::<Vec<_>>(),
    })))
}

async fn suggestions(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let slot = app.slot(&id)?;
    let (model, goal) = {
        let session = slot.session.lock().unwrap();
        let st = session.state();
        (st.model.clone(), st.goals().first().cloned())
    };
    let Some(goal) = goal else {
        return Ok(Json(json!({ "suggestions": [] })));
    };
    let mut list = blocking(move || suggest(&*model, &goal)).await?;
    list.truncate(SUGGEST_LIMIT);
    let items: Vec<Value> = list.iter().map(|s| json!({ "score": s.score, "tactic": s.tactic.printed() })).collect();
    Ok(Json(json!({ "suggestions": items })))
}

async fn digest(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let slot = app.slot(&id)?;
    let session = slot.session.lock().unwrap();
    let st = session.state();
    Ok(Json(json!({ "digest": st.digest(), "records": st.records.len() })))
}

#[derive(Deserialize, Default)]
struct SearchBody {
    nodes: Option<usize>,
    seconds: Option<f64>,
}

async fn start_search(State(app): State<Arc<AppState>>, Path(id): Path<String>, body: Option<Json<SearchBody>>) -> ApiResult {
    let body = body.map(|Json(b)| b).unwrap_or_default();
    let slot = app.slot(&id)?;
    let (env, model, goal) = {
        let session = slot.session.lock().unwrap();
        let st = session.state();
        let goal = st
            .goals()
            .first()
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "no open goal to search for"))?;
        (st.env.clone(), st.model.clone(), goal)
    };
    let mut budget = app.config.budget.clone();
    if let Some(n) = body.nodes {
        budget.nodes = n;
    }
    if let Some(s) = body.seconds {
        budget.seconds = Some(s);
    }
    let job = Arc::new(Job {
        started: Instant::now(),
        progress: Arc::new(AtomicUsize::new(0)),
        cancel: Arc::new(AtomicBool::new(false)),
        outcome: Mutex::new(None),
    });
    budget.progress = Some(job.progress.clone());
    budget.cancel = Some(job.cancel.clone());
    let id = {
        let mut jobs = slot.jobs.lock().unwrap();
        if jobs.running() {
            return Err(ApiError::new(StatusCode::CONFLICT, "a search is already running in this session"));
        }
        jobs.insert(job.clone())
    };
    std::thread::spawn(move || {
        let outcome = search(&env, &*model, &goal, &budget);
        *job.outcome.lock().unwrap() = Some(outcome);
    });
    Ok(Json(json!({ "job": id })))
}

async fn job_status(State(app): State<Arc<AppState>>, Path((id, job)): Path<(String, String)>) -> ApiResult {
    let slot = app.slot(&id)?;
    let job = slot
        .jobs
        .lock()
        .unwrap()
        .map
        .get(&job)
        .cloned()
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown job `{job}`")))?;
    Ok(Json(job.view()))
}
