//! HTTP service: stores scenes, sessions, traces and extracted assertions,
//! reports POAG statistics and runs games server-side so clients never
//! evaluate rules themselves.

pub mod stats;
pub mod store;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path as UrlPath, Query, Request, State};
use axum::http::{header, HeaderMap, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gecka_core::io::assertions::{assertions_to_tsv, Assertion};
use gecka_core::io::session::{Session, SessionError};
use gecka_core::io::{apply_session, extract_assertions, parse_session_xml, write_session_xml, XmlError};
use gecka_core::sim::{parse_header, Command, Game, GameConfig, GameError};
use gecka_core::{KnowledgeBase, Scene, SceneId};
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tower_http::services::ServeDir;

pub use stats::{poag_stats, PoagStat};
pub use store::{Collection, Store, StoreRecord};

pub const DEFAULT_PORT: u16 = 8077;
const BODY_LIMIT: usize = 32 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub host: String,
    pub port: u16,
    pub data_dir: PathBuf,
    pub static_dir: Option<PathBuf>,
    /// Bearer token required on mutating routes when set.
    pub token: Option<String>,
}

pub struct AppState {
    store: Mutex<Store>,
    kb: RwLock<KnowledgeBase>,
    games: Mutex<HashMap<String, Arc<Mutex<Game>>>>,
    next_game: AtomicU64,
    token: Option<String>,
}

impl AppState {
    /// Opens the store under `data_dir` and rebuilds the knowledge base by
    /// replaying the stored sessions in arrival order.
    pub fn open(data_dir: &Path, token: Option<String>) -> io::Result<Arc<AppState>> {
        let store = Store::open(data_dir)?;
        let mut kb = KnowledgeBase::new();
        for rec in store.all(Collection::Sessions) {
            let session = stored_session(rec)?;
            apply_session(&mut kb, &session).map_err(|e| {
                io::Error::new(io::ErrorKind::InvalidData, format!("session {}: {e}", rec.id))
            })?;
        }
        Ok(Arc::new(AppState {
            store: Mutex::new(store),
            kb: RwLock::new(kb),
            games: Mutex::new(HashMap::new()),
            next_game: AtomicU64::new(1),
            token,
        }))
    }

    pub fn knowledge_base(&self) -> KnowledgeBase {
        self.kb.read().expect("kb lock").clone()
    }
}

fn stored_session(rec: &StoreRecord) -> io::Result<Session> {
    serde_json::from_value(rec.body["session"].clone())
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("session {}: {e}", rec.id)))
}

/// Every stored session, in arrival order.
pub fn stored_sessions(store: &Store) -> io::Result<Vec<Session>> {
    store.all(Collection::Sessions).map(stored_session).collect()
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
    line: Option<u64>,
    seq: Option<u32>,
    extra: Option<Value>,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            kind,
            message: message.into(),
            line: None,
            seq: None,
            extra: None,
        }
    }

    fn bad(kind: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, kind, message)
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not-found", format!("no {what} `{id}`"))
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
    }

    fn json(e: serde_json::Error) -> Self {
        let mut err = Self::bad("invalid-json", e.to_string());
        err.line = Some(e.line() as u64);
        err
    }
}

impl From<XmlError> for ApiError {
    fn from(e: XmlError) -> Self {
        let kind = match e {
            XmlError::Malformed { .. } => "malformed-xml",
            XmlError::UnknownKind { .. } => "unknown-kind",
            XmlError::DuplicateSequence { .. } => "duplicate-sequence",
            XmlError::SequenceGap { .. } => "sequence-gap",
            XmlError::Invalid { .. } => "invalid-session",
        };
        let mut err = ApiError::bad(kind, e.to_string());
        err.line = Some(u64::from(e.line()));
        err
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let seq = match &e {
            SessionError::BadSequence { found, .. } => *found,
            SessionError::DanglingReference { seq, .. } | SessionError::Invalid { seq, .. } => *seq,
        };
        let mut err = ApiError::bad("invalid-session", e.to_string());
        err.seq = Some(seq);
        err
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.kind, "message": self.message });
        if let Some(l) = self.line {
            body["line"] = json!(l);
        }
        if let Some(s) = self.seq {
            body["seq"] = json!(s);
        }
        if let Some(x) = self.extra {
            body["details"] = x;
        }
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: Arc<AppState>, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/sessions", post(post_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/scenes/{id}", get(get_scene).put(put_scene))
        .route("/api/traces", post(post_trace))
        .route("/api/traces/{id}", get(get_trace))
        .route("/api/assertions", get(get_assertions))
        .route("/api/stats/poags", get(get_stats))
        .route("/api/games", post(create_game))
        .route("/api/games/{id}", get(get_game))
        .route("/api/games/{id}/step", post(step_game))
        .layer(middleware::from_fn_with_state(state.clone(), require_token))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api
            .route("/", get(|| async { "gecka server: API under /api\n" }))
            .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not-found", "no such route") }),
    }
}

async fn require_token(State(st): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    let mutating = !matches!(*req.method(), Method::GET | Method::HEAD | Method::OPTIONS);
    if let (true, Some(token)) = (mutating, &st.token) {
        let ok = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .is_some_and(|t| t == token);
        if !ok {
            return ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong bearer token")
                .into_response();
        }
    }
    next.run(req).await
}

fn is_xml(headers: &HeaderMap, text: &str) -> bool {
    let ct = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("");
    ct.contains("xml") || (!ct.contains("json") && text.trim_start().starts_with('<'))
}

fn utf8(body: &Bytes) -> ApiResult<&str> {
    std::str::from_utf8(body).map_err(|e| ApiError::bad("invalid-utf8", e.to_string()))
}

/// Hash of everything but the id, designer and timestamp.
fn content_hash(s: &Session) -> String {
    let content = json!({ "scenes": s.scenes, "actions": s.actions });
    format!("{:x}", Sha256::digest(content.to_string().as_bytes()))
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

async fn post_session(State(st): State<Arc<AppState>>, headers: HeaderMap, body: Bytes) -> ApiResult<Response> {
    let text = utf8(&body)?;
    let session: Session = if is_xml(&headers, text) {
        parse_session_xml(text)?
    } else {
        serde_json::from_str(text).map_err(ApiError::json)?
    };
    if session.id.trim().is_empty() {
        return Err(ApiError::bad("invalid-session", "session id is empty"));
    }
    let hash = content_hash(&session);
    let mut store = lock(&st.store);
    for rec in store.all(Collection::Sessions) {
        let same = rec.body["hash"] == json!(hash)
            && rec.body["session"]["designer"] == json!(session.designer)
            && rec.body["session"]["timestamp"] == json!(session.timestamp);
        if same {
            let id = rec.id.clone();
            return Ok((StatusCode::OK, Json(json!({ "id": id, "created": false }))).into_response());
        }
    }
    if store.get(Collection::Sessions, &session.id).is_some() {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "conflict",
            format!("session `{}` already exists with different content", session.id),
        ));
    }
    let mut kb = st.knowledge_base();
    let assertions = extract_assertions(&session, &kb)?;
    apply_session(&mut kb, &session).map_err(|e| ApiError::bad("invalid-session", e.to_string()))?;
    let body = json!({ "session": session, "hash": hash });
    store.put(Collection::Sessions, &session.id, body).map_err(ApiError::internal)?;
    let count = assertions.len();
    store
        .put(Collection::Assertions, &session.id, json!(assertions))
        .map_err(ApiError::internal)?;
    *st.kb.write().expect("kb lock") = kb;
    Ok((
        StatusCode::CREATED,
        Json(json!({ "id": session.id, "created": true, "assertions": count })),
    )
        .into_response())
}

fn wants_xml(headers: &HeaderMap) -> bool {
    headers
        .get(header::ACCEPT)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.contains("xml"))
}

async fn get_session(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, headers: HeaderMap) -> ApiResult<Response> {
    let store = lock(&st.store);
    let rec = store
        .get(Collection::Sessions, &id)
        .ok_or_else(|| ApiError::not_found("session", &id))?;
    let session = stored_session(rec).map_err(ApiError::internal)?;
    if wants_xml(&headers) {
        Ok(([(header::CONTENT_TYPE, "application/xml")], write_session_xml(&session)).into_response())
    } else {
        Ok(Json(session).into_response())
    }
}

async fn put_scene(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<Response> {
    let scene: Scene = serde_json::from_str(utf8(&body)?).map_err(ApiError::json)?;
    if scene.id.0 != id {
        return Err(ApiError::bad(
            "id-mismatch",
            format!("path id `{id}` differs from scene id `{}`", scene.id),
        ));
    }
    let report = gecka_core::scene::validate_scene(&scene, &st.knowledge_base());
    let mut store = lock(&st.store);
    let existed = store.get(Collection::Scenes, &id).is_some();
    let value = serde_json::to_value(&scene).map_err(ApiError::internal)?;
    store.put(Collection::Scenes, &id, value).map_err(ApiError::internal)?;
    let status = if existed { StatusCode::OK } else { StatusCode::CREATED };
    Ok((status, Json(json!({ "id": id, "issues": report.issues })).into_response()).into_response())
}

fn load_scene(store: &Store, id: &str) -> ApiResult<Option<Scene>> {
    store
        .get(Collection::Scenes, id)
        .map(|rec| serde_json::from_value(rec.body.clone()).map_err(ApiError::internal))
        .transpose()
}

async fn get_scene(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let store = lock(&st.store);
    let scene = load_scene(&store, &id)?.ok_or_else(|| ApiError::not_found("scene", &id))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], scene.to_canonical_json()).into_response())
}

async fn post_trace(State(st): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let text = utf8(&body)?;
    let header = parse_header(text).map_err(|e| {
        let mut err = ApiError::bad("invalid-trace", e.to_string());
        err.line = Some(1);
        err
    })?;
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(line).map_err(|e| {
            let mut err = ApiError::bad("invalid-trace", e.to_string());
            err.line = Some(i as u64 + 1);
            err
        })?;
        if !(v["turn"].is_u64() && v["kind"].is_string() && v.get("payload").is_some()) {
            let mut err = ApiError::bad("invalid-trace", "expected {turn, kind, payload}");
            err.line = Some(i as u64 + 1);
            return Err(err);
        }
    }
    let digest = format!("{:x}", Sha256::digest(text.as_bytes()));
    let id = format!("trace-{}", &digest[..16]);
    let mut store = lock(&st.store);
    if store.get(Collection::Traces, &id).is_some() {
        return Ok((StatusCode::OK, Json(json!({ "id": id, "created": false }))).into_response());
    }
    store
        .put(Collection::Traces, &id, json!({ "header": header, "text": text }))
        .map_err(ApiError::internal)?;
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "created": true }))).into_response())
}

async fn get_trace(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let store = lock(&st.store);
    let rec = store
        .get(Collection::Traces, &id)
        .ok_or_else(|| ApiError::not_found("trace", &id))?;
    let text = rec.body["text"].as_str().unwrap_or_default().to_string();
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

#[derive(Deserialize)]
struct AssertionQuery {
    session: Option<String>,
    format: Option<String>,
}

async fn get_assertions(State(st): State<Arc<AppState>>, Query(q): Query<AssertionQuery>) -> ApiResult<Response> {
    let store = lock(&st.store);
    let records: Vec<&StoreRecord> = match &q.session {
        Some(id) => vec![store
            .get(Collection::Assertions, id)
            .ok_or_else(|| ApiError::not_found("session", id))?],
        None => store.all(Collection::Assertions).collect(),
    };
    let mut all: Vec<Assertion> = Vec::new();
    for rec in records {
        let list: Vec<Assertion> = serde_json::from_value(rec.body.clone()).map_err(ApiError::internal)?;
        all.extend(list);
    }
    match q.format.as_deref() {
        None | Some("json") => Ok(Json(all).into_response()),
        Some("tsv") => Ok((
            [(header::CONTENT_TYPE, "text/tab-separated-values; charset=utf-8")],
            assertions_to_tsv(&all),
        )
            .into_response()),
        Some(other) => Err(ApiError::bad("bad-query", format!("unknown format `{other}`"))),
    }
}

async fn get_stats(State(st): State<Arc<AppState>>, Query(q): Query<BTreeMap<String, String>>) -> ApiResult<Response> {
    let limit = match q.get("limit") {
        None => 10,
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n >= 1 => n,
            _ => return Err(ApiError::bad("bad-query", format!("limit must be a positive integer, got `{v}`"))),
        },
    };
    let store = lock(&st.store);
    let sessions = stored_sessions(&store).map_err(ApiError::internal)?;
    Ok(Json(poag_stats(&sessions, limit)).into_response())
}

#[derive(Deserialize)]
struct NewGame {
    scene: String,
    #[serde(default)]
    seed: u64,
    vision_radius: Option<u32>,
    health: Option<u32>,
}

/// The start scene plus every stored scene reachable through exit targets.
fn scene_closure(store: &Store, start: &str) -> ApiResult<BTreeMap<SceneId, Scene>> {
    let mut out = BTreeMap::new();
    let mut queue = VecDeque::from([start.to_string()]);
    while let Some(id) = queue.pop_front() {
        if out.contains_key(&SceneId(id.clone())) {
            continue;
        }
        let Some(scene) = load_scene(store, &id)? else {
            if id == start {
                return Err(ApiError::not_found("scene", &id));
            }
            continue;
        };
        for t in scene.exits().filter_map(|p| p.target_scene.as_ref()) {
            queue.push_back(t.0.clone());
        }
        out.insert(scene.id.clone(), scene);
    }
    Ok(out)
}

fn game_error(e: GameError) -> ApiError {
    match e {
        GameError::Finished(_) => ApiError::new(StatusCode::CONFLICT, "game-over", e.to_string()),
        GameError::InvalidScene(ref issues) => {
            let mut err = ApiError::bad("invalid-scene", e.to_string());
            err.extra = serde_json::to_value(issues).ok();
            err
        }
        other => ApiError::bad("invalid-command", other.to_string()),
    }
}

async fn create_game(State(st): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let req: NewGame = serde_json::from_str(utf8(&body)?).map_err(ApiError::json)?;
    let scenes = scene_closure(&lock(&st.store), &req.scene)?;
    let defaults = GameConfig::default();
    let config = GameConfig {
        vision_radius: req.vision_radius.unwrap_or(defaults.vision_radius),
        initial_health: req.health.unwrap_or(defaults.initial_health),
    };
    if config.initial_health == 0 {
        return Err(ApiError::bad("bad-request", "health must be positive"));
    }
    let kb = Arc::new(st.knowledge_base());
    let game = Game::new(kb, Arc::new(scenes), &SceneId(req.scene.clone()), req.seed, config).map_err(game_error)?;
    let id = format!("game-{}", st.next_game.fetch_add(1, Ordering::Relaxed));
    let view = game.view();
    lock(&st.games).insert(id.clone(), Arc::new(Mutex::new(game)));
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "state": view }))).into_response())
}

fn find_game(st: &AppState, id: &str) -> ApiResult<Arc<Mutex<Game>>> {
    lock(&st.games)
        .get(id)
        .cloned()
        .ok_or_else(|| ApiError::not_found("game", id))
}

async fn get_game(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let game = find_game(&st, &id)?;
    let view = lock(&game).view();
    Ok(Json(json!({ "id": id, "state": view })).into_response())
}

async fn step_game(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<Response> {
    let game = find_game(&st, &id)?;
    let cmd: Command = serde_json::from_str(utf8(&body)?).map_err(ApiError::json)?;
    let mut game = lock(&game);
    let events = game.step(&cmd).map_err(game_error)?;
    Ok(Json(json!({ "id": id, "state": game.view(), "events": events })).into_response())
}

/// Binds and serves until Ctrl-C or SIGTERM.
pub async fn serve(config: ServerConfig) -> io::Result<()> {
    let state = AppState::open(&config.data_dir, config.token.clone())?;
    let app = router(state, config.static_dir.as_deref());
    let addr: SocketAddr = format!("{}:{}", config.host, config.port)
        .parse()
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, format!("bad address: {e}")))?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown_signal())
        .await
}

async fn shutdown_signal() {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        match signal(SignalKind::terminate()) {
            Ok(mut term) => {
                tokio::select! {
                    _ = tokio::signal::ctrl_c() => {}
                    _ = term.recv() => {}
                }
            }
            Err(_) => {
                let _ = tokio::signal::ctrl_c().await;
            }
        }
    }
    #[cfg(not(unix))]
    {
        let _ = tokio::signal::ctrl_c().await;
    }
}
