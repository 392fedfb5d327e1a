use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::extract::ws::{CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::sync::mpsc;

use choreo_core::pose_pipeline::{import_pose_video, FilterMode, ImportOptions, PoseImportMeta, SidePolicy};
use choreo_core::sequencer::{render_cue_cards, Show};
use choreo_core::Trajectory;

use crate::control::ControlHandle;
use crate::protocol::{ClientMessage, ServerMessage};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PoseImportRequest {
    /// Directory of OpenPose JSON files on the server host.
    pub dir: PathBuf,
    pub side: Option<SidePolicy>,
    pub mode: Option<FilterMode>,
    pub threshold: Option<f64>,
    pub blur: Option<usize>,
    pub fps: Option<f64>,
}

impl PoseImportRequest {
    pub fn options(&self) -> ImportOptions {
        let mut o = ImportOptions::default();
        if let Some(s) = self.side {
            o.side = s;
        }
        if let Some(m) = self.mode {
            o.filter.mode = m;
        }
        if let Some(t) = self.threshold {
            o.filter.threshold = t;
        }
        if let Some(b) = self.blur {
            o.filter.blur_size = b;
        }
        if let Some(f) = self.fps {
            o.frame_rate = f;
        }
        o
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum JobStatus {
    Running,
    Done { trajectory_id: String, samples: usize, meta: PoseImportMeta },
    Failed { error: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobView {
    pub id: String,
    #[serde(flatten)]
    pub status: JobStatus,
}

#[derive(Default)]
struct Jobs {
    next: AtomicU64,
    status: RwLock<BTreeMap<String, JobStatus>>,
}

#[derive(Clone)]
pub struct AppState {
    control: ControlHandle,
    show: Arc<Show>,
    cards_json: Arc<String>,
    token: Arc<String>,
    jobs: Arc<Jobs>,
    imported: Arc<RwLock<BTreeMap<String, Arc<Trajectory>>>>,
}

impl AppState {
    pub fn new(control: ControlHandle, show: Arc<Show>, token: impl Into<String>) -> Self {
        let cards_json = Arc::new(render_cue_cards(&show.sheet).to_json());
        AppState {
            control,
            show,
            cards_json,
            token: Arc::new(token.into()),
            jobs: Arc::default(),
            imported: Arc::default(),
        }
    }
}

pub fn router(state: AppState) -> Router {
    let protected = Router::new()
        .route("/cuesheet", get(cuesheet))
        .route("/state", get(latest_state))
        .route("/trajectory/{*id}", get(trajectory))
        .route("/pose-import", post(pose_import))
        .route("/jobs/{id}", get(job))
        .route("/ws", get(ws_upgrade))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token));
    Router::new().route("/health", get(health)).merge(protected).with_state(state)
}

fn token_of(headers: &HeaderMap, query: &BTreeMap<String, String>) -> Option<String> {
    if let Some(t) = query.get("token") {
        return Some(t.clone());
    }
    let auth = headers.get(header::AUTHORIZATION)?.to_str().ok()?;
    auth.strip_prefix("Bearer ").map(|t| t.trim().to_string())
}

async fn require_token(
    State(st): State<AppState>,
    Query(query): Query<BTreeMap<String, String>>,
    req: Request,
    next: Next,
) -> Response {
    match token_of(req.headers(), &query) {
        Some(t) if t == *st.token => next.run(req).await,
        _ => (StatusCode::UNAUTHORIZED, Json(serde_json::json!({"error": "missing or wrong token"}))).into_response(),
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({"status": "ok", "version": env!("CARGO_PKG_VERSION")}))
}

async fn cuesheet(State(st): State<AppState>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], st.cards_json.as_str().to_owned()).into_response()
}

async fn latest_state(State(st): State<AppState>) -> Response {
    match st.control.hub().latest() {
        Some(s) => Json(s.as_ref().clone()).into_response(),
        None => (StatusCode::SERVICE_UNAVAILABLE, Json(serde_json::json!({"error": "no snapshot yet"}))).into_response(),
    }
}

async fn trajectory(State(st): State<AppState>, Path(id): Path<String>) -> Response {
    let found = st.show.store.get(&id).cloned().or_else(|| st.imported.read().unwrap().get(&id).cloned());
    match found {
        Some(t) => ([(header::CONTENT_TYPE, "text/csv")], t.to_csv_string()).into_response(),
        None => (StatusCode::NOT_FOUND, Json(serde_json::json!({"error": format!("no trajectory `{id}`")}))).into_response(),
    }
}

async fn pose_import(State(st): State<AppState>, Json(req): Json<PoseImportRequest>) -> Response {
    let n = st.jobs.next.fetch_add(1, Ordering::Relaxed) + 1;
    let id = format!("job-{n}");
    st.jobs.status.write().unwrap().insert(id.clone(), JobStatus::Running);
    let (jobs, imported, job_id) = (st.jobs.clone(), st.imported.clone(), id.clone());
    tokio::task::spawn_blocking(move || {
        let status = match import_pose_video(&req.dir, &req.options()) {
            Ok(imp) => {
                let trajectory_id = format!("import-{n}");
                let samples = imp.trajectory.len();
                imported.write().unwrap().insert(trajectory_id.clone(), Arc::new(imp.trajectory));
                JobStatus::Done { trajectory_id, samples, meta: imp.meta }
            }
            Err(e) => JobStatus::Failed { error: e.to_string() },
        };
        jobs.status.write().unwrap().insert(job_id, status);
    });
    (StatusCode::ACCEPTED, Json(JobView { id, status: JobStatus::Running })).into_response()
}

async fn job(State(st): State<AppState>, Path(id): Path<String>) -> Response {
    match st.jobs.status.read().unwrap().get(&id) {
        Some(s) => Json(JobView { id, status: s.clone() }).into_response(),
        None => (StatusCode::NOT_FOUND, Json(serde_json::json!({"error": format!("no job `{id}`")}))).into_response(),
    }
}

async fn ws_upgrade(State(st): State<AppState>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| ws_session(socket, st))
}

async fn ws_session(socket: WebSocket, st: AppState) {
    let (mut sink, mut stream) = socket.split();
    let hub = st.control.hub().clone();
    let mut sub = hub.subscribe();
    let sub_id = sub.id;
    let (out_tx, mut out_rx) = mpsc::channel::<ServerMessage>(64);

    let writer = tokio::spawn(async move {
        loop {
            let msg = tokio::select! {
                biased;
                m = out_rx.recv() => match m {
                    Some(m) => m,
                    None => break,
                },
                s = sub.rx.recv() => match s {
                    Some(s) => ServerMessage::Snapshot(s.as_ref().clone()),
                    None => {
                        let frame = CloseFrame { code: 1008, reason: "snapshot backlog exceeded".into() };
                        let _ = sink.send(Message::Close(Some(frame))).await;
                        break;
                    }
                },
            };
            if sink.send(Message::Text(msg.to_text().into())).await.is_err() {
                break;
            }
        }
    });

    while let Some(Ok(msg)) = stream.next().await {
        let reply = match msg {
            Message::Text(text) => match serde_json::from_str::<ClientMessage>(&text) {
                Ok(ClientMessage::Command(cmd)) => match st.control.submit(cmd).await {
                    Ok(ack) => ServerMessage::Ack(ack),
                    Err(e) => ServerMessage::Error { reason: e.to_string() },
                },
                Err(e) => ServerMessage::Error { reason: format!("malformed message: {e}") },
            },
            Message::Binary(_) => ServerMessage::Error { reason: "binary frames are not supported".into() },
            Message::Close(_) => break,
            _ => continue,
        };
        if out_tx.send(reply).await.is_err() {
            break;
        }
    }
    hub.unsubscribe(sub_id);
    drop(out_tx);
    let _ = writer.await;
}
