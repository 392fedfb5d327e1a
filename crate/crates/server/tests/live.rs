use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use futures::{SinkExt, StreamExt};
use http_body_util::BodyExt;
use tokio_tungstenite::tungstenite::Message;
use tower::ServiceExt;

use choreo_core::fixtures::{elbow_oscillation_frames, write_frames};
use choreo_core::pose_pipeline::{import_pose_video, ImportOptions};
use choreo_core::sequencer::{render_cue_cards, Show};
use choreo_core::sim::ForceScripts;
use choreo_core::RobotProfile;
use choreo_server::*;

const TOKEN: &str = "stage-left";

fn demo_show() -> Arc<Show> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../demo/show.csv");
    Arc::new(Show::load(path, RobotProfile::ur5e()).unwrap())
}

fn service(backlog: usize) -> Service {
    Service::start(demo_show(), ForceScripts::default(), TOKEN, 30.0, backlog)
}

async fn listen(svc: &Service) -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let router = svc.router.clone();
    tokio::spawn(async move { axum::serve(listener, router).await.unwrap() });
    format!("ws://{addr}/ws?token={TOKEN}")
}

type Ws = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn connect(url: &str) -> Ws {
    tokio_tungstenite::connect_async(url).await.unwrap().0
}

async fn next_message(ws: &mut Ws) -> ServerMessage {
    loop {
        match ws.next().await.expect("stream open").unwrap() {
            Message::Text(t) => return serde_json::from_str(&t).unwrap(),
            _ => continue,
        }
    }
}

async fn snapshots_for(ws: &mut Ws, span: Duration) -> Vec<StateSnapshot> {
    let end = Instant::now() + span;
    let mut out = Vec::new();
    while let Ok(Some(Ok(msg))) = tokio::time::timeout_at(end.into(), ws.next()).await {
        if let Message::Text(t) = msg {
            if let ServerMessage::Snapshot(s) = serde_json::from_str(&t).unwrap() {
                out.push(s);
            }
        }
    }
    out
}

async fn ack_for(ws: &mut Ws, id: &str, command: CommandKind) -> Ack {
    let msg = ClientMessage::Command(OperatorCommand { id: id.into(), issuer: "desk".into(), command, client_ts: Some(1.0) });
    ws.send(Message::Text(msg.to_text().into())).await.unwrap();
    loop {
        match next_message(ws).await {
            ServerMessage::Ack(a) => return a,
            ServerMessage::Snapshot(_) => continue,
            ServerMessage::Error { reason } => panic!("{reason}"),
        }
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn one_client_gets_thirty_snapshots_a_second() {
    let svc = service(90);
    let url = listen(&svc).await;
    let mut ws = connect(&url).await;
    // Skip the first, which may arrive immediately on subscribe.
    next_message(&mut ws).await;
    let snaps = snapshots_for(&mut ws, Duration::from_secs(1)).await;
    assert!((29..=31).contains(&snaps.len()), "{} snapshots", snaps.len());
    for w in snaps.windows(2) {
        assert_eq!(w[1].seq, w[0].seq + 1);
        assert!(w[1].timestamp > w[0].timestamp);
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn two_clients_see_the_same_sequence() {
    let svc = service(90);
    let url = listen(&svc).await;
    let (mut a, mut b) = (connect(&url).await, connect(&url).await);
    let (sa, sb) = tokio::join!(snapshots_for(&mut a, Duration::from_millis(700)), snapshots_for(&mut b, Duration::from_millis(700)));
    let lo = sa[0].seq.max(sb[0].seq);
    let hi = sa.last().unwrap().seq.min(sb.last().unwrap().seq);
    assert!(hi > lo + 10);
    let pick = |s: &[StateSnapshot]| s.iter().filter(|x| (lo..=hi).contains(&x.seq)).cloned().collect::<Vec<_>>();
    let (pa, pb) = (pick(&sa), pick(&sb));
    assert_eq!(pa.len() as u64, hi - lo + 1);
    assert_eq!(pa, pb);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn commands_over_the_socket() {
    let svc = service(90);
    let url = listen(&svc).await;
    let mut ws = connect(&url).await;
    let a = ack_for(&mut ws, "1", CommandKind::Start).await;
    assert!(a.ok && !a.duplicate);
    assert_eq!(a.phase, "running");
    let again = ack_for(&mut ws, "1", CommandKind::Start).await;
    assert!(again.duplicate && again.ok);
    let paused = ack_for(&mut ws, "2", CommandKind::Pause).await;
    assert!(paused.ok);
    let tap = ack_for(&mut ws, "3", CommandKind::SimulateTap).await;
    assert!(!tap.ok && tap.reason.is_some());

    ws.send(Message::Text("{\"type\":\"command\",\"id\":1}".into())).await.unwrap();
    loop {
        match next_message(&mut ws).await {
            ServerMessage::Error { reason } => {
                assert!(reason.starts_with("malformed message"), "{reason}");
                break;
            }
            ServerMessage::Ack(a) => panic!("{a:?}"),
            ServerMessage::Snapshot(_) => {}
        }
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn commands_apply_in_send_order() {
    let svc = service(90);
    let url = listen(&svc).await;
    let mut ws = connect(&url).await;
    let kinds = [CommandKind::Start, CommandKind::Pause, CommandKind::Start, CommandKind::Pause];
    for (i, k) in kinds.iter().enumerate() {
        let m = ClientMessage::Command(OperatorCommand { id: i.to_string(), issuer: "desk".into(), command: *k, client_ts: None });
        ws.send(Message::Text(m.to_text().into())).await.unwrap();
    }
    let mut acks = Vec::new();
    while acks.len() < kinds.len() {
        if let ServerMessage::Ack(a) = next_message(&mut ws).await {
            acks.push(a);
        }
    }
    let ids: Vec<&str> = acks.iter().map(|a| a.id.as_str()).collect();
    assert_eq!(ids, ["0", "1", "2", "3"]);
    assert!(acks.iter().all(|a| a.ok), "{acks:?}");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn socket_requires_the_token() {
    let svc = service(90);
    let url = listen(&svc).await;
    let bare = url.split('?').next().unwrap().to_string();
    assert!(tokio_tungstenite::connect_async(&bare).await.is_err());
    assert!(tokio_tungstenite::connect_async(format!("{bare}?token=nope")).await.is_err());
}

async fn get(svc: &Service, uri: &str, token: Option<&str>) -> (StatusCode, String) {
    let mut req = Request::builder().uri(uri);
    if let Some(t) = token {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let resp = svc.router.clone().oneshot(req.body(Body::empty()).unwrap()).await.unwrap();
    let status = resp.status();
    let body = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(body.to_vec()).unwrap())
}

#[tokio::test]
async fn health_reports_version() {
    let svc = service(90);
    let (status, body) = get(&svc, "/health", None).await;
    assert_eq!(status, StatusCode::OK);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["status"], "ok");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[tokio::test]
async fn cuesheet_is_the_card_document() {
    let svc = service(90);
    let show = demo_show();
    let (status, body) = get(&svc, "/cuesheet", Some(TOKEN)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, render_cue_cards(&show.sheet).to_json());
    let (status, _) = get(&svc, "/cuesheet", None).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    let (status, _) = get(&svc, "/cuesheet?token=nope", None).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    let (status, _) = get(&svc, &format!("/cuesheet?token={TOKEN}"), None).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn trajectories_are_served_as_csv() {
    let svc = service(90);
    let show = demo_show();
    let (status, body) = get(&svc, "/trajectory/motifs/stirring.motif", Some(TOKEN)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, show.store.get("motifs/stirring.motif").unwrap().to_csv_string());
    let (status, _) = get(&svc, "/trajectory/nope", Some(TOKEN)).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn state_endpoint_returns_latest_snapshot() {
    let svc = service(90);
    tokio::time::sleep(Duration::from_millis(100)).await;
    let (status, body) = get(&svc, "/state", Some(TOKEN)).await;
    assert_eq!(status, StatusCode::OK);
    let s: StateSnapshot = serde_json::from_str(&body).unwrap();
    assert_eq!(s.phase, "idle");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn pose_import_job_matches_library_output() {
    let svc = service(90);
    let dir = tempfile::tempdir().unwrap();
    write_frames(dir.path(), &elbow_oscillation_frames(120, 30.0, 0.5, 0.4)).unwrap();
    let body = serde_json::json!({"dir": dir.path(), "mode": "lowpass_bins", "threshold": 12});
    let req = Request::post("/pose-import")
        .header("authorization", format!("Bearer {TOKEN}"))
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = svc.router.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::ACCEPTED);
    let v: serde_json::Value = serde_json::from_slice(&resp.into_body().collect().await.unwrap().to_bytes()).unwrap();
    let job = v["id"].as_str().unwrap().to_string();

    let deadline = Instant::now() + Duration::from_secs(20);
    let traj_id = loop {
        let (_, body) = get(&svc, &format!("/jobs/{job}"), Some(TOKEN)).await;
        let v: serde_json::Value = serde_json::from_str(&body).unwrap();
        match v["status"].as_str().unwrap() {
            "done" => {
                assert_eq!(v["meta"]["filter"]["mode"], "lowpass_bins");
                break v["trajectory_id"].as_str().unwrap().to_string();
            }
            "running" => {}
            other => panic!("{other}: {v}"),
        }
        assert!(Instant::now() < deadline);
        tokio::time::sleep(Duration::from_millis(20)).await;
    };
    let (status, csv) = get(&svc, &format!("/trajectory/{traj_id}"), Some(TOKEN)).await;
    assert_eq!(status, StatusCode::OK);
    let req = PoseImportRequest { dir: dir.path().into(), mode: Some("lowpass_bins".parse().unwrap()), threshold: Some(12.0), ..Default::default() };
    let expected = import_pose_video(dir.path(), &req.options()).unwrap();
    assert_eq!(csv, expected.trajectory.to_csv_string());
    assert_ne!(req.options(), ImportOptions::default());

    let bad = serde_json::json!({"dir": "/definitely/missing"});
    let req = Request::post("/pose-import")
        .header("authorization", format!("Bearer {TOKEN}"))
        .header("content-type", "application/json")
        .body(Body::from(bad.to_string()))
        .unwrap();
    let v: serde_json::Value =
        serde_json::from_slice(&svc.router.clone().oneshot(req).await.unwrap().into_body().collect().await.unwrap().to_bytes()).unwrap();
    let job = v["id"].as_str().unwrap().to_string();
    loop {
        let (_, body) = get(&svc, &format!("/jobs/{job}"), Some(TOKEN)).await;
        let v: serde_json::Value = serde_json::from_str(&body).unwrap();
        if v["status"] == "failed" {
            assert!(v["error"].as_str().unwrap().contains("/definitely/missing"));
            break;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
}
