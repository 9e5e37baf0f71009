//! HTTP/JSON service over the losnet harness, plus the live teleoperation
//! session on a websocket.
//!
//! Routes:
//! - `GET /healthz`
//! - `GET /v1/scenarios`
//! - `POST /v1/validate`, `/v1/run`, `/v1/matrix`, `/v1/replay`
//! - `GET /v1/session` (websocket upgrade)

use std::net::SocketAddr;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use losnet_core::harness::api::{
    ErrorBody, MatrixRequest, MatrixResponse, ReplayRequest, ReplayResponse, RunRequest, RunResponse, ScenarioRef,
    ValidateRequest, ValidateResponse,
};
use losnet_core::harness::wire::{parse_client_frame, ServerFrame};
use losnet_core::harness::{
    efficiency_csv, efficiency_report, emit_matrix, emit_metrics, run_experiment, run_matrix, HarnessError, Overrides,
    RunSummary, Scenario, ScenarioError, Session, BUILTIN_SCENARIOS,
};
use losnet_core::sim::Strategy;
use serde::Deserialize;
use tokio::net::TcpListener;
use tokio::sync::mpsc;
use tokio::time::MissedTickBehavior;

/// Shortest gap between two published state frames.
const FRAME_GAP: Duration = Duration::from_micros(33_334);

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// Scenario used by `/v1/session` when the request names none.
    pub session_scenario: Option<Scenario>,
}

#[derive(Clone)]
struct AppState {
    cfg: Arc<ServiceConfig>,
    session_open: Arc<AtomicBool>,
}

pub fn router(cfg: ServiceConfig) -> Router {
    let state = AppState {
        cfg: Arc::new(cfg),
        session_open: Arc::new(AtomicBool::new(false)),
    };
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/v1/scenarios", get(|| async { Json(BUILTIN_SCENARIOS.to_vec()) }))
        .route("/v1/validate", post(validate))
        .route("/v1/run", post(run))
        .route("/v1/matrix", post(matrix))
        .route("/v1/replay", post(replay))
        .route("/v1/session", get(session))
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener, cfg: ServiceConfig) -> std::io::Result<()> {
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(cfg)).await
}

/// Binds `addr` and serves in the background, returning the bound address.
pub async fn spawn(addr: SocketAddr, cfg: ServiceConfig) -> std::io::Result<SocketAddr> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    tokio::spawn(async move {
        if let Err(e) = serve(listener, cfg).await {
            tracing::error!(error = %e, "service stopped");
        }
    });
    Ok(local)
}

struct ApiError(StatusCode, ErrorBody);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

impl From<ScenarioError> for ApiError {
    fn from(e: ScenarioError) -> Self {
        ApiError(
            StatusCode::UNPROCESSABLE_ENTITY,
            ErrorBody {
                line: e.line(),
                error: e.to_string(),
            },
        )
    }
}

impl From<HarnessError> for ApiError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Scenario(s) => s.into(),
            HarnessError::Sim(s) => ApiError(
                StatusCode::UNPROCESSABLE_ENTITY,
                ErrorBody {
                    error: s.to_string(),
                    line: None,
                },
            ),
            HarnessError::Io(s) => ApiError(StatusCode::INTERNAL_SERVER_ERROR, ErrorBody { error: s, line: None }),
        }
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(
        StatusCode::BAD_REQUEST,
        ErrorBody {
            error: msg.into(),
            line: None,
        },
    )
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| {
        ApiError(
            StatusCode::INTERNAL_SERVER_ERROR,
            ErrorBody {
                error: e.to_string(),
                line: None,
            },
        )
    })?
}

async fn validate(Json(req): Json<ValidateRequest>) -> Result<Json<ValidateResponse>, ApiError> {
    blocking(move || {
        let s = req.scenario.resolve()?;
        let targets = s.world.realize(s.seeds[0]).targets.len();
        Ok(Json(ValidateResponse {
            name: s.name,
            robots: s.robots.len(),
            targets,
            seeds: s.seeds,
        }))
    })
    .await
}

fn paths(files: &[&Path]) -> Vec<String> {
    files.iter().map(|p| p.display().to_string()).collect()
}

async fn run(Json(req): Json<RunRequest>) -> Result<Json<RunResponse>, ApiError> {
    blocking(move || {
        let scenario = req.scenario.resolve()?;
        let log = run_experiment(&scenario, &req.overrides)?;
        let files = match &req.out_dir {
            Some(dir) => {
                let f = emit_metrics(&log, Path::new(dir))?;
                paths(&[&f.ticks_csv, &f.summary, &f.histogram_csv])
            }
            None => Vec::new(),
        };
        Ok(Json(RunResponse {
            summary: RunSummary::from_log(&log),
            files,
        }))
    })
    .await
}

async fn matrix(Json(req): Json<MatrixRequest>) -> Result<Json<MatrixResponse>, ApiError> {
    blocking(move || {
        let scenario = req.scenario.resolve()?;
        let cells = run_matrix(&scenario, &req.spec)?;
        let baseline = req.baseline.unwrap_or(Strategy::FixedTopology);
        let efficiency = efficiency_report(&cells, baseline, scenario.config.dt, scenario.max_ticks);
        let files = match &req.out_dir {
            Some(dir) => {
                let matrix = emit_matrix(&cells, Path::new(dir))?;
                let eff = Path::new(dir).join("efficiency.csv");
                std::fs::write(&eff, efficiency_csv(&efficiency))
                    .map_err(|e| HarnessError::Io(format!("{}: {e}", eff.display())))?;
                paths(&[&matrix, &eff])
            }
            None => Vec::new(),
        };
        Ok(Json(MatrixResponse {
            cells,
            efficiency,
            files,
        }))
    })
    .await
}

/// Feeds a tape through a live session object, tick by tick, exactly as
/// the websocket path does.
async fn replay(Json(req): Json<ReplayRequest>) -> Result<Json<ReplayResponse>, ApiError> {
    blocking(move || {
        let scenario = req.scenario.resolve()?;
        let mut session = Session::new(&scenario, &req.overrides)?;
        let mut records = Vec::with_capacity(req.ticks as usize);
        let mut cursor = 0;
        for tick in 0..req.ticks {
            while let Some(entry) = req.tape.entries.get(cursor).filter(|e| e.tick <= tick) {
                let _ = session.submit(entry.frame.clone());
                cursor += 1;
            }
            records.push(session.step()?.0);
        }
        Ok(Json(ReplayResponse { records }))
    })
    .await
}

#[derive(Debug, Deserialize)]
struct SessionQuery {
    /// Builtin scenario name.
    scenario: Option<String>,
    seed: Option<u64>,
    strategy: Option<Strategy>,
    /// Wall-clock speed-up of the tick pacing.
    speed: Option<f64>,
}

struct SessionGuard(Arc<AtomicBool>);

impl Drop for SessionGuard {
    fn drop(&mut self) {
        self.0.store(false, Ordering::SeqCst);
    }
}

async fn session(
    State(state): State<AppState>,
    Query(q): Query<SessionQuery>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let scenario = match (&q.scenario, &state.cfg.session_scenario) {
        (Some(name), _) => ScenarioRef::Builtin(name.clone()).resolve()?,
        (None, Some(s)) => s.clone(),
        (None, None) => return Err(bad_request("no scenario given and the service has no default")),
    };
    let speed = q.speed.unwrap_or(1.0);
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(bad_request("speed must be positive"));
    }
    let overrides = Overrides {
        seed: q.seed,
        strategy: q.strategy,
        ..Overrides::default()
    };
    let session = Session::new(&scenario, &overrides)?;
    if state.session_open.swap(true, Ordering::SeqCst) {
        return Err(ApiError(
            StatusCode::CONFLICT,
            ErrorBody {
                error: "a session is already running".into(),
                line: None,
            },
        ));
    }
    let guard = SessionGuard(state.session_open.clone());
    let max_ticks = scenario.max_ticks;
    Ok(ws.on_upgrade(move |socket| async move {
        run_session(socket, session, speed, max_ticks).await;
        drop(guard);
    }))
}

async fn run_session(socket: WebSocket, mut session: Session, speed: f64, max_ticks: u64) {
    let (mut sink, mut stream) = socket.split();
    // State frames go through a one-slot queue so a slow client sees the
    // newest frame rather than a backlog; error frames are never dropped.
    let (state_tx, mut state_rx) = mpsc::channel::<String>(1);
    let (error_tx, mut error_rx) = mpsc::channel::<String>(64);
    let writer = tokio::spawn(async move {
        loop {
            let text = tokio::select! {
                biased;
                Some(t) = error_rx.recv() => t,
                Some(t) = state_rx.recv() => t,
                else => break,
            };
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });

    let dt = Duration::from_secs_f64(session.simulation().config().dt / speed);
    let mut ticker = tokio::time::interval(dt);
    ticker.set_missed_tick_behavior(MissedTickBehavior::Burst);
    let mut last_sent: Option<Instant> = None;
    loop {
        tokio::select! {
            msg = stream.next() => match msg {
                None | Some(Err(_)) | Some(Ok(Message::Close(_))) => break,
                Some(Ok(Message::Text(text))) => {
                    if let Err(e) = parse_client_frame(&text).and_then(|f| session.submit(f)) {
                        let _ = error_tx.send(ServerFrame::error(e).to_json()).await;
                    }
                }
                Some(Ok(Message::Binary(_))) => {
                    let _ = error_tx.send(ServerFrame::error("malformed frame: binary frames are not accepted").to_json()).await;
                }
                Some(Ok(_)) => {}
            },
            _ = ticker.tick() => {
                if session.simulation().tick_count() >= max_ticks {
                    let _ = error_tx.send(ServerFrame::error("session reached its tick limit").to_json()).await;
                    break;
                }
                match session.step() {
                    Ok((_, frame)) => {
                        let now = Instant::now();
                        if last_sent.is_none_or(|t| now.duration_since(t) >= FRAME_GAP)
                            && state_tx.try_send(ServerFrame::State(frame).to_json()).is_ok()
                        {
                            last_sent = Some(now);
                        }
                    }
                    Err(e) => {
                        let _ = error_tx.send(ServerFrame::error(e).to_json()).await;
                        break;
                    }
                }
            }
        }
    }
    drop(state_tx);
    drop(error_tx);
    let _ = writer.await;
}
