//! Session service for interactive clients.
//!
//! Routes:
//!
//! | method | path                      | body                 |
//! |--------|---------------------------|----------------------|
//! | POST   | `/sessions`               | scenario document    |
//! | GET    | `/sessions/{id}/state`    |                      |
//! | POST   | `/sessions/{id}/actions`  | one action document  |
//! | POST   | `/sessions/{id}/plan`     | goal polyline        |
//! | GET    | `/sessions/{id}/events`   | WebSocket upgrade    |
//!
//! Every session owns one [`World`]. Actions on a session are serialized by
//! its mutex, and each applied action bumps the revision by one and pushes a
//! snapshot record to subscribers.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use jambeam_core::engine::{load_scenario, parse_action, Snapshot, TraceRecord};
use jambeam_core::geometry::Point2;
use jambeam_core::planner::{compile_actions, default_angle_grid, fit_joint_angles, predicted_shape, GoalShape};
use jambeam_core::{Action, RobotSpec, World};
use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, Mutex};

/// Subscriber queue depth; slow clients skip ahead rather than block.
const EVENT_BUFFER: usize = 256;

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub path: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                path: path.into(),
                message: message.into(),
            },
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "id", format!("no session {id}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.body }))).into_response()
    }
}

/// Snapshot tagged with the session revision.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RevisionedSnapshot {
    pub revision: u64,
    pub snapshot: Snapshot,
}

/// Record pushed over the events socket.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum EventMessage {
    Snapshot {
        revision: u64,
        /// Action that produced this revision; absent for the state at subscription time.
        #[serde(skip_serializing_if = "Option::is_none", default)]
        action: Option<Action>,
        snapshot: Snapshot,
    },
}

struct SessionState {
    world: World,
    revision: u64,
}

struct Session {
    state: Mutex<SessionState>,
    events: broadcast::Sender<String>,
}

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Session>>>>,
}

impl AppState {
    fn session(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }
}

pub fn router() -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/actions", post(apply_action))
        .route("/sessions/{id}/plan", post(request_plan))
        .route("/sessions/{id}/events", get(events))
        .with_state(AppState::default())
}

#[derive(Debug, Serialize)]
struct Created {
    id: String,
    revision: u64,
    snapshot: Snapshot,
}

fn unprocessable(path: String, message: String) -> ApiError {
    ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, path, message)
}

/// Create a session from a scenario document; its script, if any, is applied
/// in order and each action counts as one revision.
async fn create_session(State(app): State<AppState>, body: String) -> Result<(StatusCode, Json<Created>), ApiError> {
    let scenario = load_scenario(&body).map_err(|e| unprocessable(e.path, e.message))?;
    let mut world = World::new(scenario.spec).map_err(|e| unprocessable("spec".into(), e.to_string()))?;
    for (i, a) in scenario.script.iter().enumerate() {
        world.step(i, a).map_err(|e| {
            let path = match e.field() {
                Some(f) => format!("script[{i}].{f}"),
                None => format!("script[{i}]"),
            };
            unprocessable(path, e.to_string())
        })?;
    }
    let revision = scenario.script.len() as u64;
    let snapshot = world.snapshot();
    let (events, _) = broadcast::channel(EVENT_BUFFER);
    let id = uuid::Uuid::new_v4().to_string();
    let session = Arc::new(Session {
        state: Mutex::new(SessionState { world, revision }),
        events,
    });
    app.sessions
        .write()
        .expect("session map poisoned")
        .insert(id.clone(), session);
    tracing::info!(%id, "session created");
    Ok((StatusCode::CREATED, Json(Created { id, revision, snapshot })))
}

async fn get_state(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<RevisionedSnapshot>, ApiError> {
    let session = app.session(&id)?;
    let st = session.state.lock().await;
    Ok(Json(RevisionedSnapshot {
        revision: st.revision,
        snapshot: st.world.snapshot(),
    }))
}

#[derive(Debug, Serialize)]
struct Applied {
    revision: u64,
    snapshot: Snapshot,
    records: Vec<TraceRecord>,
}

async fn apply_action(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: String,
) -> Result<Json<Applied>, ApiError> {
    let session = app.session(&id)?;
    let mut st = session.state.lock().await;
    let action = parse_action(&body, &st.world.spec).map_err(|e| unprocessable(e.path, e.message))?;
    let index = st.revision as usize;
    let records = st.world.step(index, &action).map_err(|e| {
        let path = e
            .field()
            .map_or_else(|| "action".to_string(), |f| format!("action.{f}"));
        unprocessable(path, e.to_string())
    })?;
    st.revision += 1;
    let snapshot = st.world.snapshot();
    let msg = EventMessage::Snapshot {
        revision: st.revision,
        action: Some(action),
        snapshot: snapshot.clone(),
    };
    // no subscribers is fine
    let _ = session
        .events
        .send(serde_json::to_string(&msg).expect("event serializes"));
    Ok(Json(Applied {
        revision: st.revision,
        snapshot,
        records,
    }))
}

/// A goal point: `[x, y]` or `{"x": .., "y": ..}`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum GoalPoint {
    Pair([f64; 2]),
    Object(Point2),
}

impl From<GoalPoint> for Point2 {
    fn from(p: GoalPoint) -> Self {
        match p {
            GoalPoint::Pair([x, y]) => Point2::new(x, y),
            GoalPoint::Object(p) => p,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRequest {
    pub polyline: Vec<GoalPoint>,
    #[serde(default = "default_tolerance")]
    pub tolerance_m: f64,
    /// Joint angle grid in radians; the planner default when absent.
    #[serde(default)]
    pub angle_grid_rad: Option<Vec<f64>>,
}

fn default_tolerance() -> f64 {
    0.01
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct PlanResponse {
    pub script: Vec<Action>,
    pub angles_rad: Vec<f64>,
    pub predicted_shape: Vec<Point2>,
    pub residual_m: f64,
    pub cost: f64,
    pub goal_length_m: f64,
    pub within_tolerance: bool,
}

/// Plan against the session's current spec and everted length; the session
/// itself is not touched.
async fn request_plan(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: String,
) -> Result<Json<PlanResponse>, ApiError> {
    let session = app.session(&id)?;
    let de = &mut serde_json::Deserializer::from_str(&body);
    let req: PlanRequest = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        unprocessable(
            if path == "." { String::new() } else { path },
            e.into_inner().to_string(),
        )
    })?;
    let spec: RobotSpec = {
        let st = session.state.lock().await;
        RobotSpec {
            everted_length_m: Some(st.world.body.growth.everted_length_m),
            ..st.world.spec.clone()
        }
    };
    let goal = GoalShape::new(req.polyline.into_iter().map(Point2::from).collect(), req.tolerance_m)
        .map_err(|e| unprocessable("polyline".into(), e.to_string()))?;
    let grid = req.angle_grid_rad.unwrap_or_else(default_angle_grid);
    let plan = fit_joint_angles(&goal, &spec, &grid).map_err(|e| unprocessable("polyline".into(), e.to_string()))?;
    Ok(Json(PlanResponse {
        script: compile_actions(&plan, &spec),
        predicted_shape: predicted_shape(&plan, &spec),
        within_tolerance: plan.within_tolerance(),
        angles_rad: plan.angles,
        residual_m: plan.residual_m,
        cost: plan.cost,
        goal_length_m: plan.goal_length_m,
    }))
}

async fn events(
    State(app): State<AppState>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let session = app.session(&id)?;
    Ok(ws.on_upgrade(move |socket| stream_events(socket, session)))
}

async fn stream_events(mut socket: WebSocket, session: Arc<Session>) {
    // subscribe under the lock so the first message and the stream line up
    let (first, mut rx) = {
        let st = session.state.lock().await;
        let msg = EventMessage::Snapshot {
            revision: st.revision,
            action: None,
            snapshot: st.world.snapshot(),
        };
        (
            serde_json::to_string(&msg).expect("event serializes"),
            session.events.subscribe(),
        )
    };
    if socket.send(Message::Text(first.into())).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            msg = rx.recv() => match msg {
                Ok(text) => {
                    if socket.send(Message::Text(text.into())).await.is_err() {
                        return;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(n)) => {
                    tracing::warn!(skipped = n, "event subscriber lagged");
                }
                Err(broadcast::error::RecvError::Closed) => return,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}

/// Serve on `addr` until the process is stopped.
pub async fn serve(addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "gateway listening");
    axum::serve(listener, router()).await
}
