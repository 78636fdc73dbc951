//! HTTP service over a live network.
//!
//! One writer at a time mutates a working copy of the network; after each
//! converge an immutable [`Snapshot`] is published and every read endpoint
//! serves the latest one, so reads never wait on a converge.

use std::collections::{BTreeMap, VecDeque};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mini_internet::bgpsim::{converge, ConvergenceReport, DEFAULT_MAX_ROUNDS};
use mini_internet::confcli::{load_config_script, ScriptOutcome};
use mini_internet::grader::{default_rubric, run_rubric};
use mini_internet::monitor::{
    as_path_between, connectivity_matrix, diagnose, looking_glass, ConnectivityMatrix, LgError,
    LgView,
};
use mini_internet::scenario::{apply_event, Event, Target, MATRIX_HISTORY};
use mini_internet::topo::{Asn, Network, Relationship, TopologySpec};
use rand::distributions::{Alphanumeric, DistString};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// An immutable, converged view of the network.
#[derive(Debug)]
pub struct Snapshot {
    pub net: Network,
    pub matrix: ConnectivityMatrix,
    pub matrix_json: String,
}

impl Snapshot {
    fn of(net: Network) -> Self {
        let matrix = connectivity_matrix(&net);
        let matrix_json = matrix.to_json();
        Self {
            net,
            matrix,
            matrix_json,
        }
    }
}

/// Bearer tokens: one per AS plus one for the instructors.
#[derive(Debug, Clone)]
pub struct Tokens {
    pub instructor: String,
    pub groups: BTreeMap<Asn, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Principal {
    Instructor,
    Group(Asn),
}

impl Tokens {
    pub fn generate<R: Rng>(asns: &[Asn], rng: &mut R) -> Self {
        let mut token = || Alphanumeric.sample_string(rng, 32);
        Self {
            instructor: token(),
            groups: asns.iter().map(|&a| (a, token())).collect(),
        }
    }

    pub fn principal(&self, headers: &HeaderMap) -> Option<Principal> {
        let value = headers.get(header::AUTHORIZATION)?.to_str().ok()?;
        let token = value.strip_prefix("Bearer ")?.trim();
        if token == self.instructor {
            return Some(Principal::Instructor);
        }
        self.groups
            .iter()
            .find(|(_, t)| t.as_str() == token)
            .map(|(a, _)| Principal::Group(*a))
    }
}

pub struct AppState {
    writer: Arc<tokio::sync::Mutex<Network>>,
    snapshot: RwLock<Arc<Snapshot>>,
    history: Mutex<VecDeque<Arc<Snapshot>>>,
    /// Deferred mutations not yet converged.
    pending: AtomicBool,
    pub tokens: Tokens,
}

impl AppState {
    /// Converges `net` and publishes the first snapshot.
    pub fn new(mut net: Network, tokens: Tokens) -> Arc<Self> {
        converge(&mut net, DEFAULT_MAX_ROUNDS);
        let snap = Arc::new(Snapshot::of(net.clone()));
        Arc::new(Self {
            writer: Arc::new(tokio::sync::Mutex::new(net)),
            snapshot: RwLock::new(snap.clone()),
            history: Mutex::new(VecDeque::from([snap])),
            pending: AtomicBool::new(false),
            tokens,
        })
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().unwrap().clone()
    }

    pub fn has_pending(&self) -> bool {
        self.pending.load(Ordering::SeqCst)
    }

    fn publish(&self, net: &mut Network) -> ConvergenceReport {
        let report = converge(net, DEFAULT_MAX_ROUNDS);
        self.pending.store(false, Ordering::SeqCst);
        let snap = Arc::new(Snapshot::of(net.clone()));
        {
            let mut h = self.history.lock().unwrap();
            if h.len() == MATRIX_HISTORY {
                h.pop_front();
            }
            h.push_back(snap.clone());
        }
        *self.snapshot.write().unwrap() = snap;
        report
    }

    /// Run `f` as the single writer. Unless deferred, converge and publish
    /// before releasing the writer so snapshots are published in order.
    pub async fn mutate<F, T>(self: &Arc<Self>, defer: bool, f: F) -> (T, Option<ConvergenceReport>)
    where
        F: FnOnce(&mut Network) -> T + Send + 'static,
        T: Send + 'static,
    {
        let mut guard = self.writer.clone().lock_owned().await;
        let me = self.clone();
        tokio::task::spawn_blocking(move || {
            let out = f(&mut guard);
            let report = if defer {
                me.pending.store(true, Ordering::SeqCst);
                None
            } else {
                Some(me.publish(&mut guard))
            };
            (out, report)
        })
        .await
        .expect("writer task panicked")
    }
}

/// Converge deferred changes every `ms` milliseconds.
pub fn spawn_refresh(state: Arc<AppState>, ms: u64) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_millis(ms.max(1)));
        loop {
            tick.tick().await;
            if state.has_pending() {
                state.mutate(false, |_| ()).await;
            }
        }
    })
}

#[derive(Debug)]
pub struct ApiError(pub StatusCode, pub String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn json_text(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn authenticate(state: &AppState, headers: &HeaderMap) -> ApiResult<Principal> {
    state
        .tokens
        .principal(headers)
        .ok_or_else(|| ApiError(StatusCode::UNAUTHORIZED, "missing or unknown bearer token".into()))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/matrix", get(get_matrix))
        .route("/matrix/diagnosis", get(get_diagnosis))
        .route("/matrix/history", get(get_history))
        .route("/lg/{asn}/{device}/{view}", get(get_lg))
        .route("/path", get(get_path))
        .route("/topology", get(get_topology))
        .route("/as/{asn}/device/{device}/config", post(post_config))
        .route("/event", post(post_event))
        .route("/converge", post(post_converge))
        .with_state(state)
}

async fn get_matrix(State(st): State<Arc<AppState>>) -> Response {
    json_text(st.snapshot().matrix_json.clone())
}

async fn get_history(State(st): State<Arc<AppState>>) -> Response {
    let h = st.history.lock().unwrap();
    let items: Vec<&str> = h.iter().map(|s| s.matrix_json.as_str()).collect();
    json_text(format!("[{}]", items.join(",")))
}

async fn get_diagnosis(State(st): State<Arc<AppState>>) -> Response {
    Json(diagnose(&st.snapshot().matrix)).into_response()
}

async fn get_lg(
    State(st): State<Arc<AppState>>,
    Path((asn, device, view)): Path<(Asn, String, String)>,
) -> ApiResult<Response> {
    let view: LgView = view
        .parse()
        .map_err(|e: LgError| ApiError(StatusCode::BAD_REQUEST, e.to_string()))?;
    let text = looking_glass(&st.snapshot().net, asn, &device, view)
        .map_err(|e| ApiError(StatusCode::NOT_FOUND, e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response())
}

#[derive(Deserialize)]
struct PathQuery {
    src: Asn,
    dst: Asn,
}

async fn get_path(State(st): State<Arc<AppState>>, Query(q): Query<PathQuery>) -> ApiResult<Response> {
    let snap = st.snapshot();
    for a in [q.src, q.dst] {
        if snap.net.spec.as_spec(a).is_none() {
            return Err(ApiError(StatusCode::NOT_FOUND, format!("unknown AS {a}")));
        }
    }
    Ok(Json(as_path_between(&snap.net, q.src, q.dst)).into_response())
}

async fn get_topology(State(st): State<Arc<AppState>>) -> Response {
    Json(topology_json(&st.snapshot().net.spec)).into_response()
}

/// Nodes and edges for drawing the AS graph.
pub fn topology_json(spec: &TopologySpec) -> Value {
    let mut nodes: Vec<Value> = spec
        .ases
        .iter()
        .map(|a| {
            json!({
                "id": format!("as{}", a.asn), "kind": "as", "asn": a.asn,
                "role": a.role, "region": a.region, "auto": a.auto_configured,
            })
        })
        .collect();
    nodes.extend(spec.ixps.iter().map(|x| json!({ "id": format!("ixp{}", x.id), "kind": "ixp", "ixp": x.id })));
    let mut edges: Vec<Value> = spec
        .inter_as_links
        .iter()
        .map(|l| {
            let (src, dst, kind) = match l.relationship {
                Relationship::AProviderOfB => (&l.a, &l.b, "provider-customer"),
                Relationship::BProviderOfA => (&l.b, &l.a, "provider-customer"),
                Relationship::Peer => (&l.a, &l.b, "peer"),
            };
            json!({
                "source": format!("as{}", src.asn), "target": format!("as{}", dst.asn),
                "kind": kind, "up": l.admin_up, "routers": [src.to_string(), dst.to_string()],
            })
        })
        .collect();
    for x in &spec.ixps {
        for m in &x.members {
            edges.push(json!({
                "source": format!("as{}", m.asn), "target": format!("ixp{}", x.id),
                "kind": "ixp", "up": true, "routers": [m.to_string()],
            }));
        }
    }
    json!({ "nodes": nodes, "edges": edges })
}

#[derive(Deserialize, Default)]
struct DeferQuery {
    #[serde(default)]
    defer: Option<u8>,
}

impl DeferQuery {
    fn deferred(&self) -> bool {
        self.defer.unwrap_or(0) != 0
    }
}

#[derive(Serialize)]
struct ConfigResponse {
    #[serde(flatten)]
    outcome: ScriptOutcome,
    convergence: Option<ConvergenceReport>,
}

async fn post_config(
    State(st): State<Arc<AppState>>,
    Path((asn, device)): Path<(Asn, String)>,
    Query(q): Query<DeferQuery>,
    headers: HeaderMap,
    body: String,
) -> ApiResult<Response> {
    match authenticate(&st, &headers)? {
        Principal::Instructor => {}
        Principal::Group(a) if a == asn => {}
        Principal::Group(a) => {
            return Err(ApiError(
                StatusCode::FORBIDDEN,
                format!("token of AS {a} cannot configure AS {asn}"),
            ))
        }
    }
    if st.snapshot().net.device(asn, &device).is_none() {
        return Err(ApiError(StatusCode::NOT_FOUND, format!("unknown device {asn}.{device}")));
    }
    let (outcome, convergence) = st
        .mutate(q.deferred(), move |net| load_config_script(net, asn, &device, &body, false))
        .await;
    let outcome = outcome.map_err(|e| ApiError(StatusCode::NOT_FOUND, e.to_string()))?;
    Ok(Json(ConfigResponse { outcome, convergence }).into_response())
}

async fn post_event(
    State(st): State<Arc<AppState>>,
    Query(q): Query<DeferQuery>,
    headers: HeaderMap,
    Json(ev): Json<Event>,
) -> ApiResult<Response> {
    if authenticate(&st, &headers)? != Principal::Instructor {
        return Err(ApiError(StatusCode::FORBIDDEN, "events need the instructor token".into()));
    }
    match &ev {
        Event::Snapshot { tag } => {
            let snap = st.snapshot();
            let matrix: Value = serde_json::from_str(&snap.matrix_json).unwrap();
            Ok(Json(json!({ "tag": tag, "matrix": matrix, "diagnosis": diagnose(&snap.matrix) })).into_response())
        }
        Event::Grade { target, rubric } => {
            if rubric != "default" {
                return Err(ApiError(StatusCode::BAD_REQUEST, format!("unknown rubric `{rubric}`")));
            }
            let snap = st.snapshot();
            let asns = match target {
                Target::One(a) => vec![*a],
                Target::All => snap.net.spec.asns(),
            };
            let reports: Vec<_> = asns
                .into_iter()
                .map(|a| run_rubric(&snap.net, a, &default_rubric(a)))
                .collect();
            Ok(Json(reports).into_response())
        }
        _ => {
            let (res, convergence) = st.mutate(q.deferred(), move |net| apply_event(net, &ev)).await;
            let notes = res.map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
            Ok(Json(json!({ "notes": notes, "convergence": convergence })).into_response())
        }
    }
}

async fn post_converge(State(st): State<Arc<AppState>>, headers: HeaderMap) -> ApiResult<Response> {
    authenticate(&st, &headers)?;
    let (_, report) = st.mutate(false, |_| ()).await;
    Ok(Json(report).into_response())
}
