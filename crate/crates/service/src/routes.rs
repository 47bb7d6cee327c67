use std::path::Path as FsPath;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{SecondsFormat, Utc};
use latfuzz_core::inference::{render_structured, surface_grid, SurfaceGrid};
use latfuzz_core::kb::AttributeSubset;
use latfuzz_core::{InferenceOptions, MatchingMode, PatientInputs};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::journal::JournalEvent;
use crate::session::{Session, SessionHandle};
use crate::{ApiError, AppState};

/// Largest surface grid edge served over HTTP.
pub const MAX_SURFACE_RESOLUTION: usize = 201;

/// Surface edge used when the query leaves it out.
pub const DEFAULT_SURFACE_RESOLUTION: usize = 21;

type Shared = State<Arc<AppState>>;
type ApiResult = Result<Response, ApiError>;

/// The API under `/api`, `/healthz`, and the UI bundle (when given) under `/`.
pub fn router(state: Arc<AppState>, ui_dir: Option<&FsPath>) -> Router {
    let api = Router::new()
        .route("/healthz", get(healthz))
        .route("/api/kb", get(kb))
        .route("/api/sessions", post(create_session))
        .route(
            "/api/sessions/{id}",
            get(get_session).delete(delete_session),
        )
        .route("/api/sessions/{id}/fork", post(fork_session))
        .route("/api/sessions/{id}/phases/{phase}", post(submit_phase))
        .route("/api/sessions/{id}/report", get(report))
        .route("/api/surface", get(surface))
        .route("/api/rules", get(rules))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(not_found),
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn json_body(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn json<T: Serialize>(status: StatusCode, value: &T) -> Response {
    json_body(
        status,
        serde_json::to_string(value).expect("responses serialize"),
    )
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not-found", "no such endpoint")
}

fn journal(state: &AppState, event: JournalEvent) -> Result<(), ApiError> {
    match &state.journal {
        Some(journal) => journal
            .append(&event)
            .map_err(|e| ApiError::internal(e.to_string())),
        None => Ok(()),
    }
}

fn session(state: &AppState, id: &str) -> Result<SessionHandle, ApiError> {
    state
        .sessions
        .get(id)
        .ok_or_else(|| ApiError::unknown_session(id))
}

#[derive(Serialize)]
struct Health<'a> {
    status: &'a str,
    version: &'a str,
    kb: &'a str,
    kb_sha256: &'a str,
    sessions: usize,
}

async fn healthz(State(state): Shared) -> Response {
    json(
        StatusCode::OK,
        &Health {
            status: "ok",
            version: env!("CARGO_PKG_VERSION"),
            kb: &state.kb.system.name,
            kb_sha256: &state.kb_checksum,
            sessions: state.sessions.len(),
        },
    )
}

async fn kb(State(state): Shared) -> Response {
    json_body(StatusCode::OK, state.kb_summary.clone())
}

#[derive(Serialize)]
struct Created<'a> {
    id: &'a str,
    created_at: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    forked_from: Option<&'a str>,
}

fn insert(state: &AppState, session: Session, event: JournalEvent) -> ApiResult {
    let handle = state
        .sessions
        .insert_with(session, |_| journal(state, event))
        .map_err(|e| ApiError::capacity(e.max_sessions))??;
    let session = handle.lock().unwrap();
    Ok(json(
        StatusCode::CREATED,
        &Created {
            id: &session.id,
            created_at: &session.created_at,
            forked_from: session.forked_from.as_deref(),
        },
    ))
}

async fn create_session(State(state): Shared) -> ApiResult {
    let id = uuid::Uuid::new_v4().to_string();
    let at = now();
    let event = JournalEvent::Created {
        session: id.clone(),
        at: at.clone(),
    };
    insert(&state, Session::new(id, at), event)
}

async fn get_session(State(state): Shared, path: Result<Path<String>, PathRejection>) -> ApiResult {
    let Path(id) = path?;
    let handle = session(&state, &id)?;
    let session = handle.lock().unwrap();
    Ok(json(StatusCode::OK, &session.view()))
}

async fn delete_session(
    State(state): Shared,
    path: Result<Path<String>, PathRejection>,
) -> ApiResult {
    let Path(id) = path?;
    let handle = session(&state, &id)?;
    let _guard = handle.lock().unwrap();
    journal(
        &state,
        JournalEvent::Deleted {
            session: id.clone(),
        },
    )?;
    state.sessions.remove(&id);
    Ok(StatusCode::NO_CONTENT.into_response())
}

async fn fork_session(
    State(state): Shared,
    path: Result<Path<String>, PathRejection>,
) -> ApiResult {
    let Path(source) = path?;
    let handle = session(&state, &source)?;
    let parent = handle.lock().unwrap();
    let id = uuid::Uuid::new_v4().to_string();
    let at = now();
    let fork = parent.fork(id.clone(), at.clone());
    let event = JournalEvent::Forked {
        session: id,
        source: source.clone(),
        at,
    };
    insert(&state, fork, event)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseBody {
    inputs: PatientInputs,
    #[serde(default)]
    mode: Option<String>,
}

fn parse_mode(mode: Option<&str>, default: MatchingMode) -> Result<MatchingMode, ApiError> {
    match mode {
        None => Ok(default),
        Some(text) => text
            .parse()
            .map_err(|e: String| ApiError::invalid("invalid-mode", e).with_field("mode")),
    }
}

async fn submit_phase(
    State(state): Shared,
    path: Result<Path<(String, usize)>, PathRejection>,
    body: Result<Json<PhaseBody>, JsonRejection>,
) -> ApiResult {
    let Path((id, phase)) = path?;
    let handle = session(&state, &id)?;
    let Json(body) = body?;
    let options = InferenceOptions {
        mode: parse_mode(body.mode.as_deref(), state.options.mode)?,
        ..state.options
    };

    let mut guard = handle.lock().unwrap();
    // Work on a copy so a journal failure leaves the session untouched.
    let mut next = guard.clone();
    let at = now();
    next.submit(&state.kb, phase, body.inputs.clone(), &options, at.clone())?;
    journal(
        &state,
        JournalEvent::Submitted {
            session: id,
            phase,
            inputs: body.inputs,
            mode: options.mode,
            at,
        },
    )?;
    *guard = next;
    let audit = guard.audit.last().expect("submission audited");
    let rewound = audit.rewound;
    let report = guard.report.as_ref().expect("submission recorded");
    let outcome = report.phases.last().expect("phase recorded");
    Ok(json(
        StatusCode::OK,
        &crate::session::Submitted {
            session: &guard.id,
            rewound,
            outcome,
        },
    ))
}

async fn report(State(state): Shared, path: Result<Path<String>, PathRejection>) -> ApiResult {
    let Path(id) = path?;
    let handle = session(&state, &id)?;
    let session = handle.lock().unwrap();
    let report = session.report.as_ref().ok_or_else(|| {
        ApiError::new(
            StatusCode::CONFLICT,
            "no-phase-completed",
            format!("session `{id}` has not completed a phase"),
        )
    })?;
    Ok(json_body(StatusCode::OK, render_structured(report)))
}

/// A surface cell: a number, or `"NA"` where no rule fired.
struct Cell(Option<f64>);

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Some(v) => s.serialize_f64(v),
            None => s.serialize_str("NA"),
        }
    }
}

#[derive(Serialize)]
struct SurfaceView<'a> {
    disease: &'a str,
    x: &'a str,
    y: &'a str,
    xs: &'a [f64],
    ys: &'a [f64],
    cells: Vec<Vec<Cell>>,
}

impl<'a> From<&'a SurfaceGrid> for SurfaceView<'a> {
    fn from(grid: &'a SurfaceGrid) -> Self {
        Self {
            disease: &grid.disease,
            x: &grid.x,
            y: &grid.y,
            xs: &grid.xs,
            ys: &grid.ys,
            cells: grid
                .cells
                .iter()
                .map(|row| row.iter().map(|&c| Cell(c)).collect())
                .collect(),
        }
    }
}

fn required<'a>(value: Option<&'a str>, name: &str) -> Result<&'a str, ApiError> {
    value.ok_or_else(|| {
        ApiError::invalid("invalid-query", format!("missing `{name}`")).with_field(name)
    })
}

/// `disease`, `x`, `y` are required; `resolution` and `mode` are optional;
/// `fixed.<attribute>=<value>` holds other attributes constant.
async fn surface(
    State(state): Shared,
    query: Result<Query<Vec<(String, String)>>, QueryRejection>,
) -> ApiResult {
    let Query(pairs) = query?;
    let mut disease = None;
    let mut x = None;
    let mut y = None;
    let mut resolution = DEFAULT_SURFACE_RESOLUTION;
    let mut mode = None;
    let mut fixed = PatientInputs::new();
    for (key, value) in &pairs {
        match key.as_str() {
            "disease" => disease = Some(value.as_str()),
            "x" => x = Some(value.as_str()),
            "y" => y = Some(value.as_str()),
            "mode" => mode = Some(value.as_str()),
            "resolution" => {
                resolution = value.parse().map_err(|_| {
                    ApiError::invalid(
                        "invalid-resolution",
                        format!("resolution must be an integer, got `{value}`"),
                    )
                    .with_field("resolution")
                })?
            }
            other => match other.strip_prefix("fixed.") {
                Some(attribute) => {
                    let v: f64 = value
                        .parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite())
                        .ok_or_else(|| {
                            ApiError::invalid(
                                "invalid-input",
                                format!("`{attribute}` must be a number, got `{value}`"),
                            )
                            .with_field(attribute)
                        })?;
                    fixed.values.insert(attribute.to_owned(), v);
                }
                None => {
                    return Err(ApiError::invalid(
                        "invalid-query",
                        format!("unknown query parameter `{other}`"),
                    )
                    .with_field(other))
                }
            },
        }
    }
    let (disease, x, y) = (
        required(disease, "disease")?,
        required(x, "x")?,
        required(y, "y")?,
    );
    if resolution > MAX_SURFACE_RESOLUTION {
        return Err(ApiError::invalid(
            "invalid-resolution",
            format!("resolution is capped at {MAX_SURFACE_RESOLUTION}, got {resolution}"),
        )
        .with_field("resolution"));
    }
    let options = InferenceOptions {
        mode: parse_mode(mode, state.options.mode)?,
        ..state.options
    };
    let fixed = (!fixed.is_empty()).then_some(&fixed);
    let grid = surface_grid(&state.kb, disease, x, y, fixed, resolution, &options)?;
    Ok(json(StatusCode::OK, &SurfaceView::from(&grid)))
}

#[derive(Deserialize)]
struct RulesQuery {
    attrs: Option<String>,
}

#[derive(Serialize)]
struct Clause<'a> {
    attribute: &'a str,
    term: &'a str,
}

#[derive(Serialize)]
struct ClassView<'a> {
    class: usize,
    defining_values: Vec<Clause<'a>>,
    /// 1-based information-system rows.
    rows: Vec<usize>,
}

#[derive(Serialize)]
struct RuleView<'a> {
    class: usize,
    antecedent: Vec<Clause<'a>>,
    disease: &'a str,
    term: &'a str,
    reliability: f64,
    /// 1-based information-system row.
    row: usize,
    text: String,
}

#[derive(Serialize)]
struct NodeView<'a> {
    node: Vec<&'a str>,
    phase: usize,
    level: usize,
    classes: Vec<ClassView<'a>>,
    rules: Vec<RuleView<'a>>,
}

async fn rules(
    State(state): Shared,
    query: Result<Query<RulesQuery>, QueryRejection>,
) -> ApiResult {
    let Query(query) = query?;
    let sys = &state.kb.system;
    let names: Vec<&str> = query
        .attrs
        .as_deref()
        .unwrap_or("")
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        return Err(
            ApiError::invalid("invalid-query", "`attrs` must name at least one attribute")
                .with_field("attrs"),
        );
    }
    let mut subset = AttributeSubset::EMPTY;
    for name in names {
        let index = sys.attribute_index(name).ok_or_else(|| {
            ApiError::invalid("unknown-attribute", format!("unknown attribute `{name}`"))
                .with_field(name)
        })?;
        subset.insert(index);
    }
    let (spec, node) = sys
        .phases
        .iter()
        .zip(&state.kb.lattices)
        .find_map(|(spec, lattice)| lattice.node(subset).map(|node| (spec, node)))
        .ok_or_else(|| {
            ApiError::invalid(
                "no-such-node",
                format!(
                    "attributes {} do not belong to a single phase",
                    sys.subset_names(subset).join(",")
                ),
            )
            .with_field("attrs")
        })?;
    let clauses = |values: &[(usize, usize)]| -> Vec<Clause<'_>> {
        values
            .iter()
            .map(|&(a, t)| Clause {
                attribute: sys.attribute_name(a),
                term: sys.attribute_term_name(a, t),
            })
            .collect()
    };
    let view = NodeView {
        node: sys.subset_names(subset),
        phase: spec.index,
        level: node.level(),
        classes: node
            .classes
            .iter()
            .enumerate()
            .map(|(c, class)| ClassView {
                class: c,
                defining_values: clauses(&class.defining_values),
                rows: class.members.iter().map(|r| r + 1).collect(),
            })
            .collect(),
        rules: node
            .rules
            .iter()
            .map(|rule| RuleView {
                class: rule.origin.class,
                antecedent: clauses(&rule.antecedent),
                disease: sys.disease_name(rule.disease),
                term: sys.output_term_name(rule.term),
                reliability: rule.reliability,
                row: rule.row + 1,
                text: rule.display(sys).to_string(),
            })
            .collect(),
    };
    Ok(json(StatusCode::OK, &view))
}
