//! Shared pieces of the `sketchrec` command-line tool and its HTTP service:
//! the recognition response, its text and JSON renderings, library loading
//! and the axum router.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use sketchrec::shape_dsl::{load_library_dir, LoadError};
use sketchrec::{
    beautify, builtin_library, parse_document, recognize, DomainLibrary, RecognizeConfig, Segment,
    SketchDocument,
};
use tower_http::services::ServeDir;
use tower_http::timeout::TimeoutLayer;

pub const UNDEFINED: &str = "Undefined";
pub const BODY_LIMIT: usize = 1024 * 1024;
pub const REQUEST_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognizeResponse {
    pub results: Vec<StrokeReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeReport {
    pub stroke_id: u64,
    /// Domain name, or "Undefined".
    pub domain: String,
    /// Shape name, or "Undefined".
    pub shape: String,
    /// Display label of the matched shape; empty when undefined.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
    /// Properties measured on the sketched segments.
    pub properties: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beautified: Option<Beautified>,
    pub segments: SegmentLists,
    /// Why the stroke could not be segmented, if it could not.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Beautified {
    pub vertices: Vec<[f64; 2]>,
    pub closed: bool,
    pub properties: BTreeMap<String, Vec<f64>>,
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentLists {
    pub raw: Vec<Segment>,
    pub merged: Vec<Segment>,
}

impl StrokeReport {
    pub fn is_undefined(&self) -> bool {
        self.beautified.is_none()
    }
}

/// Runs the whole pipeline on a document.
pub fn recognize_document(doc: &SketchDocument, library: &DomainLibrary) -> RecognizeResponse {
    let results = recognize(doc, library, &RecognizeConfig::default())
        .into_iter()
        .map(|r| {
            let segments = SegmentLists {
                raw: r.raw_segments.clone(),
                merged: r.merged_segments.clone(),
            };
            let chosen = r.chosen.as_ref().and_then(|c| {
                let spec = library.shape(&c.domain_name, &c.shape_name)?;
                Some((c, beautify(c, r.chosen_segments()?, spec)))
            });
            match chosen {
                Some((c, shape)) => StrokeReport {
                    stroke_id: r.stroke_id,
                    domain: c.domain_name.clone(),
                    shape: c.shape_name.clone(),
                    label: c.display_label.clone(),
                    properties: c.properties.clone(),
                    beautified: Some(Beautified {
                        vertices: shape.vertices.iter().map(|v| [v.x, v.y]).collect(),
                        closed: shape.closed,
                        properties: shape.properties,
                        degraded: shape.degraded,
                    }),
                    segments,
                    error: None,
                },
                None => StrokeReport {
                    stroke_id: r.stroke_id,
                    domain: UNDEFINED.into(),
                    shape: UNDEFINED.into(),
                    label: String::new(),
                    properties: BTreeMap::new(),
                    beautified: None,
                    segments,
                    error: r.error.clone(),
                },
            }
        })
        .collect();
    RecognizeResponse { results }
}

/// The JSON form shared by `recognize --json` and `POST /recognize`.
pub fn to_json(response: &RecognizeResponse) -> String {
    let mut s = serde_json::to_string_pretty(response).expect("response serializes");
    s.push('\n');
    s
}

/// One line per stroke: `stroke <id>: <domain>/<shape> [properties]` or
/// `stroke <id>: Undefined`.
pub fn to_text(response: &RecognizeResponse) -> String {
    let mut out = String::new();
    for r in &response.results {
        if r.is_undefined() {
            writeln!(out, "stroke {}: {UNDEFINED}", r.stroke_id).unwrap();
            continue;
        }
        write!(out, "stroke {}: {}/{}", r.stroke_id, r.domain, r.shape).unwrap();
        for (name, values) in &r.properties {
            let shown: Vec<String> = values.iter().map(|v| format!("{v:.1}")).collect();
            write!(out, " {name}=[{}]", shown.join(", ")).unwrap();
        }
        out.push('\n');
    }
    out
}

/// The builtin library, or every `*.dsl` file of `dir`.
pub fn load_library(dir: Option<&Path>) -> Result<DomainLibrary, LoadError> {
    match dir {
        Some(d) => load_library_dir(d),
        None => Ok(builtin_library()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainsResponse {
    pub domains: Vec<DomainEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainEntry {
    pub name: String,
    pub shapes: Vec<String>,
}

pub fn domains_of(library: &DomainLibrary) -> DomainsResponse {
    DomainsResponse {
        domains: library
            .domains
            .iter()
            .map(|d| DomainEntry {
                name: d.name.clone(),
                shapes: d.shapes.iter().map(|s| s.name.clone()).collect(),
            })
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// service

#[derive(Clone)]
pub struct AppState {
    pub library: Arc<DomainLibrary>,
}

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error_body(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

async fn recognize_handler(State(state): State<AppState>, body: Bytes) -> Response {
    let text = match std::str::from_utf8(&body) {
        Ok(t) => t,
        Err(e) => return json(StatusCode::BAD_REQUEST, error_body(&format!("body is not UTF-8: {e}"))),
    };
    let doc = match parse_document(text) {
        Ok(d) => d,
        Err(e) => return json(StatusCode::BAD_REQUEST, error_body(&e.to_string())),
    };
    let library = state.library.clone();
    match tokio::task::spawn_blocking(move || recognize_document(&doc, &library)).await {
        Ok(response) => json(StatusCode::OK, to_json(&response)),
        Err(e) => json(StatusCode::INTERNAL_SERVER_ERROR, error_body(&e.to_string())),
    }
}

async fn domains_handler(State(state): State<AppState>) -> Response {
    let body = serde_json::to_string(&domains_of(&state.library)).expect("domains serialize");
    json(StatusCode::OK, body)
}

async fn healthz() -> &'static str {
    "ok"
}

/// Routes of the service; static files from `assets` are served for every
/// other path when given.
pub fn router(library: DomainLibrary, assets: Option<PathBuf>) -> Router {
    let state = AppState {
        library: Arc::new(library),
    };
    let api = Router::new()
        .route("/recognize", post(recognize_handler))
        .route("/domains", get(domains_handler))
        .route("/healthz", get(healthz))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .layer(TimeoutLayer::with_status_code(StatusCode::REQUEST_TIMEOUT, REQUEST_TIMEOUT))
        .with_state(state);
    match assets {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds `addr`; a busy port is reported as an error.
pub async fn bind(addr: &str) -> anyhow::Result<tokio::net::TcpListener> {
    tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| anyhow::anyhow!("cannot listen on {addr}: {e}"))
}

pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> anyhow::Result<()> {
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
