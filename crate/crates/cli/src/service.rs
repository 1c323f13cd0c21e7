//! HTTP service for interactive segmentation sessions.
//!
//! | method | path | body | result |
//! |---|---|---|---|
//! | POST | `/session?superpixels=N&lambda=L` | image bytes | `{id, width, height, superpixels}` |
//! | PUT | `/session/{id}/edges` | binary PGM/PNG | 204 |
//! | PUT | `/session/{id}/partition` | partition CSV/PGM | 204 |
//! | POST | `/session/{id}/seeds` | seed JSON increment | mask PNG (base64) and timings |
//! | GET | `/session/{id}/overlay` | | current mask PNG |
//! | GET | `/session/{id}/superpixels` | | superpixel boundary PNG |
//! | DELETE | `/session/{id}` | | 204 |

use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post, put};
use axum::{Json, Router};
use base64::Engine as _;
use lru::LruCache;
use serde::{Deserialize, Serialize};
use spmrf::partition::{load_partition, slic_superpixels, SlicParams};
use spmrf::seg::{segment_superpixel, EdgeMap, Mask, SegmentParams, Seeds};
use spmrf::{RgbImage, SuperpixelPartition};
use tower_http::cors::CorsLayer;
use uuid::Uuid;

use crate::cli::ms;
use crate::error::{CliError, CliResult};
use crate::seeds::SeedsJson;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub session_cap: NonZeroUsize,
    pub max_image_bytes: usize,
    pub default_superpixels: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { session_cap: NonZeroUsize::new(64).unwrap(), max_image_bytes: 16 << 20, default_superpixels: 800 }
    }
}

impl ServiceConfig {
    /// Reads `SPMRF_SESSION_CAP` and `SPMRF_MAX_IMAGE_BYTES`, falling back to
    /// the defaults when unset or unparsable.
    pub fn from_env() -> Self {
        let mut config = Self::default();
        if let Some(cap) = env_parse::<usize>("SPMRF_SESSION_CAP").and_then(NonZeroUsize::new) {
            config.session_cap = cap;
        }
        if let Some(bytes) = env_parse("SPMRF_MAX_IMAGE_BYTES") {
            config.max_image_bytes = bytes;
        }
        config
    }
}

fn env_parse<T: std::str::FromStr>(name: &str) -> Option<T> {
    std::env::var(name).ok()?.trim().parse().ok()
}

struct Session {
    image: RgbImage,
    edges: EdgeMap,
    partition: SuperpixelPartition,
    seeds: Seeds,
    mask: Option<Mask>,
    lambda: f64,
}

pub struct AppState {
    sessions: Mutex<LruCache<Uuid, Arc<Mutex<Session>>>>,
    config: ServiceConfig,
}

#[derive(Debug)]
struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

fn not_found() -> ApiError {
    ApiError(StatusCode::NOT_FOUND, "unknown session".into())
}

fn internal(msg: impl std::fmt::Display) -> ApiError {
    ApiError(StatusCode::INTERNAL_SERVER_ERROR, msg.to_string())
}

fn seg_error(err: spmrf::Error) -> ApiError {
    use spmrf::Error as E;
    match err {
        E::SeedConflict(_) | E::GeometryMismatch { .. } | E::DimensionMismatch { .. } => bad_request(err.to_string()),
        E::EmptySeeds(_) => ApiError(StatusCode::UNPROCESSABLE_ENTITY, err.to_string()),
        other => internal(other),
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(config: ServiceConfig) -> Router {
    let limit = config.max_image_bytes;
    let state = Arc::new(AppState { sessions: Mutex::new(LruCache::new(config.session_cap)), config });
    Router::new()
        .route("/session", post(create_session))
        .route("/session/{id}", delete(delete_session))
        .route("/session/{id}/edges", put(put_edges))
        .route("/session/{id}/partition", put(put_partition))
        .route("/session/{id}/seeds", post(post_seeds))
        .route("/session/{id}/overlay", get(get_overlay))
        .route("/session/{id}/superpixels", get(get_superpixels))
        .layer(DefaultBodyLimit::max(limit))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

fn lookup(state: &AppState, id: &str) -> ApiResult<Arc<Mutex<Session>>> {
    let id = Uuid::parse_str(id).map_err(|_| not_found())?;
    state.sessions.lock().unwrap().get(&id).cloned().ok_or_else(not_found)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(internal)?
}

#[derive(Debug, Deserialize)]
struct CreateParams {
    superpixels: Option<usize>,
    lambda: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionInfo {
    pub id: String,
    pub width: usize,
    pub height: usize,
    pub superpixels: usize,
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    Query(params): Query<CreateParams>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<SessionInfo>)> {
    if body.is_empty() {
        return Err(bad_request("empty image body"));
    }
    let lambda = params.lambda.unwrap_or(1.0);
    if !lambda.is_finite() {
        return Err(bad_request("lambda must be finite"));
    }
    let target = params.superpixels.unwrap_or(state.config.default_superpixels);
    if target == 0 {
        return Err(bad_request("superpixels must be positive"));
    }
    let session = blocking(move || {
        let image = RgbImage::decode(&body).map_err(|e| bad_request(e.to_string()))?;
        let target = target.min(image.geometry().pixel_count());
        let partition = slic_superpixels(&image, &SlicParams::new(target)).map_err(internal)?;
        let edges = EdgeMap::from_gradient(&image);
        Ok(Session { image, edges, partition, seeds: Seeds::default(), mask: None, lambda })
    })
    .await?;
    let g = session.image.geometry();
    let info = SessionInfo {
        id: Uuid::new_v4().to_string(),
        width: g.width(),
        height: g.height(),
        superpixels: session.partition.count(),
    };
    let id = Uuid::parse_str(&info.id).expect("fresh uuid");
    state.sessions.lock().unwrap().put(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(info)))
}

async fn delete_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    let id = Uuid::parse_str(&id).map_err(|_| not_found())?;
    state.sessions.lock().unwrap().pop(&id).map(|_| StatusCode::NO_CONTENT).ok_or_else(not_found)
}

async fn put_edges(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<StatusCode> {
    let session = lookup(&state, &id)?;
    blocking(move || {
        let edges = EdgeMap::decode(&body).map_err(|e| bad_request(e.to_string()))?;
        let mut s = session.lock().unwrap();
        if edges.geometry() != s.image.geometry() {
            return Err(bad_request(format!("edge map is {}, image is {}", edges.geometry(), s.image.geometry())));
        }
        s.edges = edges;
        s.mask = None;
        Ok(StatusCode::NO_CONTENT)
    })
    .await
}

async fn put_partition(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<StatusCode> {
    let session = lookup(&state, &id)?;
    blocking(move || {
        let partition = load_partition(&body).map_err(|e| bad_request(e.to_string()))?;
        let mut s = session.lock().unwrap();
        if partition.geometry() != s.image.geometry() {
            return Err(bad_request(format!("partition is {}, image is {}", partition.geometry(), s.image.geometry())));
        }
        s.partition = partition;
        s.mask = None;
        Ok(StatusCode::NO_CONTENT)
    })
    .await
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TimingsMs {
    pub unary: f64,
    pub aggregation: f64,
    pub solve: f64,
    pub total: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SegmentResponse {
    pub width: usize,
    pub height: usize,
    pub superpixels: usize,
    pub energy: f64,
    pub foreground_pixels: usize,
    pub fg_seeds: usize,
    pub bg_seeds: usize,
    pub timings_ms: TimingsMs,
    /// Base64-encoded PNG of the mask (255 = foreground).
    pub mask_png: String,
}

async fn post_seeds(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<SegmentResponse>> {
    let session = lookup(&state, &id)?;
    let increment = SeedsJson::parse(&body).map_err(bad_request)?;
    if increment.is_empty() {
        return Err(bad_request("seed increment is empty"));
    }
    blocking(move || {
        // held for the whole solve: requests on one session serialize
        let mut s = session.lock().unwrap();
        let g = s.image.geometry();
        let increment = increment.to_seeds(g).map_err(seg_error)?;
        let seeds = s.seeds.union(&increment);
        seeds.validate(g).map_err(seg_error)?;
        let params = SegmentParams::with_lambda(s.lambda);
        let seg = segment_superpixel(&s.image, &s.edges, &seeds, &s.partition, &params).map_err(seg_error)?;
        let png = seg.mask.to_png().map_err(internal)?;
        let response = SegmentResponse {
            width: g.width(),
            height: g.height(),
            superpixels: s.partition.count(),
            energy: seg.result.energy,
            foreground_pixels: seg.mask.count(),
            fg_seeds: seeds.fg.len(),
            bg_seeds: seeds.bg.len(),
            timings_ms: TimingsMs {
                unary: ms(seg.timings.unary),
                aggregation: ms(seg.timings.aggregation),
                solve: ms(seg.timings.solve),
                total: ms(seg.timings.total),
            },
            mask_png: base64::engine::general_purpose::STANDARD.encode(png),
        };
        s.seeds = seeds;
        s.mask = Some(seg.mask);
        Ok(Json(response))
    })
    .await
}

fn png_response(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], bytes).into_response()
}

async fn get_overlay(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let session = lookup(&state, &id)?;
    blocking(move || {
        let s = session.lock().unwrap();
        let mask = s.mask.as_ref().ok_or_else(|| ApiError(StatusCode::NOT_FOUND, "no mask yet".into()))?;
        Ok(png_response(mask.to_png().map_err(internal)?))
    })
    .await
}

async fn get_superpixels(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let session = lookup(&state, &id)?;
    blocking(move || {
        let s = session.lock().unwrap();
        let boundary = Mask::new(s.image.geometry(), s.partition.boundary_mask()).map_err(internal)?;
        Ok(png_response(boundary.to_png().map_err(internal)?))
    })
    .await
}

/// Serves on `port`, or `SPMRF_PORT`, or 8080, until interrupted.
pub fn serve_blocking(port: Option<u16>) -> CliResult<()> {
    let port = port.or_else(|| env_parse("SPMRF_PORT")).unwrap_or(8080);
    let runtime = tokio::runtime::Runtime::new().map_err(|source| CliError::Io { path: "runtime".into(), source })?;
    runtime.block_on(async move {
        let addr = std::net::SocketAddr::from(([0, 0, 0, 0], port));
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|source| CliError::Io { path: addr.to_string().into(), source })?;
        eprintln!("listening on http://{addr}");
        axum::serve(listener, router(ServiceConfig::from_env()))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|source| CliError::Io { path: addr.to_string().into(), source })
    })
}
