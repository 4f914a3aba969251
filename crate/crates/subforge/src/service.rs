//! Local HTTP service behind the correction editor.
//!
//! Reads may run concurrently; mutations are serialized through a write
//! lock, checked against the client's revision, persisted atomically and
//! only then made visible.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use subforge_core::cues::{compute_cues, CueAnnotation};
use subforge_core::project::{Project, ProjectError, SegmentPatch};
use subforge_core::{PipelineConfig, SegmentId, SubtitleSegment};
use tokio::sync::RwLock;

use crate::detections::parse_detections;
use crate::frames::{content_type, FrameError, FrameProvider};
use crate::{files, srt, Error};

pub struct AppState {
    project_path: PathBuf,
    project: RwLock<Project>,
    frames: FrameProvider,
}

impl AppState {
    pub fn new(project_path: PathBuf, project: Project, frames: FrameProvider) -> Self {
        AppState { project_path, project: RwLock::new(project), frames }
    }

    pub fn open(project_path: PathBuf, frames: FrameProvider) -> Result<Self, Error> {
        let project = files::load_project(&project_path)?;
        Ok(AppState::new(project_path, project, frames))
    }

    pub async fn snapshot(&self) -> Project {
        self.project.read().await.clone()
    }

    /// Applies `f` to a copy of the project, persists it, then publishes it.
    async fn mutate<T>(&self, f: impl FnOnce(&mut Project) -> Result<T, ApiError>) -> Result<(T, u64), ApiError> {
        let mut guard = self.project.write().await;
        let mut next = guard.clone();
        let out = f(&mut next)?;
        files::save_project(&self.project_path, &next).map_err(|e| ApiError::internal(e.to_string()))?;
        let revision = next.revision;
        *guard = next;
        Ok((out, revision))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, kind, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<ProjectError> for ApiError {
    fn from(e: ProjectError) -> Self {
        let (status, kind) = match e {
            ProjectError::Conflict { .. } => (StatusCode::CONFLICT, "conflict"),
            ProjectError::UnknownSegment(_) => (StatusCode::NOT_FOUND, "not_found"),
            _ => (StatusCode::BAD_REQUEST, "invalid"),
        };
        ApiError::new(status, kind, e.to_string())
    }
}

impl From<FrameError> for ApiError {
    fn from(e: FrameError) -> Self {
        let (status, kind) = match e {
            FrameError::NotConfigured | FrameError::MediaMissing(_) => (StatusCode::NOT_FOUND, "not_found"),
            _ => (StatusCode::BAD_GATEWAY, "frame_provider"),
        };
        ApiError::new(status, kind, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.kind, "message": self.message }))).into_response()
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProjectInfo {
    pub episode_id: String,
    pub revision: u64,
    pub config: PipelineConfig,
    pub segment_count: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AnnotatedSegment {
    #[serde(flatten)]
    pub segment: SubtitleSegment,
    /// Absent for deleted segments.
    pub cue: Option<Cue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cue {
    pub adjacent_to_prev: bool,
    pub sequence_start: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SegmentList {
    pub revision: u64,
    pub segments: Vec<AnnotatedSegment>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SegmentReply {
    pub revision: u64,
    pub segment: SubtitleSegment,
}

#[derive(Debug, Deserialize)]
pub struct PatchBody {
    #[serde(flatten)]
    pub patch: SegmentPatch,
    pub revision: u64,
}

#[derive(Debug, Deserialize)]
pub struct RevisionQuery {
    pub revision: u64,
}

#[derive(Debug, Deserialize)]
pub struct MergeBody {
    pub ids: Vec<SegmentId>,
    pub revision: u64,
}

#[derive(Debug, Deserialize)]
pub struct PipelineBody {
    pub detections_path: PathBuf,
    pub revision: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PipelineReply {
    pub revision: u64,
    pub segment_count: usize,
}

#[derive(Debug, Deserialize)]
pub struct FrameQuery {
    pub t_ms: u64,
}

pub fn annotate(project: &Project) -> SegmentList {
    let cues: Vec<CueAnnotation> = compute_cues(&project.segments, &project.config);
    let segments = project
        .segments
        .iter()
        .map(|s| AnnotatedSegment {
            segment: s.clone(),
            cue: cues
                .iter()
                .find(|c| c.segment_id == s.id)
                .map(|c| Cue { adjacent_to_prev: c.adjacent_to_prev, sequence_start: c.sequence_start }),
        })
        .collect();
    SegmentList { revision: project.revision, segments }
}

async fn get_project(State(st): State<Arc<AppState>>) -> Json<ProjectInfo> {
    let p = st.project.read().await;
    Json(ProjectInfo {
        episode_id: p.episode_id.clone(),
        revision: p.revision,
        config: p.config.clone(),
        segment_count: p.segments.len(),
    })
}

async fn get_segments(State(st): State<Arc<AppState>>) -> Json<SegmentList> {
    Json(annotate(&*st.project.read().await))
}

async fn patch_segment(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(body): Json<PatchBody>,
) -> Result<Json<SegmentReply>, ApiError> {
    let id = SegmentId(id);
    let (segment, revision) = st.mutate(|p| Ok(p.patch_segment(&id, &body.patch, body.revision)?)).await?;
    Ok(Json(SegmentReply { revision, segment }))
}

async fn delete_segment(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<RevisionQuery>,
) -> Result<Json<SegmentReply>, ApiError> {
    let id = SegmentId(id);
    let (segment, revision) = st.mutate(|p| Ok(p.delete_segment(&id, q.revision)?)).await?;
    Ok(Json(SegmentReply { revision, segment }))
}

async fn merge_segments(
    State(st): State<Arc<AppState>>,
    Json(body): Json<MergeBody>,
) -> Result<Json<SegmentReply>, ApiError> {
    let (segment, revision) = st.mutate(|p| Ok(p.merge_segments(&body.ids, body.revision)?)).await?;
    Ok(Json(SegmentReply { revision, segment }))
}

async fn run_pipeline(
    State(st): State<Arc<AppState>>,
    Json(body): Json<PipelineBody>,
) -> Result<Json<PipelineReply>, ApiError> {
    let path = body.detections_path;
    let frames = {
        let file = std::fs::File::open(&path)
            .map_err(|e| ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("{}: {e}", path.display())))?;
        parse_detections(std::io::BufReader::new(file))
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "detections", format!("{}: {e}", path.display())))?
    };
    let (count, revision) = st
        .mutate(|p| {
            if let Some(rev) = body.revision {
                p.check_revision(rev)?;
            }
            p.run_pipeline(&frames).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "detections", e.to_string()))?;
            Ok(p.segments.len())
        })
        .await?;
    Ok(Json(PipelineReply { revision, segment_count: count }))
}

async fn get_frame(State(st): State<Arc<AppState>>, Query(q): Query<FrameQuery>) -> Result<Response, ApiError> {
    let bytes = st.frames.frame(q.t_ms).await?;
    Ok(([(header::CONTENT_TYPE, content_type(&bytes))], bytes.as_ref().clone()).into_response())
}

async fn export_srt(State(st): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let p = st.project.read().await;
    let live: Vec<SubtitleSegment> = p.live_segments().cloned().collect();
    let doc = srt::write_srt(&live).map_err(|e| ApiError::new(StatusCode::CONFLICT, "invalid", e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "application/x-subrip; charset=utf-8")], doc).into_response())
}

/// Routes of the editor API; `ui_dir`, when given, is served at `/`.
pub fn router(state: Arc<AppState>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/project", get(get_project))
        .route("/api/segments", get(get_segments))
        .route("/api/segments/merge", post(merge_segments))
        .route("/api/segments/{id}", patch(patch_segment).delete(delete_segment))
        .route("/api/pipeline/run", post(run_pipeline))
        .route("/api/frame", get(get_frame))
        .route("/api/export/srt", get(export_srt))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

pub struct ServeOptions {
    pub project: PathBuf,
    pub media: Option<PathBuf>,
    pub frame_cmd: Option<String>,
    pub addr: SocketAddr,
    pub ui_dir: Option<PathBuf>,
}

pub async fn serve(opts: ServeOptions) -> Result<(), Error> {
    let frames = FrameProvider::new(opts.frame_cmd.as_deref(), opts.media).map_err(|e| Error::Usage(e.to_string()))?;
    let state = Arc::new(AppState::open(opts.project, frames)?);
    let listener = tokio::net::TcpListener::bind(opts.addr).await.map_err(|e| match e.kind() {
        std::io::ErrorKind::AddrInUse => Error::Usage(format!("{} is busy", opts.addr)),
        _ => Error::Internal(format!("bind {}: {e}", opts.addr)),
    })?;
    eprintln!("listening on http://{}", opts.addr);
    axum::serve(listener, router(state, opts.ui_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::Internal(e.to_string()))
}
