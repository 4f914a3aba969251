//! JSON documents: projects, activity tracks, episode manifests and corpus
//! statistics. All writers emit pretty-printed JSON with a trailing newline.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use subforge_core::interval::{normalize, IntervalError};
use subforge_core::miner::{CorpusStats, EpisodeManifest};
use subforge_core::project::{Project, ProjectError};
use subforge_core::LabeledInterval;

use crate::Error;

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Project(#[from] ProjectError),
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("in-memory values serialize");
    s.push('\n');
    s
}

/// `*.smad.json`; output is normalized per label.
pub fn read_smad(doc: &str) -> Result<Vec<LabeledInterval>, FileError> {
    let raw: Vec<LabeledInterval> = serde_json::from_str(doc)?;
    Ok(normalize(raw)?)
}

pub fn write_smad(track: &[LabeledInterval]) -> String {
    to_pretty(&track)
}

/// `*.project.json`.
pub fn read_project(doc: &str) -> Result<Project, FileError> {
    let project: Project = serde_json::from_str(doc)?;
    project.validate()?;
    Ok(project)
}

pub fn write_project(project: &Project) -> String {
    to_pretty(project)
}

/// `*.manifest.json`.
pub fn read_manifest(doc: &str) -> Result<EpisodeManifest, FileError> {
    Ok(serde_json::from_str(doc)?)
}

pub fn write_manifest(manifest: &EpisodeManifest) -> String {
    to_pretty(manifest)
}

pub fn write_stats(stats: &CorpusStats) -> String {
    to_pretty(stats)
}

pub fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load<T>(path: &Path, parse: impl FnOnce(&str) -> Result<T, FileError>) -> Result<T, Error> {
    let text = read_text(path)?;
    parse(&text).map_err(|source| Error::File { path: path.to_path_buf(), source })
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    load(path, |s| Ok(serde_json::from_str(s)?))
}

/// Writes through a sibling temporary file and a rename, so readers only
/// ever see a complete old or new document.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Error> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Usage(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp: PathBuf = dir.join(tmp_name);
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn save_project(path: &Path, project: &Project) -> Result<(), Error> {
    write_atomic(path, write_project(project).as_bytes())
}

pub fn load_project(path: &Path) -> Result<Project, Error> {
    load(path, read_project)
}
