use std::io;
use std::path::{Path, PathBuf};

use subforge_core::consolidate::ConsolidateError;
use subforge_core::miner::StatsError;
use subforge_core::project::ProjectError;
use subforge_core::synth::SynthError;
use subforge_core::ConfigError;

use crate::detections::DetectionError;
use crate::files::FileError;
use crate::srt::SrtError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Detections { path: PathBuf, source: DetectionError },
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: FileError },
    #[error("{}: {source}", path.display())]
    Srt { path: PathBuf, source: SrtError },
    #[error("config {}: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error(transparent)]
    ConfigValue(#[from] ConfigError),
    #[error(transparent)]
    Consolidate(#[from] ConsolidateError),
    #[error(transparent)]
    Project(#[from] ProjectError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{0}")]
    Usage(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: &Path, source: io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    /// 1 for bad input, 2 for failures inside the tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 2,
            Error::Io { source, .. } if !matches!(source.kind(), io::ErrorKind::NotFound | io::ErrorKind::InvalidData) => 2,
            _ => 1,
        }
    }
}
