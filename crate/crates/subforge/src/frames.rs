//! Video frames from an external command.
//!
//! The command template is split shell-style; in each argument `{media}` is
//! replaced with the media path, `{t_ms}` with the timestamp in milliseconds
//! and `{t_s}` with the timestamp in seconds (three decimals). The command
//! must print one encoded image to stdout.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use tokio::process::Command;
use tokio::sync::{Mutex, OnceCell};

#[derive(Debug, Clone, thiserror::Error)]
pub enum FrameError {
    #[error("no frame provider configured")]
    NotConfigured,
    #[error("media file not found: {0}")]
    MediaMissing(PathBuf),
    #[error("bad frame command template: {0}")]
    BadTemplate(String),
    #[error("frame provider could not start: {0}")]
    Spawn(String),
    #[error("frame provider exited with {status}: {stderr}")]
    Failed { status: String, stderr: String },
    #[error("frame provider produced no output")]
    Empty,
}

type Slot = Arc<OnceCell<Arc<Vec<u8>>>>;

#[derive(Debug)]
pub struct FrameProvider {
    template: Option<Vec<String>>,
    media: Option<PathBuf>,
    cache: Mutex<HashMap<u64, Slot>>,
}

impl FrameProvider {
    pub fn new(template: Option<&str>, media: Option<PathBuf>) -> Result<Self, FrameError> {
        let template = template
            .map(|t| shell_words::split(t).map_err(|e| FrameError::BadTemplate(e.to_string())))
            .transpose()?;
        if template.as_ref().is_some_and(Vec::is_empty) {
            return Err(FrameError::BadTemplate("empty command".into()));
        }
        Ok(FrameProvider { template, media, cache: Mutex::new(HashMap::new()) })
    }

    pub fn disabled() -> Self {
        FrameProvider { template: None, media: None, cache: Mutex::new(HashMap::new()) }
    }

    fn argv(&self, t_ms: u64) -> Result<Vec<String>, FrameError> {
        let template = self.template.as_ref().ok_or(FrameError::NotConfigured)?;
        let media = match &self.media {
            Some(m) if m.exists() => m.to_string_lossy().into_owned(),
            Some(m) => return Err(FrameError::MediaMissing(m.clone())),
            None => String::new(),
        };
        let t_s = format!("{}.{:03}", t_ms / 1000, t_ms % 1000);
        Ok(template
            .iter()
            .map(|a| a.replace("{media}", &media).replace("{t_ms}", &t_ms.to_string()).replace("{t_s}", &t_s))
            .collect())
    }

    async fn invoke(&self, t_ms: u64) -> Result<Arc<Vec<u8>>, FrameError> {
        let argv = self.argv(t_ms)?;
        let out = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(std::process::Stdio::null())
            .output()
            .await
            .map_err(|e| FrameError::Spawn(e.to_string()))?;
        if !out.status.success() {
            return Err(FrameError::Failed {
                status: out.status.to_string(),
                stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
            });
        }
        if out.stdout.is_empty() {
            return Err(FrameError::Empty);
        }
        Ok(Arc::new(out.stdout))
    }

    /// Image bytes for `t_ms`. Successful results are cached, and
    /// concurrent requests for one timestamp share a single invocation.
    pub async fn frame(&self, t_ms: u64) -> Result<Arc<Vec<u8>>, FrameError> {
        let slot = {
            let mut cache = self.cache.lock().await;
            cache.entry(t_ms).or_default().clone()
        };
        slot.get_or_try_init(|| self.invoke(t_ms)).await.cloned()
    }
}

/// MIME type guessed from magic bytes.
pub fn content_type(bytes: &[u8]) -> &'static str {
    if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        "image/png"
    } else if bytes.starts_with(&[0xFF, 0xD8, 0xFF]) {
        "image/jpeg"
    } else if bytes.starts_with(b"GIF8") {
        "image/gif"
    } else if bytes.len() > 12 && &bytes[..4] == b"RIFF" && &bytes[8..12] == b"WEBP" {
        "image/webp"
    } else if bytes.starts_with(b"BM") {
        "image/bmp"
    } else {
        "application/octet-stream"
    }
}
