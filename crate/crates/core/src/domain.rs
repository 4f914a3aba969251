//! Shared value types and the pipeline configuration.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::Sub;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Milliseconds from the start of an episode.
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(transparent))]
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timecode(pub u64);

impl Timecode {
    pub const ZERO: Timecode = Timecode(0);

    pub const fn from_millis(ms: u64) -> Self {
        Timecode(ms)
    }

    pub const fn millis(self) -> u64 {
        self.0
    }

    pub const fn add_millis(self, ms: u64) -> Self {
        Timecode(self.0 + ms)
    }

    /// Difference in milliseconds, clamped at zero.
    pub const fn saturating_since(self, earlier: Timecode) -> u64 {
        self.0.saturating_sub(earlier.0)
    }
}

impl Sub for Timecode {
    type Output = u64;

    fn sub(self, rhs: Timecode) -> u64 {
        self.saturating_since(rhs)
    }
}

impl fmt::Display for Timecode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ms = self.0;
        write!(
            f,
            "{:02}:{:02}:{:02},{:03}",
            ms / 3_600_000,
            (ms / 60_000) % 60,
            (ms / 1000) % 60,
            ms % 1000
        )
    }
}

/// Normalized bounding box `(x0, y0, x1, y1)`, all coordinates in `[0, 1]`.
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(from = "[f64; 4]", into = "[f64; 4]"))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BBox {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        BBox { x0, y0, x1, y1 }
    }

    pub fn is_valid(&self) -> bool {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        unit(self.x0) && unit(self.y0) && unit(self.x1) && unit(self.y1)
            && self.x0 < self.x1
            && self.y0 < self.y1
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }
}

impl From<[f64; 4]> for BBox {
    fn from(v: [f64; 4]) -> Self {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x0, b.y0, b.x1, b.y1]
    }
}

/// Region of interest; same layout as [`BBox`].
pub type Roi = BBox;

#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct TextBox {
    pub text: String,
    pub conf: f64,
    pub bbox: BBox,
}

impl TextBox {
    pub fn new(text: impl Into<String>, conf: f64, bbox: BBox) -> Self {
        TextBox { text: text.into(), conf, bbox }
    }

    /// Checks the record-level invariants: non-empty text, confidence in
    /// `[0, 1]` and an ordered, normalized box.
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.text.is_empty() {
            return Err("empty box text");
        }
        if !(0.0..=1.0).contains(&self.conf) {
            return Err("box confidence out of [0,1]");
        }
        if !self.bbox.is_valid() {
            return Err("bbox out of range");
        }
        Ok(())
    }
}

/// All boxes detected at one sampling instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDetection {
    pub t: Timecode,
    pub boxes: Vec<TextBox>,
}

/// Opaque segment identifier.
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(transparent))]
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SegmentId(pub String);

impl SegmentId {
    /// Identifier derived from a segment's start time.
    pub fn for_start(start: Timecode) -> Self {
        SegmentId(alloc::format!("t{}", start.millis()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SegmentId {
    fn from(s: &str) -> Self {
        SegmentId(s.to_string())
    }
}

#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "lowercase"))]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Auto,
    Edited,
    Confirmed,
    Deleted,
}

impl Status {
    /// Statuses that record a human decision and must survive pipeline re-runs.
    pub fn is_manual(self) -> bool {
        !matches!(self, Status::Auto)
    }
}

/// A finalized subtitle.
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct SubtitleSegment {
    pub id: SegmentId,
    pub text: String,
    #[cfg_attr(feature = "serde", serde(rename = "start_ms"))]
    pub start: Timecode,
    #[cfg_attr(feature = "serde", serde(rename = "end_ms"))]
    pub end: Timecode,
    pub conf: f64,
    pub status: Status,
}

impl SubtitleSegment {
    pub fn duration_ms(&self) -> u64 {
        self.end - self.start
    }
}

#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "lowercase"))]
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Music,
    Speech,
}

/// A span produced by speech/music activity detection.
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledInterval {
    #[cfg_attr(feature = "serde", serde(rename = "start_ms"))]
    pub start: Timecode,
    #[cfg_attr(feature = "serde", serde(rename = "end_ms"))]
    pub end: Timecode,
    pub label: Label,
}

impl LabeledInterval {
    pub const fn new(start: u64, end: u64, label: Label) -> Self {
        LabeledInterval { start: Timecode(start), end: Timecode(end), label }
    }
}

pub const DEFAULT_SAMPLING_PERIOD_MS: u64 = 100;
pub const DEFAULT_CONF_GATE: f64 = 0.01;
pub const DEFAULT_RETENTION_T_MS: u64 = 500;
pub const DEFAULT_SINGING_MIN_CHARS: usize = 4;
pub const DEFAULT_SINGING_SECS_PER_CHAR: f64 = 0.4;
pub const DEFAULT_CANDIDATE_GAP_MS: u64 = 2000;
pub const DEFAULT_OVERLAP_THETA: f64 = 0.5;
pub const DEFAULT_ADJACENCY_GAP_MS: u64 = 200;
pub const DEFAULT_ROI: Roi = BBox::new(0.0, 0.75, 1.0, 1.0);
pub const DEFAULT_DENYLIST: [char; 6] = ['|', '_', '~', '`', '\\', '^'];
pub const DEFAULT_ELLIPSES: [&str; 3] = ["…", "...", "⋯"];

/// Every tunable of the pipeline. Construct through [`PipelineConfig::default`]
/// or [`RawConfig::validate`].
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawConfig", into = "RawConfig"))]
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub sampling_period_ms: u64,
    pub roi: Roi,
    pub conf_gate: f64,
    pub retention_t_ms: u64,
    pub denylist: BTreeSet<char>,
    pub ellipsis_set: BTreeSet<String>,
    pub singing_min_chars: usize,
    pub singing_secs_per_char: f64,
    pub candidate_gap_ms: u64,
    pub overlap_theta: f64,
    pub adjacency_gap_ms: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sampling_period_ms: DEFAULT_SAMPLING_PERIOD_MS,
            roi: DEFAULT_ROI,
            conf_gate: DEFAULT_CONF_GATE,
            retention_t_ms: DEFAULT_RETENTION_T_MS,
            denylist: DEFAULT_DENYLIST.into_iter().collect(),
            ellipsis_set: DEFAULT_ELLIPSES.iter().map(|s| s.to_string()).collect(),
            singing_min_chars: DEFAULT_SINGING_MIN_CHARS,
            singing_secs_per_char: DEFAULT_SINGING_SECS_PER_CHAR,
            candidate_gap_ms: DEFAULT_CANDIDATE_GAP_MS,
            overlap_theta: DEFAULT_OVERLAP_THETA,
            adjacency_gap_ms: DEFAULT_ADJACENCY_GAP_MS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{field} out of {range}: {value}")]
    OutOfRange { field: &'static str, range: &'static str, value: String },
    #[error("{field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

/// A configuration record as parsed from disk: every field optional.
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub sampling_period_ms: Option<u64>,
    pub roi: Option<[f64; 4]>,
    pub conf_gate: Option<f64>,
    pub retention_t_ms: Option<u64>,
    pub denylist: Option<Vec<String>>,
    pub ellipsis_set: Option<Vec<String>>,
    pub singing_min_chars: Option<usize>,
    pub singing_secs_per_char: Option<f64>,
    pub candidate_gap_ms: Option<u64>,
    pub overlap_theta: Option<f64>,
    pub adjacency_gap_ms: Option<u64>,
}

fn positive(field: &'static str, v: u64) -> Result<u64, ConfigError> {
    if v == 0 {
        return Err(ConfigError::OutOfRange { field, range: "(0,inf)", value: v.to_string() });
    }
    Ok(v)
}

fn unit(field: &'static str, v: f64) -> Result<f64, ConfigError> {
    if !(0.0..=1.0).contains(&v) {
        return Err(ConfigError::OutOfRange { field, range: "[0,1]", value: alloc::format!("{v}") });
    }
    Ok(v)
}

impl RawConfig {
    /// Applies defaults to absent fields and range-checks the rest.
    pub fn validate(self) -> Result<PipelineConfig, ConfigError> {
        let d = PipelineConfig::default();
        let roi = match self.roi {
            Some(r) => {
                let roi = BBox::from(r);
                if !roi.is_valid() {
                    return Err(ConfigError::Invalid {
                        field: "roi",
                        reason: alloc::format!("not an ordered rectangle inside [0,1]: {r:?}"),
                    });
                }
                roi
            }
            None => d.roi,
        };
        let denylist = match self.denylist {
            Some(items) => {
                let mut set = BTreeSet::new();
                for item in items {
                    let mut chars = item.chars();
                    match (chars.next(), chars.next()) {
                        (Some(c), None) => {
                            set.insert(c);
                        }
                        _ => {
                            return Err(ConfigError::Invalid {
                                field: "denylist",
                                reason: alloc::format!("entry {item:?} is not a single character"),
                            })
                        }
                    }
                }
                set
            }
            None => d.denylist,
        };
        let ellipsis_set = match self.ellipsis_set {
            Some(items) => {
                if let Some(bad) = items.iter().find(|s| s.trim().is_empty()) {
                    return Err(ConfigError::Invalid {
                        field: "ellipsis_set",
                        reason: alloc::format!("blank entry {bad:?}"),
                    });
                }
                items.into_iter().collect()
            }
            None => d.ellipsis_set,
        };
        let singing_secs_per_char = match self.singing_secs_per_char {
            Some(v) if !(v.is_finite() && v >= 0.0) => {
                return Err(ConfigError::OutOfRange {
                    field: "singing_secs_per_char",
                    range: "[0,inf)",
                    value: alloc::format!("{v}"),
                })
            }
            Some(v) => v,
            None => d.singing_secs_per_char,
        };
        let singing_min_chars = match self.singing_min_chars {
            Some(0) => {
                return Err(ConfigError::OutOfRange {
                    field: "singing_min_chars",
                    range: "(0,inf)",
                    value: "0".to_string(),
                })
            }
            Some(v) => v,
            None => d.singing_min_chars,
        };
        Ok(PipelineConfig {
            sampling_period_ms: match self.sampling_period_ms {
                Some(v) => positive("sampling_period_ms", v)?,
                None => d.sampling_period_ms,
            },
            roi,
            conf_gate: match self.conf_gate {
                Some(v) => unit("conf_gate", v)?,
                None => d.conf_gate,
            },
            retention_t_ms: match self.retention_t_ms {
                Some(v) => positive("retention_t_ms", v)?,
                None => d.retention_t_ms,
            },
            denylist,
            ellipsis_set,
            singing_min_chars,
            singing_secs_per_char,
            candidate_gap_ms: match self.candidate_gap_ms {
                Some(v) => positive("candidate_gap_ms", v)?,
                None => d.candidate_gap_ms,
            },
            overlap_theta: match self.overlap_theta {
                Some(v) => unit("overlap_theta", v)?,
                None => d.overlap_theta,
            },
            adjacency_gap_ms: match self.adjacency_gap_ms {
                Some(v) => positive("adjacency_gap_ms", v)?,
                None => d.adjacency_gap_ms,
            },
        })
    }
}

impl TryFrom<RawConfig> for PipelineConfig {
    type Error = ConfigError;

    fn try_from(raw: RawConfig) -> Result<Self, ConfigError> {
        raw.validate()
    }
}

impl From<PipelineConfig> for RawConfig {
    fn from(c: PipelineConfig) -> Self {
        RawConfig {
            sampling_period_ms: Some(c.sampling_period_ms),
            roi: Some(c.roi.into()),
            conf_gate: Some(c.conf_gate),
            retention_t_ms: Some(c.retention_t_ms),
            denylist: Some(c.denylist.iter().map(|ch| ch.to_string()).collect()),
            ellipsis_set: Some(c.ellipsis_set.into_iter().collect()),
            singing_min_chars: Some(c.singing_min_chars),
            singing_secs_per_char: Some(c.singing_secs_per_char),
            candidate_gap_ms: Some(c.candidate_gap_ms),
            overlap_theta: Some(c.overlap_theta),
            adjacency_gap_ms: Some(c.adjacency_gap_ms),
        }
    }
}

/// Free-function form of [`RawConfig::validate`].
pub fn validate_config(raw: RawConfig) -> Result<PipelineConfig, ConfigError> {
    raw.validate()
}
