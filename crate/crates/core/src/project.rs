//! Editable project state and the mutations the editor performs on it.

use alloc::string::String;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::consolidate::{base_text, consolidate_stream, ConsolidateError};
use crate::domain::{FrameDetection, PipelineConfig, SegmentId, Status, SubtitleSegment, Timecode};
use crate::interval::overlap_ms;
use crate::ocr::assemble_line;

#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct Project {
    pub episode_id: String,
    pub revision: u64,
    pub config: PipelineConfig,
    pub segments: Vec<SubtitleSegment>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProjectError {
    #[error("stale revision {given}, project is at {current}")]
    Conflict { given: u64, current: u64 },
    #[error("unknown segment {0}")]
    UnknownSegment(SegmentId),
    #[error("duplicate segment id {0}")]
    DuplicateId(SegmentId),
    #[error("segment {0} does not end after it starts")]
    EmptySpan(SegmentId),
    #[error("segment {0} text is empty or contains a blank line")]
    BadText(SegmentId),
    #[error("segment {0} would overlap {1}")]
    Overlap(SegmentId, SegmentId),
    #[error("segments are not sorted by start")]
    Unsorted,
    #[error("merge needs at least two segments")]
    MergeTooFew,
    #[error("segments to merge are not temporally consecutive")]
    NotConsecutive,
}

/// Fields a client may change on one segment.
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SegmentPatch {
    pub text: Option<String>,
    pub start_ms: Option<u64>,
    pub end_ms: Option<u64>,
    pub status: Option<Status>,
}

fn text_ok(text: &str) -> bool {
    !text.trim().is_empty() && text.split('\n').all(|l| !l.trim().is_empty())
}

/// OCR frames through line assembly and consolidation.
pub fn extract_segments(
    frames: &[FrameDetection],
    cfg: &PipelineConfig,
) -> Result<Vec<SubtitleSegment>, ConsolidateError> {
    let lines: Vec<_> = frames.iter().map(|f| assemble_line(f, cfg)).collect();
    consolidate_stream(&lines, cfg)
}

/// Text of a merged segment: the longest member when every member shares
/// one base text, otherwise all members joined by single spaces.
pub fn merged_text(texts: &[&str], cfg: &PipelineConfig) -> String {
    let Some(first) = texts.first() else { return String::new() };
    let base = base_text(first, cfg);
    if texts.iter().all(|t| base_text(t, cfg) == base) {
        let mut best = *first;
        for t in &texts[1..] {
            if t.chars().count() > best.chars().count() {
                best = t;
            }
        }
        return String::from(best);
    }
    let mut out = String::new();
    for t in texts {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(t.trim());
    }
    out
}

impl Project {
    pub fn new(episode_id: impl Into<String>, config: PipelineConfig) -> Self {
        Project { episode_id: episode_id.into(), revision: 0, config, segments: Vec::new() }
    }

    /// Checks id uniqueness, ordering and per-segment spans.
    pub fn validate(&self) -> Result<(), ProjectError> {
        let mut ids: Vec<&SegmentId> = self.segments.iter().map(|s| &s.id).collect();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(ProjectError::DuplicateId(w[0].clone()));
        }
        if let Some(s) = self.segments.iter().find(|s| s.start >= s.end) {
            return Err(ProjectError::EmptySpan(s.id.clone()));
        }
        if self.segments.windows(2).any(|w| w[0].start > w[1].start) {
            return Err(ProjectError::Unsorted);
        }
        Ok(())
    }

    pub fn segment(&self, id: &SegmentId) -> Option<&SubtitleSegment> {
        self.segments.iter().find(|s| &s.id == id)
    }

    /// Non-deleted segments in temporal order.
    pub fn live_segments(&self) -> impl Iterator<Item = &SubtitleSegment> {
        self.segments.iter().filter(|s| s.status != Status::Deleted)
    }

    pub fn check_revision(&self, given: u64) -> Result<(), ProjectError> {
        if given != self.revision {
            return Err(ProjectError::Conflict { given, current: self.revision });
        }
        Ok(())
    }

    /// An id not used by any segment, derived from `start`.
    pub fn unique_id(&self, start: Timecode) -> SegmentId {
        let base = SegmentId::for_start(start);
        if self.segment(&base).is_none() {
            return base;
        }
        (2..)
            .map(|k| SegmentId(alloc::format!("{}.{k}", base.0)))
            .find(|id| self.segment(id).is_none())
            .expect("unbounded search")
    }

    fn sort(&mut self) {
        self.segments.sort_by(|a, b| (a.start, a.end, &a.id).cmp(&(b.start, b.end, &b.id)));
    }

    fn index_of(&self, id: &SegmentId) -> Result<usize, ProjectError> {
        self.segments.iter().position(|s| &s.id == id).ok_or_else(|| ProjectError::UnknownSegment(id.clone()))
    }

    pub fn patch_segment(
        &mut self,
        id: &SegmentId,
        patch: &SegmentPatch,
        revision: u64,
    ) -> Result<SubtitleSegment, ProjectError> {
        self.check_revision(revision)?;
        let idx = self.index_of(id)?;
        let mut seg = self.segments[idx].clone();
        if let Some(text) = &patch.text {
            if !text_ok(text) {
                return Err(ProjectError::BadText(id.clone()));
            }
            seg.text = text.clone();
        }
        if let Some(s) = patch.start_ms {
            seg.start = Timecode(s);
        }
        if let Some(e) = patch.end_ms {
            seg.end = Timecode(e);
        }
        if seg.start >= seg.end {
            return Err(ProjectError::EmptySpan(id.clone()));
        }
        seg.status = match patch.status {
            Some(st) => st,
            None if patch.text.is_some() || patch.start_ms.is_some() || patch.end_ms.is_some() => Status::Edited,
            None => seg.status,
        };
        if seg.status != Status::Deleted {
            if let Some(other) = self
                .live_segments()
                .find(|o| &o.id != id && overlap_ms(seg.start, seg.end, o.start, o.end) > 0)
            {
                return Err(ProjectError::Overlap(id.clone(), other.id.clone()));
            }
        }
        self.segments[idx] = seg.clone();
        self.sort();
        self.revision += 1;
        Ok(seg)
    }

    pub fn delete_segment(&mut self, id: &SegmentId, revision: u64) -> Result<SubtitleSegment, ProjectError> {
        self.check_revision(revision)?;
        let idx = self.index_of(id)?;
        self.segments[idx].status = Status::Deleted;
        self.revision += 1;
        Ok(self.segments[idx].clone())
    }

    /// Collapses temporally consecutive live segments into one. The earliest
    /// member keeps its id; the others are removed.
    pub fn merge_segments(&mut self, ids: &[SegmentId], revision: u64) -> Result<SubtitleSegment, ProjectError> {
        self.check_revision(revision)?;
        if ids.len() < 2 {
            return Err(ProjectError::MergeTooFew);
        }
        let live: Vec<&SegmentId> = self.live_segments().map(|s| &s.id).collect();
        let mut positions = Vec::with_capacity(ids.len());
        for id in ids {
            match live.iter().position(|l| *l == id) {
                Some(p) => positions.push(p),
                None => {
                    self.index_of(id)?;
                    return Err(ProjectError::NotConsecutive);
                }
            }
        }
        positions.sort_unstable();
        if positions.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(ProjectError::NotConsecutive);
        }
        let members: Vec<SubtitleSegment> = positions
            .iter()
            .map(|&p| self.segment(live[p]).cloned().expect("live id"))
            .collect();
        let texts: Vec<&str> = members.iter().map(|m| m.text.as_str()).collect();
        let merged = SubtitleSegment {
            id: members[0].id.clone(),
            text: merged_text(&texts, &self.config),
            start: members.iter().map(|m| m.start).min().expect("non-empty"),
            end: members.iter().map(|m| m.end).max().expect("non-empty"),
            conf: members.iter().map(|m| m.conf).fold(0.0, f64::max),
            status: Status::Edited,
        };
        self.segments.retain(|s| !members.iter().any(|m| m.id == s.id));
        self.segments.push(merged.clone());
        self.sort();
        self.revision += 1;
        Ok(merged)
    }

    /// Replaces all automatic segments with `autos`. Segments carrying a
    /// manual status stay, and automatic segments overlapping them are dropped.
    pub fn replace_auto_segments(&mut self, autos: Vec<SubtitleSegment>) {
        self.segments.retain(|s| s.status.is_manual());
        for mut seg in autos {
            let clashes = self
                .segments
                .iter()
                .any(|m| m.status.is_manual() && overlap_ms(seg.start, seg.end, m.start, m.end) > 0);
            if clashes {
                continue;
            }
            seg.status = Status::Auto;
            seg.id = self.unique_id(seg.start);
            self.segments.push(seg);
        }
        self.sort();
        self.revision += 1;
    }

    /// Runs extraction on `frames` with the project config and applies it.
    pub fn run_pipeline(&mut self, frames: &[FrameDetection]) -> Result<(), ConsolidateError> {
        let autos = extract_segments(frames, &self.config)?;
        self.replace_auto_segments(autos);
        Ok(())
    }
}
