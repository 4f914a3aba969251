//! Adjacency cues for the correction editor.

use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::domain::{PipelineConfig, SegmentId, Status, SubtitleSegment};

/// Per-segment editor hint: `adjacent_to_prev` rows render yellow,
/// `sequence_start` rows render red.
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CueAnnotation {
    pub segment_id: SegmentId,
    pub adjacent_to_prev: bool,
    pub sequence_start: bool,
}

/// Cues for the non-deleted segments, in temporal order.
pub fn compute_cues(segments: &[SubtitleSegment], cfg: &PipelineConfig) -> Vec<CueAnnotation> {
    let mut live: Vec<&SubtitleSegment> = segments.iter().filter(|s| s.status != Status::Deleted).collect();
    live.sort_by_key(|s| (s.start, s.end));
    let mut out = Vec::with_capacity(live.len());
    let mut prev: Option<&SubtitleSegment> = None;
    for seg in live {
        let adjacent = prev.is_some_and(|p| seg.start - p.end <= cfg.adjacency_gap_ms);
        out.push(CueAnnotation {
            segment_id: seg.id.clone(),
            adjacent_to_prev: adjacent,
            sequence_start: !adjacent,
        });
        prev = Some(seg);
    }
    out
}
