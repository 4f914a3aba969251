//! Half-open millisecond interval helpers.

use alloc::vec::Vec;

use crate::domain::{Label, LabeledInterval, Timecode};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IntervalError {
    #[error("empty interval [{start}, {end}) at position {index}")]
    Empty { index: usize, start: u64, end: u64 },
}

/// Length of `[a0, a1) ∩ [b0, b1)` in milliseconds.
pub fn overlap_ms(a0: Timecode, a1: Timecode, b0: Timecode, b1: Timecode) -> u64 {
    a1.min(b1) - a0.max(b0)
}

/// Sorts intervals and coalesces overlapping or touching spans that share a
/// label. Output is ordered by start, then label.
pub fn normalize(mut intervals: Vec<LabeledInterval>) -> Result<Vec<LabeledInterval>, IntervalError> {
    if let Some((index, iv)) = intervals.iter().enumerate().find(|(_, iv)| iv.start >= iv.end) {
        return Err(IntervalError::Empty { index, start: iv.start.0, end: iv.end.0 });
    }
    intervals.sort_by_key(|iv| (iv.label, iv.start, iv.end));
    let mut merged: Vec<LabeledInterval> = Vec::with_capacity(intervals.len());
    for iv in intervals {
        match merged.last_mut() {
            Some(last) if last.label == iv.label && iv.start <= last.end => {
                last.end = last.end.max(iv.end);
            }
            _ => merged.push(iv),
        }
    }
    merged.sort_by_key(|iv| (iv.start, iv.label));
    Ok(merged)
}

/// Disjoint, sorted spans carrying `label`.
pub fn spans_with_label(track: &[LabeledInterval], label: Label) -> Vec<(Timecode, Timecode)> {
    let mut spans: Vec<(Timecode, Timecode)> =
        track.iter().filter(|iv| iv.label == label).map(|iv| (iv.start, iv.end)).collect();
    spans.sort();
    let mut out: Vec<(Timecode, Timecode)> = Vec::with_capacity(spans.len());
    for (s, e) in spans {
        match out.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => out.push((s, e)),
        }
    }
    out
}
