//! SubRip documents: LF newlines, UTF-8 without BOM, one blank line after
//! every record.

use std::collections::HashSet;
use std::fmt::Write as _;

use subforge_core::{SegmentId, Status, SubtitleSegment, Timecode};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SrtError {
    #[error("segment {index}: starts before the previous one ends")]
    Overlap { index: usize },
    #[error("segment {index}: does not end after it starts")]
    EmptySpan { index: usize },
    #[error("segment {index}: deleted segments cannot be written")]
    Deleted { index: usize },
    #[error("segment {index}: text is empty, has a blank line, or contains control characters")]
    BadText { index: usize },
    #[error("record {record}: {reason}")]
    Malformed { record: usize, reason: String },
}

fn check_text(text: &str) -> bool {
    !text.is_empty()
        && text.split('\n').all(|l| !l.trim().is_empty())
        && !text.chars().any(|c| c.is_control() && c != '\n')
}

pub fn write_srt(segments: &[SubtitleSegment]) -> Result<String, SrtError> {
    let mut out = String::new();
    let mut prev_end: Option<Timecode> = None;
    for (i, seg) in segments.iter().enumerate() {
        let index = i + 1;
        if seg.status == Status::Deleted {
            return Err(SrtError::Deleted { index });
        }
        if seg.start >= seg.end {
            return Err(SrtError::EmptySpan { index });
        }
        if prev_end.is_some_and(|e| seg.start < e) {
            return Err(SrtError::Overlap { index });
        }
        if !check_text(&seg.text) {
            return Err(SrtError::BadText { index });
        }
        prev_end = Some(seg.end);
        let _ = write!(out, "{index}\n{} --> {}\n{}\n\n", seg.start, seg.end, seg.text);
    }
    Ok(out)
}

fn parse_timecode(s: &str) -> Option<Timecode> {
    let (hms, ms) = s.split_once(',')?;
    let mut parts = hms.split(':');
    let h: u64 = parts.next()?.parse().ok()?;
    let m: u64 = parts.next()?.parse().ok()?;
    let sec: u64 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || m > 59 || sec > 59 || ms.len() != 3 {
        return None;
    }
    let ms: u64 = ms.parse().ok()?;
    Some(Timecode(((h * 60 + m) * 60 + sec) * 1000 + ms))
}

fn parse_time_line(line: &str) -> Option<(Timecode, Timecode)> {
    let mut it = line.split_whitespace();
    let start = parse_timecode(it.next()?)?;
    if it.next()? != "-->" {
        return None;
    }
    let end = parse_timecode(it.next()?)?;
    Some((start, end))
}

/// Parses an SRT document. Segments get fresh ids, confidence 1.0 and
/// status `edited`.
pub fn read_srt(doc: &str) -> Result<Vec<SubtitleSegment>, SrtError> {
    let doc = doc.strip_prefix('\u{feff}').unwrap_or(doc).replace("\r\n", "\n");
    let mut lines = doc.split('\n').peekable();
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    let mut record = 0;
    loop {
        while lines.peek().is_some_and(|l| l.trim().is_empty()) {
            lines.next();
        }
        let Some(index_line) = lines.next() else { break };
        record += 1;
        let malformed = |reason: &str| SrtError::Malformed { record, reason: reason.to_string() };
        if index_line.trim().parse::<u64>().is_err() {
            return Err(malformed("missing numeric index"));
        }
        let time_line = lines.next().ok_or_else(|| malformed("missing time line"))?;
        let (start, end) = parse_time_line(time_line).ok_or_else(|| malformed("malformed time line"))?;
        if start >= end {
            return Err(malformed("end not after start"));
        }
        let mut text_lines = Vec::new();
        while let Some(l) = lines.peek() {
            if l.trim().is_empty() {
                break;
            }
            text_lines.push(*l);
            lines.next();
        }
        if text_lines.is_empty() {
            return Err(malformed("missing text"));
        }
        let base = SegmentId::for_start(start);
        let mut id = base.clone();
        let mut k = 2;
        while ids.contains(&id) {
            id = SegmentId(format!("{}.{k}", base.0));
            k += 1;
        }
        ids.insert(id.clone());
        out.push(SubtitleSegment {
            id,
            text: text_lines.join("\n"),
            start,
            end,
            conf: 1.0,
            status: Status::Edited,
        });
    }
    Ok(out)
}
