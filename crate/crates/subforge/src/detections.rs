//! `*.det.jsonl`: one OCR sample per line,
//! `{"t_ms": <int>, "boxes": [{"text": <string>, "conf": <float>, "bbox": [x0,y0,x1,y1]}]}`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use subforge_core::{FrameDetection, FrameLine, TextBox, Timecode};

#[derive(Debug, thiserror::Error)]
pub enum DetectionError {
    #[error("line {line}: malformed record: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: timestamp {t_ms} ms does not follow {prev_ms} ms")]
    NonMonotonic { line: usize, t_ms: u64, prev_ms: u64 },
    #[error("line {line}: box {index}: {reason}")]
    BadBox { line: usize, index: usize, reason: &'static str },
    #[error("line {line}: {source}")]
    Read { line: usize, source: std::io::Error },
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    t_ms: u64,
    boxes: Vec<TextBox>,
}

pub fn parse_detections(reader: impl BufRead) -> Result<Vec<FrameDetection>, DetectionError> {
    let mut out: Vec<FrameDetection> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| DetectionError::Read { line: line_no, source })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line)
            .map_err(|e| DetectionError::Malformed { line: line_no, reason: e.to_string() })?;
        if let Some(prev) = out.last() {
            if rec.t_ms <= prev.t.0 {
                return Err(DetectionError::NonMonotonic { line: line_no, t_ms: rec.t_ms, prev_ms: prev.t.0 });
            }
        }
        for (index, b) in rec.boxes.iter().enumerate() {
            b.validate().map_err(|reason| DetectionError::BadBox { line: line_no, index, reason })?;
        }
        out.push(FrameDetection { t: Timecode(rec.t_ms), boxes: rec.boxes });
    }
    Ok(out)
}

pub fn write_detections(frames: &[FrameDetection], mut w: impl Write) -> std::io::Result<()> {
    for f in frames {
        let rec = Record { t_ms: f.t.0, boxes: f.boxes.clone() };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Wraps assembled lines as single-box detections placed inside `bbox`,
/// so synthetic streams can be fed back through the file-based pipeline.
pub fn lines_as_detections(lines: &[FrameLine], bbox: subforge_core::BBox) -> Vec<FrameDetection> {
    lines
        .iter()
        .map(|l| FrameDetection {
            t: l.t,
            boxes: if l.is_blank() { Vec::new() } else { vec![TextBox::new(l.text.clone(), l.conf, bbox)] },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_frames() {
        let doc = r#"{"t_ms": 0, "boxes": [{"text": "你好", "conf": 0.8, "bbox": [0.1, 0.8, 0.3, 0.9]}]}
{"t_ms": 100, "boxes": []}
"#;
        let frames = parse_detections(doc.as_bytes()).unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0].boxes[0].text, "你好");
        assert_eq!(frames[1].t, Timecode(100));
    }

    #[test]
    fn backwards_time_names_line() {
        let doc = "{\"t_ms\": 100, \"boxes\": []}\n{\"t_ms\": 0, \"boxes\": []}\n";
        let err = parse_detections(doc.as_bytes()).unwrap_err();
        assert!(matches!(err, DetectionError::NonMonotonic { line: 2, .. }), "{err}");
    }

    #[test]
    fn empty_stream() {
        assert!(parse_detections(&b""[..]).unwrap().is_empty());
    }

    #[test]
    fn malformed_and_out_of_range() {
        let err = parse_detections(&b"{\"t_ms\": 0}\n"[..]).unwrap_err();
        assert!(matches!(err, DetectionError::Malformed { line: 1, .. }));
        let doc = r#"{"t_ms": 0, "boxes": [{"text": "x", "conf": 0.5, "bbox": [0.1, 0.8, 1.3, 0.9]}]}"#;
        let err = parse_detections(doc.as_bytes()).unwrap_err();
        assert!(matches!(err, DetectionError::BadBox { line: 1, index: 0, .. }));
    }

    #[test]
    fn write_then_parse() {
        let frames = vec![FrameDetection {
            t: Timecode(200),
            boxes: vec![TextBox::new("字幕", 0.75, subforge_core::BBox::new(0.2, 0.8, 0.6, 0.95))],
        }];
        let mut buf = Vec::new();
        write_detections(&frames, &mut buf).unwrap();
        assert_eq!(parse_detections(&buf[..]).unwrap(), frames);
    }
}
