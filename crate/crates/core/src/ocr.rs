//! Per-frame line assembly from OCR boxes.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::domain::{FrameDetection, PipelineConfig, TextBox, Timecode};

/// The subtitle line candidate read at one sampling instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLine {
    pub t: Timecode,
    pub text: String,
    pub conf: f64,
}

impl FrameLine {
    pub fn new(t: Timecode, text: impl Into<String>, conf: f64) -> Self {
        FrameLine { t, text: text.into(), conf }
    }

    pub fn blank(t: Timecode) -> Self {
        FrameLine { t, text: String::new(), conf: 0.0 }
    }

    pub fn is_blank(&self) -> bool {
        self.text.is_empty()
    }
}

fn box_order(a: &TextBox, b: &TextBox) -> Ordering {
    a.bbox
        .x0
        .total_cmp(&b.bbox.x0)
        .then(a.bbox.y0.total_cmp(&b.bbox.y0))
        .then(a.bbox.x1.total_cmp(&b.bbox.x1))
        .then(a.bbox.y1.total_cmp(&b.bbox.y1))
        .then_with(|| a.text.cmp(&b.text))
        .then(a.conf.total_cmp(&b.conf))
}

/// Builds the frame's line: drop boxes centred outside the ROI, drop boxes
/// at or below the confidence gate, order the rest left to right and join
/// them with single spaces. Confidence is the text-length-weighted mean.
pub fn assemble_line(frame: &FrameDetection, cfg: &PipelineConfig) -> FrameLine {
    let roi = cfg.roi;
    let mut kept: Vec<&TextBox> = frame
        .boxes
        .iter()
        .filter(|b| {
            let (cx, cy) = b.bbox.center();
            cx >= roi.x0 && cx <= roi.x1 && cy >= roi.y0 && cy <= roi.y1
        })
        .filter(|b| b.conf > cfg.conf_gate)
        .collect();
    kept.sort_by(|a, b| box_order(a, b));

    let mut text = String::new();
    let mut weighted = 0.0;
    let mut weight = 0usize;
    for b in &kept {
        for word in b.text.split_whitespace() {
            if !text.is_empty() {
                text.push(' ');
            }
            text.push_str(word);
        }
        let len = b.text.chars().count();
        weighted += len as f64 * b.conf;
        weight += len;
    }
    if text.is_empty() || weight == 0 {
        return FrameLine::blank(frame.t);
    }
    FrameLine { t: frame.t, text, conf: weighted / weight as f64 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BBox;

    fn tb(text: &str, conf: f64, x0: f64) -> TextBox {
        TextBox::new(text, conf, BBox::new(x0, 0.8, x0 + 0.2, 0.9))
    }

    #[test]
    fn sorts_left_to_right_and_weights_confidence() {
        let frame = FrameDetection {
            t: Timecode(0),
            boxes: vec![tb("世界", 0.9, 0.6), tb("你好", 0.8, 0.1)],
        };
        let line = assemble_line(&frame, &PipelineConfig::default());
        assert_eq!(line.text, "你好 世界");
        // (2*0.8 + 2*0.9) / 4
        assert!((line.conf - 0.85).abs() < 1e-12);
    }

    #[test]
    fn low_confidence_box_is_gated() {
        let frame = FrameDetection { t: Timecode(0), boxes: vec![tb("字", 0.005, 0.1)] };
        let line = assemble_line(&frame, &PipelineConfig::default());
        assert!(line.is_blank());
        assert_eq!(line.conf, 0.0);
    }

    #[test]
    fn gate_is_strict() {
        let frame = FrameDetection { t: Timecode(0), boxes: vec![tb("字", 0.01, 0.1)] };
        assert!(assemble_line(&frame, &PipelineConfig::default()).is_blank());
    }

    #[test]
    fn box_outside_roi_is_dropped() {
        let frame = FrameDetection {
            t: Timecode(0),
            boxes: vec![TextBox::new("台標", 0.99, BBox::new(0.1, 0.25, 0.3, 0.35))],
        };
        assert!(assemble_line(&frame, &PipelineConfig::default()).is_blank());
    }

    #[test]
    fn whitespace_is_normalized() {
        let frame = FrameDetection {
            t: Timecode(0),
            boxes: vec![tb(" a  b ", 0.5, 0.1), tb("c", 0.5, 0.5)],
        };
        assert_eq!(assemble_line(&frame, &PipelineConfig::default()).text, "a b c");
    }
}
