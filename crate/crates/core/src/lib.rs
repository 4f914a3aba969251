//! Core algorithms for turning frame-wise OCR detections of burned-in
//! subtitles into stable subtitle segments, and for mining singing
//! segments from those subtitles together with speech/music activity tracks.
//!
//! The crate only needs `alloc`. File formats, the HTTP service and the
//! command-line front end live in the `subforge` crate.
#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod consolidate;
pub mod cues;
pub mod domain;
pub mod interval;
pub mod miner;
pub mod ocr;
pub mod project;
pub mod synth;

pub use consolidate::{base_text, consolidate_stream, edit_distance, is_similar, strip_denylist};
pub use domain::{
    BBox, ConfigError, FrameDetection, Label, LabeledInterval, PipelineConfig, RawConfig, Roi,
    SegmentId, Status, SubtitleSegment, TextBox, Timecode,
};
pub use ocr::{assemble_line, FrameLine};
