//! Readers and writers for every file the pipeline touches, the local
//! correction service, and the shared plumbing behind the `subforge` binary.

pub mod config;
pub mod detections;
pub mod error;
pub mod files;
pub mod frames;
pub mod service;
pub mod srt;

pub use error::Error;
