//! GenTrack: hybrid stochastic/deterministic multi-object tracking.
//!
//! Detections drive a deterministic birth/death lifecycle and Hungarian
//! association, while per-target particle swarms (optionally PSO-refined,
//! optionally with social interaction fitness) keep unmatched tracks alive
//! through detector dropouts and occlusions. Three variants are provided:
//!
//! - [`Variant::Basic`] — random-motion particles, association only.
//! - [`Variant::Pso`] — particles refined by PSO against history and
//!   exploration fitness.
//! - [`Variant::PsoSocial`] — PSO fitness extended with a social term that
//!   pushes particles away from neighbouring targets.
//!
//! The crate also ships the supporting tooling used by the CLI: MOT-style
//! detection/result files, PGM image sequences, a synthetic scenario
//! generator, and MOTA/IDF1/IDSW evaluation.

pub mod appearance;
pub mod association;
pub mod bbox;
pub mod config;
pub mod eval;
pub mod fitness;
pub mod image;
pub mod io;
pub mod lifecycle;
pub mod motion;
pub mod pso;
pub mod synth;
pub mod track;
pub mod tracker;

pub use bbox::{BBox, Velocity4};
pub use config::{InitMode, ResampleMode, TrackerConfig, Variant};
pub use image::GrayImage;
pub use track::{Detection, FrameInput, Particle, Track, TrackOutput, TrackStatus};
pub use tracker::Tracker;

use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("frame {got} out of order (last processed {last})")]
    FrameOrder { got: u64, last: u64 },
    #[error("missing frame index {missing} in sequence {dir} (found {prev} then {next})")]
    FrameGap {
        dir: PathBuf,
        missing: u64,
        prev: u64,
        next: u64,
    },
    #[error("unknown preset '{0}' (expected crossing, occlusion5 or churn10)")]
    UnknownPreset(String),
    #[error("ground truth and hypothesis frame ranges differ: {0}")]
    FrameRange(String),
    #[error("{path}: {msg}")]
    Image { path: PathBuf, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
