//! Core tracking entities: detections, particles, tracks, frame inputs.

use crate::appearance::FeatureVector;
use crate::bbox::{BBox, Velocity4};
use crate::image::GrayImage;

/// Detector output: a box plus its confidence in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub bbox: BBox,
    pub conf: f64,
    pub class_id: Option<i64>,
}

impl Detection {
    pub fn new(bbox: BBox, conf: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&conf));
        Self { bbox, conf, class_id: None }
    }
}

/// One stochastic hypothesis of a target state, refined by PSO.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub state: BBox,
    pub vel: Velocity4,
    pub pbest_state: BBox,
    pub pbest_fitness: f64,
    pub fitness: f64,
}

impl Particle {
    /// Fresh particle; its own state is the initial personal best.
    pub fn new(state: BBox, vel: Velocity4) -> Self {
        Self {
            state,
            vel,
            pbest_state: state,
            pbest_fitness: 0.0,
            fitness: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    /// Matched to a detection in the current frame.
    Strong,
    /// Unmatched; coasting on motion model or PSO global best.
    Weak,
    /// Spawned from an unmatched detection this frame.
    New,
}

impl TrackStatus {
    pub fn name(&self) -> &'static str {
        match self {
            TrackStatus::Strong => "strong",
            TrackStatus::Weak => "weak",
            TrackStatus::New => "new",
        }
    }
}

/// Best state found by the most recent PSO run for a track, with the
/// history-fitness component used by the weak-track recovery rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalBest {
    pub state: BBox,
    pub history_fitness: f64,
}

/// A persistent identified target.
#[derive(Debug, Clone)]
pub struct Track {
    pub id: u64,
    pub state: BBox,
    pub vel: Velocity4,
    /// Accumulated mismatch evidence in `[0, RHO_MAX]`; feeds association cost.
    pub penalty: f64,
    /// Consecutive-weak-frame counter; the track is pruned at `age_max`.
    pub age: u32,
    pub status: TrackStatus,
    /// Appearance template, re-extracted on every detection match.
    pub appearance: FeatureVector,
    pub particles: Vec<Particle>,
    pub last_global_best: Option<GlobalBest>,
}

impl Track {
    pub fn new(id: u64, state: BBox, appearance: FeatureVector) -> Self {
        Self {
            id,
            state,
            vel: Velocity4::default(),
            penalty: 0.0,
            age: 0,
            status: TrackStatus::New,
            appearance,
            particles: Vec::new(),
            last_global_best: None,
        }
    }
}

/// One frame of tracker input.
#[derive(Debug, Clone)]
pub struct FrameInput {
    pub index: u64,
    pub image: GrayImage,
    pub detections: Vec<Detection>,
}

/// Per-frame tracker output for one live track.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackOutput {
    pub frame: u64,
    pub id: u64,
    pub bbox: BBox,
    pub status: TrackStatus,
    pub penalty: f64,
    pub age: u32,
    /// True for weak tracks whose global best cleared the recovery threshold.
    pub recovered: bool,
}
