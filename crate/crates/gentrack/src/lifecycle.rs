//! Track lifecycle: matched/weak/new state updates, neighbour search,
//! penalty and age dynamics, and pruning.

use crate::appearance::extract_features;
use crate::bbox::{center_distance, clamp_to_image, diagonal, BBox, Velocity4};
use crate::config::{TrackerConfig, RHO_MAX};
use crate::image::GrayImage;
use crate::motion::bounds_for_cfg;
use crate::pso::SwarmResult;
use crate::track::{Detection, GlobalBest, Track, TrackStatus};

/// A candidate neighbour as seen by one track: the frame-start state used
/// for the distance test, and the state/velocity it contributes once
/// selected (a strong neighbour contributes its matched detection, a weak
/// one its previous optimal state).
#[derive(Debug, Clone, Copy)]
pub struct NeighborCandidate {
    pub id: u64,
    pub snapshot_state: BBox,
    pub contributed_state: BBox,
    pub contributed_vel: Velocity4,
}

impl NeighborCandidate {
    /// Candidate whose contribution is simply its frame-start snapshot.
    pub fn from_snapshot(track: &Track) -> Self {
        Self {
            id: track.id,
            snapshot_state: track.state,
            contributed_state: track.state,
            contributed_vel: track.vel,
        }
    }
}

/// Adaptive neighbour radius: the track's own box diagonal (doubled for the
/// expanded search).
pub fn neighbor_radius(state: &BBox, expanded: bool) -> f64 {
    let d = diagonal(state);
    if expanded {
        2.0 * d
    } else {
        d
    }
}

/// Neighbours of `track` among `candidates`: centers within the adaptive
/// radius (closed ball), self excluded.
pub fn neighbor_search(
    track: &Track,
    candidates: &[NeighborCandidate],
    expanded: bool,
) -> Vec<(BBox, Velocity4)> {
    let radius = neighbor_radius(&track.state, expanded);
    candidates
        .iter()
        .filter(|c| c.id != track.id && center_distance(&track.state, &c.snapshot_state) <= radius)
        .map(|c| (c.contributed_state, c.contributed_vel))
        .collect()
}

/// Matched-track update: adopt the detection, reset penalty and age,
/// refresh the appearance template, and smooth the displacement velocity.
pub fn update_matched(track: &mut Track, det: &Detection, image: &GrayImage, cfg: &TrackerConfig) {
    let raw = Velocity4::new(
        det.bbox.u - track.state.u,
        det.bbox.v - track.state.v,
        det.bbox.w - track.state.w,
        det.bbox.h - track.state.h,
    );
    track.vel = clamp_velocity(smooth_velocity(&raw, &track.vel), &det.bbox, cfg);
    track.state = det.bbox;
    track.penalty = 0.0;
    track.age = 0;
    track.status = TrackStatus::Strong;
    track.appearance = extract_features(image, &det.bbox);
    track.last_global_best = None;
}

/// Create a track from an unmatched detection.
pub fn spawn(det: &Detection, id: u64, image: &GrayImage) -> Track {
    Track::new(id, det.bbox, extract_features(image, &det.bbox))
}

/// Basic-variant weak update: coast on own velocity, accrue penalty and age.
pub fn update_weak_basic(track: &mut Track, image_w: f64, image_h: f64, cfg: &TrackerConfig) {
    let advanced = BBox::new(
        track.state.u + track.vel.du,
        track.state.v + track.vel.dv,
        (track.state.w + track.vel.dw).max(1.0),
        (track.state.h + track.vel.dh).max(1.0),
    );
    track.state = clamp_to_image(&advanced, image_w, image_h);
    track.penalty = (track.penalty + cfg.penalty_step()).min(RHO_MAX);
    track.age += 1;
    track.status = TrackStatus::Weak;
}

/// PSO-variant weak update: adopt the swarm's global best (advanced by the
/// velocity contribution). Penalty and age move by the sign of
/// `rho_re - f_g`: high-fitness bests heal the track, low-fitness ones age
/// it, and `sign(0) = 0` leaves both untouched at the exact threshold.
pub fn update_weak_pso(
    track: &mut Track,
    swarm: &SwarmResult,
    image_w: f64,
    image_h: f64,
    cfg: &TrackerConfig,
) {
    let f_g = swarm.gbest_history_fitness;
    let advanced = BBox::new(
        swarm.gbest_state.u + cfg.lambda_v * track.vel.du,
        swarm.gbest_state.v + cfg.lambda_v * track.vel.dv,
        (swarm.gbest_state.w + cfg.lambda_v * track.vel.dw).max(1.0),
        (swarm.gbest_state.h + cfg.lambda_v * track.vel.dh).max(1.0),
    );
    track.state = clamp_to_image(&advanced, image_w, image_h);

    let direction = sign(cfg.rho_re - f_g);
    let delta_pen = RHO_MAX * (2.0 - f_g) / cfg.age_max as f64;
    track.penalty = (track.penalty + direction * delta_pen).clamp(0.0, RHO_MAX);
    if direction > 0.0 {
        track.age += 1;
    } else if direction < 0.0 {
        track.age = track.age.saturating_sub(1);
    }
    track.status = TrackStatus::Weak;
    track.last_global_best = Some(GlobalBest { state: swarm.gbest_state, history_fitness: f_g });
}

/// PSO-Social weak update: as [`update_weak_pso`] (the social term already
/// lives inside the swarm fitness), then the neighbour adjustment — the
/// planar position shifts by the neighbour-mean offset projected onto the
/// normalized velocity direction, and the box size relaxes toward the
/// neighbour mean. Skipped entirely when there are no neighbours; the
/// positional shift is skipped for a zero planar velocity.
pub fn update_weak_social(
    track: &mut Track,
    swarm: &SwarmResult,
    neighbors: &[(BBox, Velocity4)],
    image_w: f64,
    image_h: f64,
    cfg: &TrackerConfig,
) {
    update_weak_pso(track, swarm, image_w, image_h, cfg);
    if neighbors.is_empty() {
        return;
    }
    let n = neighbors.len() as f64;
    let mean_u = neighbors.iter().map(|(b, _)| b.u).sum::<f64>() / n;
    let mean_v = neighbors.iter().map(|(b, _)| b.v).sum::<f64>() / n;
    let mean_w = neighbors.iter().map(|(b, _)| b.w).sum::<f64>() / n;
    let mean_h = neighbors.iter().map(|(b, _)| b.h).sum::<f64>() / n;

    let mut state = track.state;
    let speed = track.vel.planar_norm();
    if speed > 0.0 {
        let (dir_u, dir_v) = (track.vel.du / speed, track.vel.dv / speed);
        let proj = (mean_u - state.u) * dir_u + (mean_v - state.v) * dir_v;
        state.u += cfg.sigma_s * proj * dir_u;
        state.v += cfg.sigma_s * proj * dir_v;
    }
    state.w = (state.w + cfg.sigma_s * (mean_w - state.w)).max(1.0);
    state.h = (state.h + cfg.sigma_s * (mean_h - state.h)).max(1.0);
    track.state = clamp_to_image(&state, image_w, image_h);
}

/// Remove expired tracks. Weak tracks centered inside the entrance margin
/// accrue one extra age first, then every track with `age >= age_max` goes.
pub fn prune(tracks: &mut Vec<Track>, image_w: f64, image_h: f64, cfg: &TrackerConfig) {
    let margin = cfg.entrance_margin_px(image_w, image_h);
    for track in tracks.iter_mut() {
        if track.status == TrackStatus::Weak && near_border(&track.state, image_w, image_h, margin)
        {
            track.age += 1;
        }
    }
    tracks.retain(|t| t.age < cfg.age_max);
}

/// Component-wise mean of the current and previous velocity.
pub fn smooth_velocity(v_now: &Velocity4, v_prev: &Velocity4) -> Velocity4 {
    Velocity4::new(
        (v_now.du + v_prev.du) / 2.0,
        (v_now.dv + v_prev.dv) / 2.0,
        (v_now.dw + v_prev.dw) / 2.0,
        (v_now.dh + v_prev.dh) / 2.0,
    )
}

fn clamp_velocity(v: Velocity4, state: &BBox, cfg: &TrackerConfig) -> Velocity4 {
    let caps = bounds_for_cfg(state, cfg).v_max;
    let a = v.as_array();
    Velocity4::from_array([
        a[0].clamp(-caps[0], caps[0]),
        a[1].clamp(-caps[1], caps[1]),
        a[2].clamp(-caps[2], caps[2]),
        a[3].clamp(-caps[3], caps[3]),
    ])
}

fn near_border(state: &BBox, image_w: f64, image_h: f64, margin: f64) -> bool {
    state.u <= margin || state.v <= margin || state.u >= image_w - margin || state.v >= image_h - margin
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
