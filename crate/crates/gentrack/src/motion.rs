//! Random motion model: state-dependent perturbation bounds and the
//! velocity/position propagation used for particle initialization.

use crate::bbox::{diagonal, BBox, Velocity4};
use crate::config::TrackerConfig;
use rand::Rng;

/// Perturbation and velocity bounds derived from a prior state. Components
/// are ordered (u, v, w, h) to match the box coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionBounds {
    /// Position perturbation bound per coordinate, px.
    pub ux_max: [f64; 4],
    /// Velocity perturbation bound per coordinate, px/frame.
    pub uv_max: [f64; 4],
    /// Velocity cap per coordinate, px/frame.
    pub v_max: [f64; 4],
}

/// Coefficients of the propagation step, lifted out of [`TrackerConfig`].
#[derive(Debug, Clone, Copy)]
pub struct MotionParams {
    pub eps_x: f64,
    pub eps_v: f64,
    pub lambda_x: f64,
    pub lambda_v: f64,
}

impl MotionParams {
    pub fn from_config(cfg: &TrackerConfig) -> Self {
        Self {
            eps_x: cfg.eps_x,
            eps_v: cfg.eps_v,
            lambda_x: cfg.lambda_x,
            lambda_v: cfg.lambda_v,
        }
    }
}

/// Noise bounds scale with the box dimensions per axis; the velocity cap on
/// the positional axes scales with the box diagonal.
pub fn bounds_for(state: &BBox, pos_scale: f64, vel_scale: f64) -> MotionBounds {
    let dims = [state.w, state.h, state.w, state.h];
    let diag = diagonal(state);
    MotionBounds {
        ux_max: dims.map(|d| pos_scale * d),
        uv_max: dims.map(|d| vel_scale * d),
        v_max: [
            pos_scale * diag,
            pos_scale * diag,
            vel_scale * state.w,
            vel_scale * state.h,
        ],
    }
}

/// Bounds under a config's noise scales, with the size axes damped.
pub fn bounds_for_cfg(state: &BBox, cfg: &TrackerConfig) -> MotionBounds {
    let mut b = bounds_for(state, cfg.pos_noise_scale, cfg.vel_noise_scale);
    for axis in 2..4 {
        b.ux_max[axis] *= cfg.size_noise_damp;
        b.uv_max[axis] *= cfg.size_noise_damp;
        b.v_max[axis] *= cfg.size_noise_damp;
    }
    b
}

/// One random-motion step:
/// `V' = clamp(V + eps_v * U_V, +-v_max)`, `X' = X + lambda_v * V' + lambda_x * eps_x * U_X`
/// with `U_V ~ U(-uv_max, uv_max)` and `U_X ~ U(-ux_max, ux_max)` per axis.
/// Box dimensions are floored at 1 px.
pub fn propagate<R: Rng>(
    state: &BBox,
    vel: &Velocity4,
    bounds: &MotionBounds,
    params: &MotionParams,
    rng: &mut R,
) -> (BBox, Velocity4) {
    let mut v = vel.as_array();
    for (axis, val) in v.iter_mut().enumerate() {
        let u_v = rng.random_range(-bounds.uv_max[axis]..=bounds.uv_max[axis]);
        let cap = bounds.v_max[axis];
        *val = (*val + params.eps_v * u_v).clamp(-cap, cap);
    }
    let mut x = [state.u, state.v, state.w, state.h];
    for (axis, val) in x.iter_mut().enumerate() {
        let u_x = rng.random_range(-bounds.ux_max[axis]..=bounds.ux_max[axis]);
        *val += params.lambda_v * v[axis] + params.lambda_x * params.eps_x * u_x;
    }
    let next = BBox::new(x[0], x[1], x[2].max(1.0), x[3].max(1.0));
    (next, Velocity4::from_array(v))
}
