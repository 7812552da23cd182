//! Fitness measures: pairwise appearance/motion fitness, social divergence
//! fitness, and their per-variant composition.

use crate::appearance::{cosine_similarity, FeatureVector};
use crate::bbox::{center_distance, diagonal, BBox, Velocity4};
use crate::config::{TrackerConfig, Variant};

/// Components of one particle evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessBreakdown {
    pub f_history: f64,
    pub f_explore: f64,
    pub f_social: f64,
    pub combined: f64,
}

/// Pairwise fitness `lambda_s * f_s + lambda_m * f_m` in `[0, 1]`.
///
/// `f_s` is the cosine similarity of the two feature vectors; `f_m` is the
/// center proximity `1 - min(d, d_om) / d_om`, where the maximum allowed
/// distance `d_om` is the sum of the two box diagonals.
pub fn pair_fitness(
    a: &BBox,
    a_feat: &FeatureVector,
    b: &BBox,
    b_feat: &FeatureVector,
    lambda_s: f64,
    lambda_m: f64,
) -> f64 {
    let f_s = cosine_similarity(a_feat, b_feat);
    let d_om = diagonal(a) + diagonal(b);
    let f_m = 1.0 - center_distance(a, b).min(d_om) / d_om;
    lambda_s * f_s + lambda_m * f_m
}

/// Social fitness of a particle against its target's neighbours: grows with
/// divergence from neighbouring states and velocities, saturating at 1.
///
/// The velocity gap is measured on the planar (du, dv) components. With no
/// neighbours the particle is unconstrained and the fitness is 1.
pub fn social_fitness(
    p_state: &BBox,
    p_vel: &Velocity4,
    neighbors: &[(BBox, Velocity4)],
    eps_nei: f64,
    v_s_max: f64,
    xi_p: f64,
    xi_v: f64,
) -> f64 {
    debug_assert!(eps_nei > 0.0 && v_s_max > 0.0);
    if neighbors.is_empty() {
        return 1.0;
    }
    let n = neighbors.len() as f64;
    let mut pos_sum = 0.0;
    let mut vel_sum = 0.0;
    for (nb_state, nb_vel) in neighbors {
        let d = center_distance(p_state, nb_state);
        pos_sum += d.min(2.0 * eps_nei) / (2.0 * eps_nei);
        let dv = (p_vel.du - nb_vel.du).hypot(p_vel.dv - nb_vel.dv);
        vel_sum += dv.min(v_s_max) / v_s_max;
    }
    xi_p / n * pos_sum + xi_v / n * vel_sum
}

/// Convex combination of the fitness components for a variant. The social
/// term participates only in PSO-Social.
pub fn compose(f_history: f64, f_explore: f64, f_social: f64, cfg: &TrackerConfig) -> f64 {
    match cfg.variant {
        Variant::Basic | Variant::Pso => cfg.sigma_h * f_history + cfg.sigma_p * f_explore,
        Variant::PsoSocial => {
            cfg.sigma_h * f_history + cfg.sigma_p * f_explore + cfg.sigma_i * f_social
        }
    }
}
