//! Per-target particle swarm refinement with velocity clamping,
//! personal/global bests, and post-run resampling.

use crate::appearance::{extract_features, FeatureVector};
use crate::bbox::{clamp_to_image, diagonal, BBox, Velocity4};
use crate::config::{InitMode, ResampleMode, TrackerConfig, Variant};
use crate::fitness::{compose, pair_fitness, social_fitness};
use crate::image::GrayImage;
use crate::motion::{propagate, MotionBounds, MotionParams};
use crate::track::{Particle, Track};
use rand::Rng;

/// Outcome of one swarm run on one target.
#[derive(Debug, Clone)]
pub struct SwarmResult {
    /// Refined particles (after the final sweep's position step).
    pub particles: Vec<Particle>,
    pub gbest_state: BBox,
    pub gbest_fitness: f64,
    /// History-fitness component of the global best, used by the weak-track
    /// recovery rule.
    pub gbest_history_fitness: f64,
    /// Global best fitness at the end of each sweep; non-decreasing.
    pub gbest_fitness_per_iter: Vec<f64>,
}

/// Generate a fresh swarm for a track via the random motion model.
///
/// `FromOptimum` perturbs the track's previous optimal state once per
/// particle; `FromParticles` perturbs each previous particle in place,
/// topping up from the optimum when fewer than `cfg.particles` survive.
pub fn init_swarm<R: Rng>(
    track: &Track,
    bounds: &MotionBounds,
    cfg: &TrackerConfig,
    rng: &mut R,
) -> Vec<Particle> {
    let params = MotionParams::from_config(cfg);
    let mut swarm = Vec::with_capacity(cfg.particles);
    for s in 0..cfg.particles {
        let source = match cfg.init_mode {
            InitMode::FromParticles if s < track.particles.len() => {
                let p = &track.particles[s];
                (p.state, p.vel)
            }
            _ => (track.state, track.vel),
        };
        let (state, vel) = propagate(&source.0, &source.1, bounds, &params, rng);
        swarm.push(Particle::new(state, vel));
    }
    swarm
}

/// Maximum velocity-gap normalizer for the social fitness term.
pub fn social_velocity_cap(bounds: &MotionBounds) -> f64 {
    (bounds.v_max[0] + bounds.uv_max[0]).hypot(bounds.v_max[1] + bounds.uv_max[1])
}

/// Refine a track's swarm for `cfg.pso_iters` sweeps.
///
/// Each sweep evaluates every particle (history + exploration fitness, plus
/// the social term for PSO-Social), promotes personal and global bests on
/// strict improvement, then takes one velocity/position step per dimension
/// with fresh `U(0, 1)` draws. Steps are clamped to the per-dimension
/// velocity cap and states to the image.
pub fn run_pso<R: Rng>(
    track: &Track,
    image: &GrayImage,
    neighbors: &[(BBox, Velocity4)],
    bounds: &MotionBounds,
    cfg: &TrackerConfig,
    rng: &mut R,
) -> SwarmResult {
    assert!(!track.particles.is_empty(), "swarm must be initialized before PSO");
    let (img_w, img_h) = (image.width() as f64, image.height() as f64);
    let social = cfg.variant == Variant::PsoSocial;
    let eps_nei = diagonal(&track.state);
    let v_s_max = social_velocity_cap(bounds);

    let mut particles = track.particles.clone();
    // Exploration fitness compares against the particle's own state at the
    // previous sweep; seed the cache with the initial states so the first
    // sweep scores a perfect self-match.
    let mut prev: Vec<(BBox, FeatureVector)> = particles
        .iter()
        .map(|p| (p.state, extract_features(image, &p.state)))
        .collect();
    let mut pbest_history: Vec<f64> = vec![0.0; particles.len()];

    let mut gbest_state = particles[0].pbest_state;
    let mut gbest_fitness = -1.0f64;
    let mut gbest_history = 0.0f64;
    let mut trace = Vec::with_capacity(cfg.pso_iters);

    for iter in 0..cfg.pso_iters {
        for (s, p) in particles.iter_mut().enumerate() {
            let feat = if iter == 0 {
                prev[s].1.clone()
            } else {
                extract_features(image, &p.state)
            };
            let f_h = pair_fitness(
                &p.state,
                &feat,
                &track.state,
                &track.appearance,
                cfg.lambda_s,
                cfg.lambda_m,
            );
            let f_p = pair_fitness(&p.state, &feat, &prev[s].0, &prev[s].1, cfg.lambda_s, cfg.lambda_m);
            let f_i = if social {
                social_fitness(&p.state, &p.vel, neighbors, eps_nei, v_s_max, cfg.xi_p, cfg.xi_v)
            } else {
                0.0
            };
            p.fitness = compose(f_h, f_p, f_i, cfg);
            prev[s] = (p.state, feat);

            if p.fitness > p.pbest_fitness {
                p.pbest_state = p.state;
                p.pbest_fitness = p.fitness;
                pbest_history[s] = f_h;
            }
            if p.pbest_fitness > gbest_fitness {
                gbest_state = p.pbest_state;
                gbest_fitness = p.pbest_fitness;
                gbest_history = pbest_history[s];
            }

            let mut x = [p.state.u, p.state.v, p.state.w, p.state.h];
            let mut v = p.vel.as_array();
            let pb = [p.pbest_state.u, p.pbest_state.v, p.pbest_state.w, p.pbest_state.h];
            let gb = [gbest_state.u, gbest_state.v, gbest_state.w, gbest_state.h];
            for j in 0..4 {
                let r_p: f64 = rng.random_range(0.0..1.0);
                let r_g: f64 = rng.random_range(0.0..1.0);
                let updated = cfg.eta * v[j]
                    + r_p * cfg.phi_p * (pb[j] - x[j])
                    + r_g * cfg.phi_g * (gb[j] - x[j]);
                v[j] = updated.clamp(-bounds.v_max[j], bounds.v_max[j]);
                x[j] += v[j];
            }
            p.vel = Velocity4::from_array(v);
            p.state = clamp_to_image(&BBox::new(x[0], x[1], x[2].max(1.0), x[3].max(1.0)), img_w, img_h);
        }
        trace.push(gbest_fitness);
    }

    SwarmResult {
        particles,
        gbest_state,
        gbest_fitness: gbest_fitness.max(0.0),
        gbest_history_fitness: gbest_history,
        gbest_fitness_per_iter: trace,
    }
}

/// Post-PSO resampling of low-fitness particles.
pub fn resample(
    mut particles: Vec<Particle>,
    gbest_state: &BBox,
    gbest_fitness: f64,
    mode: ResampleMode,
    sigma_0: f64,
) -> Vec<Particle> {
    match mode {
        ResampleMode::None => particles,
        ResampleMode::Discard => {
            // Keep at least the best particle even if everything is below
            // the threshold; ties go to the lowest index.
            let mut best = 0;
            for (i, p) in particles.iter().enumerate() {
                if p.fitness > particles[best].fitness {
                    best = i;
                }
            }
            let survivors: Vec<Particle> = particles
                .iter()
                .enumerate()
                .filter(|(i, p)| p.fitness >= sigma_0 || *i == best)
                .map(|(_, p)| p.clone())
                .collect();
            survivors
        }
        ResampleMode::ReplaceWithGlobal => {
            for p in particles.iter_mut() {
                if p.fitness < sigma_0 {
                    p.state = *gbest_state;
                    p.fitness = gbest_fitness;
                    if gbest_fitness > p.pbest_fitness {
                        p.pbest_state = *gbest_state;
                        p.pbest_fitness = gbest_fitness;
                    }
                }
            }
            particles
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::appearance::extract_features;
    use crate::motion::bounds_for_cfg;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn textured_image() -> GrayImage {
        let mut img = GrayImage::filled(160, 120, 60);
        for y in 40u32..72 {
            for x in 60u32..92 {
                let v = 40 + ((x * 13 + y * 29) % 170) as u8;
                img.set(x, y, v);
            }
        }
        img
    }

    fn track_on(image: &GrayImage, state: BBox) -> Track {
        Track::new(7, state, extract_features(image, &state))
    }

    #[test]
    fn init_from_optimum_zero_noise_advances_by_velocity() {
        let mut cfg = TrackerConfig::default_for(Variant::Pso);
        cfg.particles = 1;
        cfg.eps_x = 0.0;
        cfg.eps_v = 0.0;
        let img = GrayImage::filled(100, 100, 0);
        let mut t = track_on(&img, BBox::new(40.0, 40.0, 10.0, 10.0));
        t.vel = Velocity4::new(3.0, -2.0, 0.0, 0.0);
        let bounds = bounds_for_cfg(&t.state, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let swarm = init_swarm(&t, &bounds, &cfg, &mut rng);
        assert_eq!(swarm.len(), 1);
        assert_eq!(swarm[0].state, BBox::new(43.0, 38.0, 10.0, 10.0));
        assert_eq!(swarm[0].pbest_state, swarm[0].state);
        assert_eq!(swarm[0].pbest_fitness, 0.0);
    }

    #[test]
    fn init_reproducible_under_fixed_seed() {
        let cfg = TrackerConfig::default_for(Variant::Pso);
        let img = GrayImage::filled(100, 100, 0);
        let t = track_on(&img, BBox::new(40.0, 40.0, 12.0, 16.0));
        let bounds = bounds_for_cfg(&t.state, &cfg);
        let a = init_swarm(&t, &bounds, &cfg, &mut ChaCha8Rng::seed_from_u64(9));
        let b = init_swarm(&t, &bounds, &cfg, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn init_from_optimum_respects_bounds() {
        // With eps_v = 0 the positional scatter around X + V is capped by
        // ux_max exactly.
        let mut cfg = TrackerConfig::default_for(Variant::Pso);
        cfg.particles = 1000;
        cfg.eps_v = 0.0;
        let img = GrayImage::filled(400, 400, 0);
        let mut t = track_on(&img, BBox::new(200.0, 200.0, 20.0, 10.0));
        t.vel = Velocity4::new(1.0, 2.0, 0.0, 0.0);
        let bounds = bounds_for_cfg(&t.state, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let swarm = init_swarm(&t, &bounds, &cfg, &mut rng);
        let center = [201.0, 202.0, 20.0, 10.0];
        for p in &swarm {
            let coords = [p.state.u, p.state.v, p.state.w, p.state.h];
            for j in 0..4 {
                assert!(
                    (coords[j] - center[j]).abs() <= bounds.ux_max[j] + 1e-9,
                    "axis {j}: {} vs center {} bound {}",
                    coords[j],
                    center[j],
                    bounds.ux_max[j]
                );
            }
        }
    }

    #[test]
    fn init_from_particles_tops_up_from_optimum() {
        let mut cfg = TrackerConfig::default_for(Variant::Pso);
        cfg.particles = 4;
        cfg.init_mode = InitMode::FromParticles;
        cfg.eps_x = 0.0;
        cfg.eps_v = 0.0;
        let img = GrayImage::filled(100, 100, 0);
        let mut t = track_on(&img, BBox::new(50.0, 50.0, 10.0, 10.0));
        let mut p0 = Particle::new(BBox::new(20.0, 20.0, 10.0, 10.0), Velocity4::new(1.0, 0.0, 0.0, 0.0));
        p0.fitness = 0.9;
        let mut p1 = Particle::new(BBox::new(30.0, 40.0, 10.0, 10.0), Velocity4::new(0.0, 2.0, 0.0, 0.0));
        p1.fitness = 0.8;
        t.particles = vec![p0, p1];
        let bounds = bounds_for_cfg(&t.state, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let swarm = init_swarm(&t, &bounds, &cfg, &mut rng);
        assert_eq!(swarm.len(), 4);
        // First two advance from their own states, the rest from the optimum.
        assert_eq!(swarm[0].state, BBox::new(21.0, 20.0, 10.0, 10.0));
        assert_eq!(swarm[1].state, BBox::new(30.0, 42.0, 10.0, 10.0));
        assert_eq!(swarm[2].state, BBox::new(50.0, 50.0, 10.0, 10.0));
        assert_eq!(swarm[3].state, BBox::new(50.0, 50.0, 10.0, 10.0));
    }

    #[test]
    fn degenerate_swarm_keeps_state_and_fitness() {
        let cfg = TrackerConfig::default_for(Variant::Pso);
        let img = textured_image();
        let state = BBox::new(76.0, 56.0, 32.0, 32.0);
        let mut t = track_on(&img, state);
        t.particles = (0..4).map(|_| Particle::new(state, Velocity4::default())).collect();
        let bounds = bounds_for_cfg(&t.state, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let result = run_pso(&t, &img, &[], &bounds, &cfg, &mut rng);
        // All particles sit on the optimum: the global best is that state
        // and the trace is flat.
        assert_eq!(result.gbest_state, state);
        let first = result.gbest_fitness_per_iter[0];
        assert!(result.gbest_fitness_per_iter.iter().all(|&f| f == first));
    }

    #[test]
    fn gbest_trace_is_monotone() {
        let cfg = TrackerConfig::default_for(Variant::Pso);
        let img = textured_image();
        let mut t = track_on(&img, BBox::new(70.0, 52.0, 32.0, 32.0));
        let bounds = bounds_for_cfg(&t.state, &cfg);
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            t.particles = init_swarm(&t, &bounds, &cfg, &mut rng);
            let result = run_pso(&t, &img, &[], &bounds, &cfg, &mut rng);
            for w in result.gbest_fitness_per_iter.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
            for p in &result.particles {
                assert!(result.gbest_fitness >= p.pbest_fitness - 1e-12);
                for (j, comp) in p.vel.as_array().iter().enumerate() {
                    assert!(comp.abs() <= bounds.v_max[j] + 1e-9);
                }
            }
        }
    }

    #[test]
    fn resample_none_and_above_threshold_unchanged() {
        let b = BBox::new(10.0, 10.0, 5.0, 5.0);
        let mut p = Particle::new(b, Velocity4::default());
        p.fitness = 0.9;
        let swarm = vec![p.clone(), p.clone()];
        let g = BBox::new(0.0, 0.0, 5.0, 5.0);
        assert_eq!(resample(swarm.clone(), &g, 1.0, ResampleMode::None, 0.2), swarm);
        assert_eq!(resample(swarm.clone(), &g, 1.0, ResampleMode::Discard, 0.2), swarm);
    }

    #[test]
    fn resample_discard_keeps_single_best() {
        let mk = |fitness: f64, u: f64| {
            let mut p = Particle::new(BBox::new(u, 0.0, 5.0, 5.0), Velocity4::default());
            p.fitness = fitness;
            p
        };
        let swarm = vec![mk(0.05, 1.0), mk(0.15, 2.0), mk(0.10, 3.0)];
        let g = BBox::new(0.0, 0.0, 5.0, 5.0);
        let out = resample(swarm, &g, 0.9, ResampleMode::Discard, 0.2);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].state.u, 2.0);
    }

    #[test]
    fn resample_replace_preserves_size_and_moves_low_fitness() {
        let mk = |fitness: f64, u: f64| {
            let mut p = Particle::new(BBox::new(u, 0.0, 5.0, 5.0), Velocity4::default());
            p.fitness = fitness;
            p
        };
        let swarm = vec![mk(0.05, 1.0), mk(0.5, 2.0), mk(0.1, 3.0)];
        let g = BBox::new(9.0, 9.0, 5.0, 5.0);
        let out = resample(swarm, &g, 0.8, ResampleMode::ReplaceWithGlobal, 0.2);
        assert_eq!(out.len(), 3);
        assert_eq!(out[0].state, g);
        assert_eq!(out[0].fitness, 0.8);
        assert_eq!(out[1].state.u, 2.0);
        assert_eq!(out[2].state, g);
        assert!(out.iter().all(|p| p.fitness >= 0.2));
    }
}
