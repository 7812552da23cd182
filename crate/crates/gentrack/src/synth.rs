//! Synthetic scenario generation: textured targets on piecewise-linear
//! paths, rendered to grayscale frames, with a detector-degradation model
//! (jitter, dropout, false positives) producing the detection stream.

use crate::appearance::{cosine_similarity, extract_features};
use crate::bbox::{clamp_to_image, diagonal, BBox};
use crate::image::GrayImage;
use crate::io::{DetectionMap, TrackMap};
use crate::track::Detection;
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

const TEXTURE_LATTICE: usize = 8;
/// Pairwise appearance-similarity ceiling between distinct target textures.
const TEXTURE_COSINE_MAX: f64 = 0.9;

/// One simulated target.
#[derive(Debug, Clone)]
pub struct TargetSpec {
    /// First live frame.
    pub birth: u64,
    /// One past the last live frame; `birth < death <= duration`.
    pub death: u64,
    /// Center waypoints, evenly spaced over the lifetime.
    pub waypoints: Vec<(f64, f64)>,
    pub size: (f64, f64),
    pub texture_seed: u64,
    /// Frame ranges `[start, end)` whose detections are force-dropped
    /// (modeled occlusion).
    pub occluded: Vec<(u64, u64)>,
    /// Draw order; higher values are rendered on top.
    pub z_order: u32,
}

/// Detector degradation model.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    /// Std-dev of the center jitter, px.
    pub center_jitter: f64,
    /// Std-dev of the size jitter, px.
    pub size_jitter: f64,
    /// Per-detection dropout probability.
    pub dropout: f64,
    /// Expected false positives per frame (Poisson).
    pub false_positive_rate: f64,
    /// Confidence floor for jittered detections.
    pub min_conf: f64,
    /// Uniform confidence range for false positives.
    pub fp_conf: (f64, f64),
}

impl NoiseModel {
    pub fn none() -> Self {
        Self {
            center_jitter: 0.0,
            size_jitter: 0.0,
            dropout: 0.0,
            false_positive_rate: 0.0,
            min_conf: 0.05,
            fp_conf: (0.3, 0.7),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub width: u32,
    pub height: u32,
    pub duration: u64,
    pub targets: Vec<TargetSpec>,
    pub noise: NoiseModel,
    pub background: u8,
    pub seed: u64,
}

/// Everything `generate` produces for one scenario.
pub struct GeneratedScenario {
    pub frames: Vec<GrayImage>,
    pub gt: TrackMap,
    pub detections: DetectionMap,
}

impl TargetSpec {
    fn alive(&self, frame: u64) -> bool {
        (self.birth..self.death).contains(&frame)
    }

    fn occluded_at(&self, frame: u64) -> bool {
        self.occluded.iter().any(|&(s, e)| (s..e).contains(&frame))
    }

    /// Center at a frame via piecewise-linear waypoint interpolation.
    fn center_at(&self, frame: u64) -> (f64, f64) {
        debug_assert!(self.alive(frame));
        let last = (self.death - 1 - self.birth) as f64;
        let s = if last == 0.0 { 0.0 } else { (frame - self.birth) as f64 / last };
        let segments = (self.waypoints.len() - 1).max(1) as f64;
        let pos = s * segments;
        let i = (pos.floor() as usize).min(self.waypoints.len().saturating_sub(2));
        let frac = pos - i as f64;
        let (x0, y0) = self.waypoints[i];
        let (x1, y1) = self.waypoints[(i + 1).min(self.waypoints.len() - 1)];
        (x0 + (x1 - x0) * frac, y0 + (y1 - y0) * frac)
    }

    /// Ground-truth box at a frame, clamped fully inside the image.
    pub fn bbox_at(&self, frame: u64, width: f64, height: f64) -> BBox {
        let (u, v) = self.center_at(frame);
        clamp_to_image(&BBox::new(u, v, self.size.0, self.size.1), width, height)
    }
}

/// 8x8 intensity lattice anchored to the target box; moving the box moves
/// the texture with it, so the patch appearance is translation-stable.
#[derive(Clone)]
struct Texture {
    cells: [u8; TEXTURE_LATTICE * TEXTURE_LATTICE],
}

impl Texture {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cells = [0u8; TEXTURE_LATTICE * TEXTURE_LATTICE];
        for c in cells.iter_mut() {
            *c = rng.random_range(20..=235);
        }
        Self { cells }
    }

    fn sample(&self, fx: f64, fy: f64) -> u8 {
        let tx = ((fx * TEXTURE_LATTICE as f64) as usize).min(TEXTURE_LATTICE - 1);
        let ty = ((fy * TEXTURE_LATTICE as f64) as usize).min(TEXTURE_LATTICE - 1);
        self.cells[ty * TEXTURE_LATTICE + tx]
    }

    /// Standalone 64x64 rendering, used for the pairwise-similarity check.
    fn preview(&self) -> GrayImage {
        let mut img = GrayImage::new(64, 64);
        for y in 0..64u32 {
            for x in 0..64u32 {
                img.set(x, y, self.sample((x as f64 + 0.5) / 64.0, (y as f64 + 0.5) / 64.0));
            }
        }
        img
    }
}

/// Build per-target textures, regenerating any whose preview looks too
/// similar to an earlier target's.
fn build_textures(targets: &[TargetSpec]) -> Vec<Texture> {
    let full = BBox::new(32.0, 32.0, 64.0, 64.0);
    let mut textures: Vec<Texture> = Vec::with_capacity(targets.len());
    let mut features = Vec::with_capacity(targets.len());
    for target in targets {
        let mut seed = target.texture_seed;
        let (texture, feat) = loop {
            let candidate = Texture::new(seed);
            let feat = extract_features(&candidate.preview(), &full);
            let clash = features
                .iter()
                .any(|f| cosine_similarity(f, &feat) >= TEXTURE_COSINE_MAX);
            if !clash {
                break (candidate, feat);
            }
            seed = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
        };
        textures.push(texture);
        features.push(feat);
    }
    textures
}

fn render_frame(scenario: &Scenario, textures: &[Texture], frame: u64) -> GrayImage {
    let mut img = GrayImage::filled(scenario.width, scenario.height, scenario.background);
    let (w, h) = (scenario.width as f64, scenario.height as f64);
    let mut order: Vec<usize> = (0..scenario.targets.len())
        .filter(|&i| scenario.targets[i].alive(frame))
        .collect();
    order.sort_by_key(|&i| (scenario.targets[i].z_order, i));
    for i in order {
        let b = scenario.targets[i].bbox_at(frame, w, h);
        let (left, top) = (b.left(), b.top());
        let x0 = (left - 0.5).ceil().max(0.0) as u32;
        let x1 = ((b.right() - 0.5).ceil().max(0.0) as u32).min(scenario.width);
        let y0 = (top - 0.5).ceil().max(0.0) as u32;
        let y1 = ((b.bottom() - 0.5).ceil().max(0.0) as u32).min(scenario.height);
        for y in y0..y1 {
            let fy = ((y as f64 + 0.5 - top) / b.h).clamp(0.0, 1.0);
            for x in x0..x1 {
                let fx = ((x as f64 + 0.5 - left) / b.w).clamp(0.0, 1.0);
                img.set(x, y, textures[i].sample(fx, fy));
            }
        }
    }
    img
}

/// Generate frames, ground truth and degraded detections for a scenario.
/// Fully deterministic given `scenario.seed`.
pub fn generate(scenario: &Scenario) -> GeneratedScenario {
    for (i, t) in scenario.targets.iter().enumerate() {
        assert!(
            t.birth < t.death && t.death <= scenario.duration,
            "target {i}: birth {} < death {} <= duration {}",
            t.birth,
            t.death,
            scenario.duration
        );
        assert!(!t.waypoints.is_empty(), "target {i} needs at least one waypoint");
    }
    let textures = build_textures(&scenario.targets);
    let (w, h) = (scenario.width as f64, scenario.height as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let center_jitter = Normal::new(0.0, scenario.noise.center_jitter.max(1e-12)).unwrap();
    let size_jitter = Normal::new(0.0, scenario.noise.size_jitter.max(1e-12)).unwrap();

    let mut frames = Vec::with_capacity(scenario.duration as usize);
    let mut gt = TrackMap::new();
    let mut detections = DetectionMap::new();

    for frame in 0..scenario.duration {
        frames.push(render_frame(scenario, &textures, frame));
        let gt_frame: Vec<(u64, BBox)> = scenario
            .targets
            .iter()
            .enumerate()
            .filter(|(_, t)| t.alive(frame))
            .map(|(i, t)| (i as u64, t.bbox_at(frame, w, h)))
            .collect();

        let mut det_frame = Vec::new();
        for t in scenario.targets.iter() {
            if !t.alive(frame) {
                continue;
            }
            let dropped = rng.random_range(0.0..1.0) < scenario.noise.dropout;
            if dropped || t.occluded_at(frame) {
                continue;
            }
            let truth = t.bbox_at(frame, w, h);
            let (du, dv) = if scenario.noise.center_jitter > 0.0 {
                (center_jitter.sample(&mut rng), center_jitter.sample(&mut rng))
            } else {
                (0.0, 0.0)
            };
            let (dw, dh) = if scenario.noise.size_jitter > 0.0 {
                (size_jitter.sample(&mut rng), size_jitter.sample(&mut rng))
            } else {
                (0.0, 0.0)
            };
            let jitter_mag = (du * du + dv * dv + dw * dw + dh * dh).sqrt();
            let conf = (1.0 - jitter_mag / diagonal(&truth)).clamp(scenario.noise.min_conf, 1.0);
            let noisy = BBox::new(
                truth.u + du,
                truth.v + dv,
                (truth.w + dw).max(2.0),
                (truth.h + dh).max(2.0),
            );
            det_frame.push(Detection::new(clamp_to_image(&noisy, w, h), conf));
        }

        if scenario.noise.false_positive_rate > 0.0 {
            let poisson = Poisson::new(scenario.noise.false_positive_rate).unwrap();
            let count = poisson.sample(&mut rng) as u64;
            for _ in 0..count {
                // Size borrowed from a random target so false positives are
                // adversarial for association.
                let src = &scenario.targets[rng.random_range(0..scenario.targets.len())];
                let b = BBox::new(
                    rng.random_range(0.0..w),
                    rng.random_range(0.0..h),
                    src.size.0,
                    src.size.1,
                );
                let conf = rng.random_range(scenario.noise.fp_conf.0..=scenario.noise.fp_conf.1);
                det_frame.push(Detection::new(clamp_to_image(&b, w, h), conf));
            }
        }

        gt.insert(frame, gt_frame);
        detections.insert(frame, det_frame);
    }

    GeneratedScenario { frames, gt, detections }
}

/// Named desk-scale presets exercising the tracker's hard paths.
pub fn preset(name: &str, seed: u64) -> Result<Scenario> {
    let tex = |i: u64| seed.wrapping_mul(0x100_0193).wrapping_add(0x9e37_79b9 * (i + 1));
    match name {
        // Two targets swap sides; their paths intersect at the image center
        // and the second passes the crossing point a few frames before the
        // first, brushing past it with heavy overlap.
        "crossing" => Ok(Scenario {
            width: 320,
            height: 240,
            duration: 60,
            targets: vec![
                TargetSpec {
                    birth: 0,
                    death: 60,
                    waypoints: vec![(40.0, 80.0), (280.0, 160.0)],
                    size: (44.0, 44.0),
                    texture_seed: tex(0),
                    occluded: vec![],
                    z_order: 0,
                },
                TargetSpec {
                    birth: 0,
                    death: 60,
                    waypoints: vec![(280.0, 60.0), (145.0, 135.0), (40.0, 160.0)],
                    size: (30.0, 30.0),
                    texture_seed: tex(1),
                    occluded: vec![],
                    z_order: 1,
                },
            ],
            noise: NoiseModel::none(),
            background: 96,
            seed,
        }),
        // A large occluder sweeps over a smaller target; the occludee's
        // detections vanish for exactly 5 frames while it stays in the
        // ground truth.
        "occlusion5" => Ok(Scenario {
            width: 320,
            height: 240,
            duration: 50,
            targets: vec![
                TargetSpec {
                    birth: 0,
                    death: 50,
                    waypoints: vec![(40.0, 120.0), (280.0, 120.0)],
                    size: (36.0, 36.0),
                    texture_seed: tex(0),
                    occluded: vec![(22, 27)],
                    z_order: 0,
                },
                TargetSpec {
                    birth: 0,
                    death: 50,
                    waypoints: vec![(160.0, 20.0), (160.0, 220.0)],
                    size: (64.0, 64.0),
                    texture_seed: tex(1),
                    occluded: vec![],
                    z_order: 1,
                },
            ],
            noise: NoiseModel::none(),
            background: 96,
            seed,
        }),
        // Ten targets with staggered border births/deaths under moderate
        // detector noise: eight movers in horizontal lanes plus two vertical
        // crossers that sweep through every lane.
        "churn10" => {
            let (w, h) = (480.0f64, 360.0f64);
            let lane_y = [40.0, 75.0, 110.0, 145.0, 215.0, 250.0, 285.0, 320.0];
            let lane_size = [30.0, 36.0, 42.0, 48.0, 27.0, 33.0, 39.0, 45.0];
            let targets = (0..10u64)
                .map(|i| {
                    let (size, waypoints) = if i < 8 {
                        let size = lane_size[i as usize];
                        let y = lane_y[i as usize];
                        let margin = size / 2.0 + 2.0;
                        let (x0, x1) = if i % 2 == 0 {
                            (margin, w - margin)
                        } else {
                            (w - margin, margin)
                        };
                        (size, vec![(x0, y), (x1, y)])
                    } else {
                        // Crossers sized at the extremes so every crossing
                        // pair stays size-separable.
                        let (size, x) = if i == 8 { (22.0, 140.0) } else { (56.0, 340.0) };
                        let margin = size / 2.0 + 2.0;
                        let (y0, y1) = if i == 8 {
                            (margin, h - margin)
                        } else {
                            (h - margin, margin)
                        };
                        (size, vec![(x, y0), (x, y1)])
                    };
                    TargetSpec {
                        birth: i * 3,
                        death: 140 + 5 * i,
                        waypoints,
                        size: (size, size),
                        texture_seed: tex(i),
                        occluded: vec![],
                        z_order: i as u32,
                    }
                })
                .collect();
            Ok(Scenario {
                width: w as u32,
                height: h as u32,
                duration: 185,
                targets,
                noise: NoiseModel {
                    center_jitter: 1.0,
                    size_jitter: 0.5,
                    dropout: 0.1,
                    false_positive_rate: 0.0,
                    min_conf: 0.05,
                    fp_conf: (0.3, 0.7),
                },
                background: 96,
                seed,
            })
        }
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}
