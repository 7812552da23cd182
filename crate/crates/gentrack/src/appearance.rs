//! Appearance features: HoG vectors over a fixed patch grid, compared with
//! cosine similarity.
//!
//! Patches are resampled to 64x64 px (nearest neighbour) so the vector
//! length never depends on box size: 8x8 px cells, 9 unsigned orientation
//! bins over 0..180 degrees, per-cell L2 normalization, no block overlap.
//! All components are non-negative gradient magnitudes, which keeps the
//! cosine similarity inside `[0, 1]`.

use crate::bbox::{clamp_to_image, BBox};
use crate::image::GrayImage;

/// Side of the resampled patch, px.
pub const PATCH_SIZE: usize = 64;
/// Side of a HoG cell, px.
pub const CELL_SIZE: usize = 8;
/// Unsigned orientation bins over 0..180 degrees.
pub const ORIENTATION_BINS: usize = 9;
/// Cells per patch side.
pub const CELLS_PER_SIDE: usize = PATCH_SIZE / CELL_SIZE;
/// Total feature length: 8 * 8 * 9.
pub const FEATURE_LEN: usize = CELLS_PER_SIDE * CELLS_PER_SIDE * ORIENTATION_BINS;

const NORM_EPS: f64 = 1e-6;

/// Fixed-length non-negative feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn zero() -> Self {
        Self { values: vec![0.0; FEATURE_LEN] }
    }

    #[cfg(test)]
    pub(crate) fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// HoG feature vector of the image patch under `bbox`.
///
/// Deterministic: identical image bytes and box always produce identical
/// output. Patches degenerating below 2x2 px after clamping yield the zero
/// vector (no gradient support).
pub fn extract_features(image: &GrayImage, bbox: &BBox) -> FeatureVector {
    let clamped = clamp_to_image(bbox, image.width() as f64, image.height() as f64);
    if clamped.w < 2.0 || clamped.h < 2.0 {
        return FeatureVector::zero();
    }

    // Nearest-neighbour resample of the patch onto the fixed grid.
    let (left, top) = (clamped.left(), clamped.top());
    let mut patch = [0.0f64; PATCH_SIZE * PATCH_SIZE];
    for py in 0..PATCH_SIZE {
        let sy = top + (py as f64 + 0.5) * clamped.h / PATCH_SIZE as f64;
        for px in 0..PATCH_SIZE {
            let sx = left + (px as f64 + 0.5) * clamped.w / PATCH_SIZE as f64;
            patch[py * PATCH_SIZE + px] = image.sample_nearest(sx, sy) as f64;
        }
    }

    // Central differences with replicated borders; unsigned orientation vote.
    let at = |x: isize, y: isize| {
        let xc = x.clamp(0, PATCH_SIZE as isize - 1) as usize;
        let yc = y.clamp(0, PATCH_SIZE as isize - 1) as usize;
        patch[yc * PATCH_SIZE + xc]
    };
    let mut cells = vec![0.0f64; FEATURE_LEN];
    for y in 0..PATCH_SIZE {
        for x in 0..PATCH_SIZE {
            let gx = (at(x as isize + 1, y as isize) - at(x as isize - 1, y as isize)) / 2.0;
            let gy = (at(x as isize, y as isize + 1) - at(x as isize, y as isize - 1)) / 2.0;
            let mag = gx.hypot(gy);
            if mag == 0.0 {
                continue;
            }
            let angle = gy.atan2(gx).to_degrees().rem_euclid(180.0);
            let bin = ((angle / (180.0 / ORIENTATION_BINS as f64)) as usize).min(ORIENTATION_BINS - 1);
            let cell = (y / CELL_SIZE) * CELLS_PER_SIDE + x / CELL_SIZE;
            cells[cell * ORIENTATION_BINS + bin] += mag;
        }
    }

    // Per-cell L2 normalization.
    for cell in cells.chunks_mut(ORIENTATION_BINS) {
        let norm = cell.iter().map(|v| v * v).sum::<f64>().sqrt();
        let denom = (norm * norm + NORM_EPS * NORM_EPS).sqrt();
        if denom > 0.0 {
            for v in cell.iter_mut() {
                *v /= denom;
            }
        }
    }
    FeatureVector { values: cells }
}

/// Cosine similarity `dot(a, b) / (|a| * |b|)`.
///
/// Defined as 0 when either vector is all zeros: a featureless patch
/// carries no matching evidence. Panics on length mismatch; all vectors
/// produced by [`extract_features`] share [`FEATURE_LEN`].
pub fn cosine_similarity(a: &FeatureVector, b: &FeatureVector) -> f64 {
    assert_eq!(a.len(), b.len(), "feature vector length mismatch");
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.values.iter().zip(&b.values) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn uniform_image(w: u32, h: u32, value: u8) -> GrayImage {
        GrayImage::filled(w, h, value)
    }

    #[test]
    fn uniform_patch_yields_zero_vector() {
        let img = uniform_image(100, 100, 137);
        let f = extract_features(&img, &BBox::new(50.0, 50.0, 40.0, 40.0));
        assert!(f.is_zero());
        assert_eq!(f.len(), FEATURE_LEN);
    }

    #[test]
    fn extraction_is_deterministic() {
        let mut img = uniform_image(64, 64, 0);
        for y in 0..64 {
            for x in 0..64 {
                img.set(x, y, ((x * 7 + y * 13) % 251) as u8);
            }
        }
        let b = BBox::new(32.0, 32.0, 40.0, 30.0);
        assert_eq!(extract_features(&img, &b), extract_features(&img, &b));
    }

    #[test]
    fn degenerate_patch_is_flagged_zero() {
        let img = uniform_image(50, 50, 10);
        let f = extract_features(&img, &BBox::new(25.0, 25.0, 1.0, 40.0));
        assert!(f.is_zero());
    }

    #[test]
    fn vertical_edge_concentrates_in_horizontal_gradient_bin() {
        // Two-column step image: gradient points along +x, angle 0 -> bin 0.
        let mut img = uniform_image(64, 64, 0);
        for y in 0..64 {
            for x in 32..64 {
                img.set(x, y, 200);
            }
        }
        let f = extract_features(&img, &BBox::new(32.0, 32.0, 64.0, 64.0));
        let total: f64 = f.values().iter().sum();
        assert!(total > 0.0);
        let bin0: f64 = f
            .values()
            .chunks(ORIENTATION_BINS)
            .map(|cell| cell[0])
            .sum();
        assert!(bin0 / total > 0.99, "bin0 share {}", bin0 / total);
    }

    #[test]
    fn cosine_identity_and_orthogonal() {
        let a = FeatureVector::from_values(vec![1.0, 2.0, 3.0]);
        assert_eq!(cosine_similarity(&a, &a), 1.0);
        let b = FeatureVector::from_values(vec![0.0, 0.0, 5.0]);
        let c = FeatureVector::from_values(vec![3.0, 4.0, 0.0]);
        assert_eq!(cosine_similarity(&b, &c), 0.0);
    }

    #[test]
    fn cosine_known_value() {
        let a = FeatureVector::from_values(vec![1.0, 1.0, 0.0]);
        let b = FeatureVector::from_values(vec![1.0, 0.0, 0.0]);
        assert_relative_eq!(cosine_similarity(&a, &b), 1.0 / 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn zero_vector_similarity_is_zero() {
        let z = FeatureVector::zero();
        assert_eq!(cosine_similarity(&z, &z), 0.0);
    }

    #[test]
    #[should_panic(expected = "length mismatch")]
    fn cosine_rejects_length_mismatch() {
        let a = FeatureVector::from_values(vec![1.0, 2.0]);
        let b = FeatureVector::from_values(vec![1.0]);
        cosine_similarity(&a, &b);
    }

    proptest! {
        #[test]
        fn cosine_bounded_and_scale_invariant(
            a in proptest::collection::vec(0.0f64..10.0, 8),
            b in proptest::collection::vec(0.0f64..10.0, 8),
            c in 0.001f64..1000.0,
        ) {
            let fa = FeatureVector::from_values(a.clone());
            let fb = FeatureVector::from_values(b);
            let s = cosine_similarity(&fa, &fb);
            prop_assert!((0.0..=1.0).contains(&s));
            let scaled = FeatureVector::from_values(a.iter().map(|v| v * c).collect());
            prop_assert!((cosine_similarity(&scaled, &fb) - s).abs() < 1e-9);
        }
    }
}
