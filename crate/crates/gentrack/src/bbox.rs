//! Center-parameterized bounding boxes and their geometry.
//!
//! All tracking math runs on the center form `(u, v, w, h)`; the corner
//! (left/top) form only appears at file I/O boundaries.

/// Axis-aligned bounding box, center parameterized: `(u, v)` is the box
/// center in pixels, `w`/`h` the width and height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(u: f64, v: f64, w: f64, h: f64) -> Self {
        debug_assert!(w > 0.0 && h > 0.0, "box dimensions must be positive");
        Self { u, v, w, h }
    }

    /// Build from corner form (left, top, width, height).
    pub fn from_tlwh(left: f64, top: f64, w: f64, h: f64) -> Self {
        Self::new(left + w / 2.0, top + h / 2.0, w, h)
    }

    pub fn left(&self) -> f64 {
        self.u - self.w / 2.0
    }

    pub fn top(&self) -> f64 {
        self.v - self.h / 2.0
    }

    pub fn right(&self) -> f64 {
        self.u + self.w / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.v + self.h / 2.0
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// Per-frame rate of change of each box coordinate (px/frame).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Velocity4 {
    pub du: f64,
    pub dv: f64,
    pub dw: f64,
    pub dh: f64,
}

impl Velocity4 {
    pub fn new(du: f64, dv: f64, dw: f64, dh: f64) -> Self {
        Self { du, dv, dw, dh }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.du, self.dv, self.dw, self.dh]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// Magnitude of the planar (du, dv) part.
    pub fn planar_norm(&self) -> f64 {
        self.du.hypot(self.dv)
    }
}

/// Intersection over union of two boxes, in `[0, 1]`.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let iw = a.right().min(b.right()) - a.left().max(b.left());
    let ih = a.bottom().min(b.bottom()) - a.top().max(b.top());
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    inter / (a.area() + b.area() - inter)
}

/// Diagonal length of a box.
pub fn diagonal(b: &BBox) -> f64 {
    b.w.hypot(b.h)
}

/// Euclidean distance between the centers of two boxes.
pub fn center_distance(a: &BBox, b: &BBox) -> f64 {
    (a.u - b.u).hypot(a.v - b.v)
}

/// Shift (and if necessary shrink) a box so its corner form lies within
/// `[0, width] x [0, height]`. Dimensions are floored at 1 px.
pub fn clamp_to_image(b: &BBox, width: f64, height: f64) -> BBox {
    let w = b.w.min(width).max(1.0);
    let h = b.h.min(height).max(1.0);
    let left = (b.u - w / 2.0).clamp(0.0, width - w);
    let top = (b.v - h / 2.0).clamp(0.0, height - h);
    BBox::new(left + w / 2.0, top + h / 2.0, w, h)
}
