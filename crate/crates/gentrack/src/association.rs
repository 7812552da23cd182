//! Target-oriented cost matrix and optimal one-to-one assignment.
//!
//! Costs combine the mean particle motion cost, detection confidence and
//! track penalty into a single `[0, 1]` entry, so one Hungarian solve per
//! frame covers the whole matching problem — no cascaded sub-matchings.

use crate::bbox::{center_distance, diagonal, iou, BBox};
use crate::config::TrackerConfig;
use crate::track::{Detection, Track};

/// Track-by-detection cost matrix; entries in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![0.0; rows * cols] }
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<f64>) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.entries[row * self.cols + col] = value;
    }
}

/// Result of one assignment solve. Pairs and the unmatched index lists
/// partition all rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `(track_index, detection_index, cost)`, sorted by track index.
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_detections: Vec<usize>,
}

/// Motion consistency cost `(1 - IoU) * min(d, d_od) / d_od`, where the
/// maximum allowed distance `d_od` is the sum of the two box diagonals.
pub fn motion_cost(p: &BBox, det: &BBox) -> f64 {
    let c_iou = 1.0 - iou(p, det);
    let d_od = diagonal(p) + diagonal(det);
    let c_d = center_distance(p, det).min(d_od) / d_od;
    c_iou * c_d
}

/// Cost matrix entry `(i, j)`:
/// `lambda_p * mean_s(motion_cost(particle_s, det_j)) + lambda_d * (1 - conf_j) + lambda_h * penalty_i`.
/// The mean runs over each track's surviving particles.
pub fn cost_matrix(tracks: &[Track], detections: &[Detection], cfg: &TrackerConfig) -> CostMatrix {
    let mut m = CostMatrix::new(tracks.len(), detections.len());
    for (i, track) in tracks.iter().enumerate() {
        assert!(!track.particles.is_empty(), "track {} has no particles", track.id);
        for (j, det) in detections.iter().enumerate() {
            let mean_motion = track
                .particles
                .iter()
                .map(|p| motion_cost(&p.state, &det.bbox))
                .sum::<f64>()
                / track.particles.len() as f64;
            let cost = cfg.lambda_p * mean_motion
                + cfg.lambda_d * (1.0 - det.conf)
                + cfg.lambda_h * track.penalty;
            m.set(i, j, cost);
        }
    }
    m
}

/// Minimum-total-cost one-to-one assignment. Rectangular matrices are padded
/// to square with cost-1.0 dummies (the maximum genuine cost, so padding
/// never displaces a sub-gate pairing); pairs costing more than `gate` are
/// demoted to unmatched.
pub fn solve(matrix: &CostMatrix, gate: f64) -> Assignment {
    let (t, d) = (matrix.rows(), matrix.cols());
    if t == 0 || d == 0 {
        return Assignment {
            pairs: Vec::new(),
            unmatched_tracks: (0..t).collect(),
            unmatched_detections: (0..d).collect(),
        };
    }
    let n = t.max(d);
    let padded = |row: usize, col: usize| {
        if row < t && col < d {
            matrix.get(row, col)
        } else {
            1.0
        }
    };
    let row_of_col = hungarian_square(n, padded);

    let mut pairs = Vec::new();
    let mut track_matched = vec![false; t];
    let mut det_matched = vec![false; d];
    for (col, row) in row_of_col.iter().enumerate() {
        if *row < t && col < d {
            let cost = matrix.get(*row, col);
            if cost <= gate {
                pairs.push((*row, col, cost));
                track_matched[*row] = true;
                det_matched[col] = true;
            }
        }
    }
    pairs.sort_by_key(|p| (p.0, p.1));
    Assignment {
        pairs,
        unmatched_tracks: (0..t).filter(|&i| !track_matched[i]).collect(),
        unmatched_detections: (0..d).filter(|&j| !det_matched[j]).collect(),
    }
}

/// O(n^3) Hungarian algorithm on an n x n cost lookup, via shortest
/// augmenting paths with row/column potentials. Returns, per column, the
/// row assigned to it. Deterministic: rows are inserted in index order and
/// ties resolve to the lowest column index.
fn hungarian_square<F: Fn(usize, usize) -> f64>(n: usize, cost: F) -> Vec<usize> {
    // 1-based sentinel slot at column n.
    let mut row_potential = vec![0.0f64; n + 1];
    let mut col_potential = vec![0.0f64; n + 1];
    let mut assigned_row = vec![n; n + 1]; // assigned_row[col] = row, n = free
    for new_row in 0..n {
        let mut col = n;
        assigned_row[col] = new_row;
        let mut min_to_col = vec![f64::INFINITY; n + 1];
        let mut prev_col = vec![n; n + 1];
        let mut in_tree = vec![false; n + 1];
        // Grow the alternating tree until a free column is reached.
        while assigned_row[col] != n {
            in_tree[col] = true;
            let row = assigned_row[col];
            let mut delta = f64::INFINITY;
            let mut next_col = n;
            for j in 0..n {
                if in_tree[j] {
                    continue;
                }
                let reduced = cost(row, j) - row_potential[row] - col_potential[j];
                if reduced < min_to_col[j] {
                    min_to_col[j] = reduced;
                    prev_col[j] = col;
                }
                if min_to_col[j] < delta {
                    delta = min_to_col[j];
                    next_col = j;
                }
            }
            for j in 0..=n {
                if in_tree[j] {
                    row_potential[assigned_row[j]] += delta;
                    col_potential[j] -= delta;
                } else {
                    min_to_col[j] -= delta;
                }
            }
            col = next_col;
        }
        // Augment along the path back to the sentinel.
        while col != n {
            let prev = prev_col[col];
            assigned_row[col] = assigned_row[prev];
            col = prev;
        }
    }
    assigned_row.truncate(n);
    assigned_row
}
