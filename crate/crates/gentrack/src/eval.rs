//! Tracking metrics: MOTA, IDF1 and identity switches over per-frame
//! identified boxes.
//!
//! Per-frame matching follows the CLEAR protocol: carried-over pairs from
//! the persistent GT-to-hypothesis correspondence are kept while their IoU
//! clears the threshold, the remainder is matched by Hungarian on
//! `1 - IoU`, and an identity switch is counted whenever a GT identity's
//! matched hypothesis id changes between consecutively matched frames.
//! IDF1 comes from the global identity matching over accumulated per-frame
//! overlap counts.

use crate::association::{solve, CostMatrix};
use crate::bbox::iou;
use crate::io::TrackMap;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// Multiple object tracking accuracy, percent. May go below zero when
    /// errors outnumber ground-truth boxes; reported raw.
    pub mota: f64,
    /// Identity F1, percent.
    pub idf1: f64,
    /// Identity switches.
    pub idsw: u64,
    pub false_positives: u64,
    pub misses: u64,
    pub matches: u64,
    pub gt_total: u64,
    pub hyp_total: u64,
}

impl MetricsReport {
    pub fn csv_header() -> &'static str {
        "mota,idf1,idsw,fp,fn,matches,gt_total,hyp_total"
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{:.3},{:.3},{},{},{},{},{},{}",
            self.mota,
            self.idf1,
            self.idsw,
            self.false_positives,
            self.misses,
            self.matches,
            self.gt_total,
            self.hyp_total
        )
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = if self.mota < 0.0 { "  (below zero: errors exceed GT)" } else { "" };
        writeln!(f, "metric        value")?;
        writeln!(f, "MOTA       {:>8.3}{flag}", self.mota)?;
        writeln!(f, "IDF1       {:>8.3}", self.idf1)?;
        writeln!(f, "IDSW       {:>8}", self.idsw)?;
        writeln!(f, "FP         {:>8}", self.false_positives)?;
        writeln!(f, "FN         {:>8}", self.misses)?;
        writeln!(f, "matches    {:>8}", self.matches)?;
        writeln!(f, "GT boxes   {:>8}", self.gt_total)?;
        write!(f, "hyp boxes  {:>8}", self.hyp_total)
    }
}

/// Compare hypothesis tracks against ground truth at an IoU threshold
/// (0.5 is the CLEAR convention).
pub fn evaluate(gt: &TrackMap, hyp: &TrackMap, iou_threshold: f64) -> Result<MetricsReport> {
    let gt_total: u64 = gt.values().map(|v| v.len() as u64).sum();
    if gt_total == 0 {
        return Err(Error::FrameRange("ground truth contains no boxes".into()));
    }
    let gt_min = *gt.keys().next().unwrap();
    let gt_max = *gt.keys().next_back().unwrap();
    // Hypothesis boxes on frames without ground truth count as false
    // positives, but fully disjoint ranges mean the files do not describe
    // the same sequence.
    let mut range = (gt_min, gt_max);
    if let (Some(&h_min), Some(&h_max)) = (hyp.keys().next(), hyp.keys().next_back()) {
        if h_min > gt_max || h_max < gt_min {
            return Err(Error::FrameRange(format!(
                "hypothesis frames {}..={} do not overlap ground truth {}..={}",
                h_min, h_max, gt_min, gt_max
            )));
        }
        range = (gt_min.min(h_min), gt_max.max(h_max));
    }
    let (first_frame, last_frame) = range;

    let hyp_total: u64 = hyp.values().map(|v| v.len() as u64).sum();
    let empty = Vec::new();
    let gate = 1.0 - iou_threshold;

    let mut correspondence: BTreeMap<u64, u64> = BTreeMap::new();
    let mut overlap: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    let mut idsw = 0u64;
    let mut false_positives = 0u64;
    let mut misses = 0u64;
    let mut matches = 0u64;

    for frame in first_frame..=last_frame {
        let mut gt_frame: Vec<(u64, crate::bbox::BBox)> =
            gt.get(&frame).unwrap_or(&empty).clone();
        let mut hyp_frame: Vec<(u64, crate::bbox::BBox)> =
            hyp.get(&frame).unwrap_or(&empty).clone();
        gt_frame.sort_by_key(|(id, _)| *id);
        hyp_frame.sort_by_key(|(id, _)| *id);

        for (gid, gb) in &gt_frame {
            for (hid, hb) in &hyp_frame {
                if iou(gb, hb) >= iou_threshold {
                    *overlap.entry((*gid, *hid)).or_default() += 1;
                }
            }
        }

        // Carry over persistent pairs that still hold.
        let mut gt_used = vec![false; gt_frame.len()];
        let mut hyp_used = vec![false; hyp_frame.len()];
        let mut frame_pairs: Vec<(u64, u64)> = Vec::new();
        for (gi, (gid, gb)) in gt_frame.iter().enumerate() {
            if let Some(&hid) = correspondence.get(gid) {
                if let Some(hi) = hyp_frame.iter().position(|(h, _)| *h == hid) {
                    if !hyp_used[hi] && iou(gb, &hyp_frame[hi].1) >= iou_threshold {
                        gt_used[gi] = true;
                        hyp_used[hi] = true;
                        frame_pairs.push((*gid, hid));
                    }
                }
            }
        }

        // Hungarian over the remainder.
        let free_gt: Vec<usize> = (0..gt_frame.len()).filter(|&i| !gt_used[i]).collect();
        let free_hyp: Vec<usize> = (0..hyp_frame.len()).filter(|&i| !hyp_used[i]).collect();
        if !free_gt.is_empty() && !free_hyp.is_empty() {
            let mut m = CostMatrix::new(free_gt.len(), free_hyp.len());
            for (r, &gi) in free_gt.iter().enumerate() {
                for (c, &hi) in free_hyp.iter().enumerate() {
                    m.set(r, c, 1.0 - iou(&gt_frame[gi].1, &hyp_frame[hi].1));
                }
            }
            for (r, c, _) in solve(&m, gate).pairs {
                let (gi, hi) = (free_gt[r], free_hyp[c]);
                gt_used[gi] = true;
                hyp_used[hi] = true;
                frame_pairs.push((gt_frame[gi].0, hyp_frame[hi].0));
            }
        }

        matches += frame_pairs.len() as u64;
        misses += gt_used.iter().filter(|u| !**u).count() as u64;
        false_positives += hyp_used.iter().filter(|u| !**u).count() as u64;
        for (gid, hid) in frame_pairs {
            if let Some(&prev) = correspondence.get(&gid) {
                if prev != hid {
                    idsw += 1;
                }
            }
            correspondence.insert(gid, hid);
        }
    }

    let mota = 100.0 * (1.0 - (misses + false_positives + idsw) as f64 / gt_total as f64);
    let idf1 = 100.0 * 2.0 * idtp(&overlap) as f64 / (gt_total + hyp_total) as f64;

    Ok(MetricsReport {
        mota,
        idf1,
        idsw,
        false_positives,
        misses,
        matches,
        gt_total,
        hyp_total,
    })
}

/// Total frames credited by the optimal one-to-one identity matching.
fn idtp(overlap: &BTreeMap<(u64, u64), u64>) -> u64 {
    if overlap.is_empty() {
        return 0;
    }
    let mut gt_ids: Vec<u64> = overlap.keys().map(|(g, _)| *g).collect();
    let mut hyp_ids: Vec<u64> = overlap.keys().map(|(_, h)| *h).collect();
    gt_ids.sort_unstable();
    gt_ids.dedup();
    hyp_ids.sort_unstable();
    hyp_ids.dedup();

    let n = gt_ids.len().max(hyp_ids.len());
    let max_count = *overlap.values().max().unwrap() as f64;
    // Minimize (max - m) == maximize total overlap; dummies carry zero
    // overlap and never affect the total.
    let mut m = CostMatrix::new(n, n);
    for r in 0..n {
        for c in 0..n {
            let count = if r < gt_ids.len() && c < hyp_ids.len() {
                *overlap.get(&(gt_ids[r], hyp_ids[c])).unwrap_or(&0)
            } else {
                0
            };
            m.set(r, c, max_count - count as f64);
        }
    }
    solve(&m, f64::INFINITY)
        .pairs
        .iter()
        .map(|&(r, c, _)| {
            if r < gt_ids.len() && c < hyp_ids.len() {
                *overlap.get(&(gt_ids[r], hyp_ids[c])).unwrap_or(&0)
            } else {
                0
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbox::BBox;
    use approx::assert_relative_eq;

    fn static_two_target_gt(frames: u64) -> TrackMap {
        let mut gt = TrackMap::new();
        for f in 0..frames {
            gt.insert(
                f,
                vec![
                    (0, BBox::new(20.0, 20.0, 10.0, 10.0)),
                    (1, BBox::new(80.0, 80.0, 10.0, 10.0)),
                ],
            );
        }
        gt
    }

    /// Two static targets; hypothesis ids 10/20 swap positions at frame 5.
    fn swapped_hyp() -> TrackMap {
        let a = BBox::new(20.0, 20.0, 10.0, 10.0);
        let b = BBox::new(80.0, 80.0, 10.0, 10.0);
        let mut hyp = TrackMap::new();
        for f in 0..10 {
            let (pos10, pos20) = if f < 5 { (a, b) } else { (b, a) };
            hyp.insert(f, vec![(10, pos10), (20, pos20)]);
        }
        hyp
    }

    #[test]
    fn perfect_hypothesis_is_fixed_point() {
        let gt = static_two_target_gt(10);
        let r = evaluate(&gt, &gt, 0.5).unwrap();
        assert_eq!(r.mota, 100.0);
        assert_eq!(r.idf1, 100.0);
        assert_eq!(r.idsw, 0);
        assert_eq!((r.false_positives, r.misses), (0, 0));
    }

    #[test]
    fn empty_hypothesis_all_misses() {
        let gt = static_two_target_gt(10);
        let r = evaluate(&gt, &TrackMap::new(), 0.5).unwrap();
        assert_eq!(r.mota, 0.0);
        assert_eq!(r.idf1, 0.0);
        assert_eq!(r.misses, 20);
    }

    #[test]
    fn id_swap_fixture_counts_two_switches_and_half_idf1() {
        let gt = static_two_target_gt(10);
        let r = evaluate(&gt, &swapped_hyp(), 0.5).unwrap();
        assert_eq!(r.idsw, 2);
        assert_relative_eq!(r.idf1, 50.0, epsilon = 1e-9);
        assert_relative_eq!(r.mota, 90.0, epsilon = 1e-9);
    }

    #[test]
    fn metrics_invariant_under_hyp_relabeling() {
        let gt = static_two_target_gt(10);
        let hyp = swapped_hyp();
        let relabeled: TrackMap = hyp
            .iter()
            .map(|(f, v)| {
                (*f, v.iter().map(|(id, b)| (id * 7 + 3, *b)).collect::<Vec<_>>())
            })
            .collect();
        let a = evaluate(&gt, &hyp, 0.5).unwrap();
        let b = evaluate(&gt, &relabeled, 0.5).unwrap();
        assert_eq!(a.mota, b.mota);
        assert_eq!(a.idf1, b.idf1);
        assert_eq!(a.idsw, b.idsw);
    }

    #[test]
    fn excess_hypotheses_drive_mota_negative() {
        let mut gt = TrackMap::new();
        gt.insert(0, vec![(0, BBox::new(20.0, 20.0, 10.0, 10.0))]);
        let mut hyp = TrackMap::new();
        hyp.insert(
            0,
            vec![
                (0, BBox::new(20.0, 20.0, 10.0, 10.0)),
                (1, BBox::new(50.0, 50.0, 10.0, 10.0)),
                (2, BBox::new(70.0, 20.0, 10.0, 10.0)),
            ],
        );
        let r = evaluate(&gt, &hyp, 0.5).unwrap();
        assert_relative_eq!(r.mota, -100.0, epsilon = 1e-9);
        assert_eq!(r.false_positives, 2);
    }

    #[test]
    fn disjoint_frame_ranges_rejected() {
        let gt = static_two_target_gt(5);
        let mut hyp = TrackMap::new();
        hyp.insert(7, vec![(0, BBox::new(20.0, 20.0, 10.0, 10.0))]);
        assert!(matches!(evaluate(&gt, &hyp, 0.5), Err(Error::FrameRange(_))));
    }

    #[test]
    fn trailing_hypothesis_frames_count_as_false_positives() {
        let gt = static_two_target_gt(5);
        let mut hyp = gt.clone();
        hyp.insert(6, vec![(9, BBox::new(20.0, 20.0, 10.0, 10.0))]);
        let r = evaluate(&gt, &hyp, 0.5).unwrap();
        assert_eq!(r.false_positives, 1);
        assert_eq!(r.misses, 0);
    }

    #[test]
    fn empty_ground_truth_rejected() {
        assert!(matches!(
            evaluate(&TrackMap::new(), &TrackMap::new(), 0.5),
            Err(Error::FrameRange(_))
        ));
    }

    #[test]
    fn continuity_bonus_prefers_previous_pairing() {
        // Two hypotheses overlap one GT; the one paired earlier keeps it
        // even when the other drifts slightly closer.
        let mut gt = TrackMap::new();
        let mut hyp = TrackMap::new();
        for f in 0..4u64 {
            gt.insert(f, vec![(0, BBox::new(50.0, 50.0, 20.0, 20.0))]);
        }
        hyp.insert(0, vec![(10, BBox::new(50.0, 50.0, 20.0, 20.0))]);
        for f in 1..4u64 {
            hyp.insert(
                f,
                vec![
                    (10, BBox::new(52.0, 50.0, 20.0, 20.0)),
                    (20, BBox::new(50.0, 50.0, 20.0, 20.0)),
                ],
            );
        }
        let r = evaluate(&gt, &hyp, 0.5).unwrap();
        assert_eq!(r.idsw, 0, "continuity keeps GT 0 on hyp 10");
        assert_eq!(r.false_positives, 3);
    }
}
