//! CLEAR-MOT evaluation: MOTA, MOTP (mean IoU of matches), mostly tracked,
//! mostly lost, identity switches and fragmentations.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::assignment::min_cost_matching;
use crate::error::{Error, Result};
use crate::model::{iou, BoundingBox};
use crate::mot_io::GroundTruthRecord;
use crate::tracker::FrameOutput;

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;
const MOSTLY_TRACKED: f64 = 0.8;
const MOSTLY_LOST: f64 = 0.2;
/// Solver cost for pairs below the overlap threshold; they are discarded
/// after solving.
const NO_MATCH_COST: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mota: f64,
    pub motp: f64,
    /// Fraction of ground-truth tracks matched in at least 80% of their frames.
    pub mt: f64,
    /// Fraction of ground-truth tracks matched in at most 20% of their frames.
    pub ml: f64,
    pub id_switches: u64,
    pub fragmentations: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
}

/// Correspondences of one frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameMatch {
    /// `(gt_id, hyp_id, iou)`, ascending by gt id.
    pub pairs: Vec<(u64, u64, f64)>,
    pub unmatched_gt: Vec<u64>,
    pub unmatched_hyp: Vec<u64>,
}

impl FrameMatch {
    pub fn correspondence(&self) -> BTreeMap<u64, u64> {
        self.pairs.iter().map(|&(g, h, _)| (g, h)).collect()
    }
}

/// Matches one frame. Pairs matched in the previous frame are kept while
/// their overlap stays at or above `iou_threshold`; the rest are assigned by
/// minimum `1 - IoU`, dropping pairs below the threshold.
pub fn match_frame(
    gt: &[(u64, BoundingBox)],
    hyp: &[(u64, BoundingBox)],
    previous: &BTreeMap<u64, u64>,
    iou_threshold: f64,
) -> FrameMatch {
    let mut pairs = Vec::new();
    let mut gt_used = vec![false; gt.len()];
    let mut hyp_used = vec![false; hyp.len()];

    for (gi, (gid, gbox)) in gt.iter().enumerate() {
        let Some(prev_h) = previous.get(gid) else { continue };
        if let Some(hi) = hyp.iter().position(|(hid, _)| hid == prev_h) {
            let overlap = iou(gbox, &hyp[hi].1);
            if overlap >= iou_threshold && !hyp_used[hi] {
                pairs.push((*gid, *prev_h, overlap));
                gt_used[gi] = true;
                hyp_used[hi] = true;
            }
        }
    }

    let free_gt: Vec<usize> = (0..gt.len()).filter(|&i| !gt_used[i]).collect();
    let free_hyp: Vec<usize> = (0..hyp.len()).filter(|&j| !hyp_used[j]).collect();
    if !free_gt.is_empty() && !free_hyp.is_empty() {
        let overlaps = DMatrix::from_fn(free_gt.len(), free_hyp.len(), |r, c| {
            iou(&gt[free_gt[r]].1, &hyp[free_hyp[c]].1)
        });
        let cost = overlaps.map(|o| if o >= iou_threshold { 1.0 - o } else { NO_MATCH_COST });
        let rows: Vec<usize> = (0..free_gt.len()).collect();
        let cols: Vec<usize> = (0..free_hyp.len()).collect();
        for (r, c) in min_cost_matching(&cost, &rows, &cols).pairs {
            if overlaps[(r, c)] >= iou_threshold {
                let (gi, hi) = (free_gt[r], free_hyp[c]);
                pairs.push((gt[gi].0, hyp[hi].0, overlaps[(r, c)]));
                gt_used[gi] = true;
                hyp_used[hi] = true;
            }
        }
    }

    pairs.sort_by_key(|p| p.0);
    FrameMatch {
        pairs,
        unmatched_gt: (0..gt.len()).filter(|&i| !gt_used[i]).map(|i| gt[i].0).collect(),
        unmatched_hyp: (0..hyp.len()).filter(|&j| !hyp_used[j]).map(|j| hyp[j].0).collect(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameEvents {
    pub frame: u32,
    pub gt_boxes: u64,
    pub hyp_boxes: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub id_switches: u64,
    pub matches: u64,
    pub overlap_sum: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GtTrackStats {
    pub frames_present: u64,
    pub frames_matched: u64,
    pub last_matched_hypothesis: Option<u64>,
    pub interruptions: u64,
    /// Matched before and missed since.
    interrupted: bool,
}

/// Per-frame CLEAR-MOT event log.
#[derive(Debug, Clone)]
pub struct EventAccumulator {
    iou_threshold: f64,
    frames: Vec<FrameEvents>,
    gt_tracks: BTreeMap<u64, GtTrackStats>,
    previous: BTreeMap<u64, u64>,
}

impl EventAccumulator {
    pub fn new(iou_threshold: f64) -> Self {
        Self {
            iou_threshold,
            frames: Vec::new(),
            gt_tracks: BTreeMap::new(),
            previous: BTreeMap::new(),
        }
    }

    pub fn frames(&self) -> &[FrameEvents] {
        &self.frames
    }

    pub fn gt_tracks(&self) -> &BTreeMap<u64, GtTrackStats> {
        &self.gt_tracks
    }

    pub fn update(&mut self, frame: u32, gt: &[(u64, BoundingBox)], hyp: &[(u64, BoundingBox)]) -> FrameMatch {
        let m = match_frame(gt, hyp, &self.previous, self.iou_threshold);
        let mut ev = FrameEvents {
            frame,
            gt_boxes: gt.len() as u64,
            hyp_boxes: hyp.len() as u64,
            false_positives: m.unmatched_hyp.len() as u64,
            false_negatives: m.unmatched_gt.len() as u64,
            matches: m.pairs.len() as u64,
            ..FrameEvents::default()
        };

        for &(gid, hid, overlap) in &m.pairs {
            ev.overlap_sum += overlap;
            let st = self.gt_tracks.entry(gid).or_default();
            st.frames_present += 1;
            st.frames_matched += 1;
            if st.last_matched_hypothesis.is_some_and(|h| h != hid) {
                ev.id_switches += 1;
            }
            if st.interrupted {
                st.interruptions += 1;
                st.interrupted = false;
            }
            st.last_matched_hypothesis = Some(hid);
        }
        for &gid in &m.unmatched_gt {
            let st = self.gt_tracks.entry(gid).or_default();
            st.frames_present += 1;
            if st.last_matched_hypothesis.is_some() {
                st.interrupted = true;
            }
        }

        self.previous = m.correspondence();
        self.frames.push(ev);
        m
    }

    pub fn report(&self) -> Result<MetricsReport> {
        let sum = |f: fn(&FrameEvents) -> u64| self.frames.iter().map(f).sum::<u64>();
        let total_gt = sum(|e| e.gt_boxes);
        if total_gt == 0 {
            return Err(Error::EmptyGroundTruth);
        }
        let fp = sum(|e| e.false_positives);
        let fn_ = sum(|e| e.false_negatives);
        let idsw = sum(|e| e.id_switches);
        let matches = sum(|e| e.matches);
        let overlap: f64 = self.frames.iter().map(|e| e.overlap_sum).sum();

        let n_tracks = self.gt_tracks.len() as f64;
        let ratio = |s: &GtTrackStats| s.frames_matched as f64 / s.frames_present as f64;
        let mt = self.gt_tracks.values().filter(|s| ratio(s) >= MOSTLY_TRACKED).count() as f64;
        let ml = self.gt_tracks.values().filter(|s| ratio(s) <= MOSTLY_LOST).count() as f64;

        Ok(MetricsReport {
            mota: 1.0 - (fn_ + fp + idsw) as f64 / total_gt as f64,
            motp: if matches > 0 { overlap / matches as f64 } else { 0.0 },
            mt: mt / n_tracks,
            ml: ml / n_tracks,
            id_switches: idsw,
            fragmentations: self.gt_tracks.values().map(|s| s.interruptions).sum(),
            false_positives: fp,
            false_negatives: fn_,
        })
    }
}

/// Evaluates tracker output against ground truth, frame by frame over the
/// union of frames present in either input. Invalid ground-truth rows are
/// ignored.
pub fn evaluate_sequence(
    gt: &BTreeMap<u32, Vec<GroundTruthRecord>>,
    results: &[FrameOutput],
    iou_threshold: f64,
) -> Result<MetricsReport> {
    accumulate(gt, results, iou_threshold).report()
}

pub fn accumulate(
    gt: &BTreeMap<u32, Vec<GroundTruthRecord>>,
    results: &[FrameOutput],
    iou_threshold: f64,
) -> EventAccumulator {
    let hyp_by_frame: BTreeMap<u32, Vec<(u64, BoundingBox)>> = results
        .iter()
        .map(|f| (f.frame_index, f.tracks.iter().map(|t| (t.track_id, t.bbox)).collect()))
        .collect();
    let frames: BTreeSet<u32> = gt.keys().chain(hyp_by_frame.keys()).copied().collect();

    let mut acc = EventAccumulator::new(iou_threshold);
    for frame in frames {
        let g: Vec<(u64, BoundingBox)> = gt
            .get(&frame)
            .map(|rs| rs.iter().filter(|r| r.valid).map(|r| (r.gt_id, r.bbox)).collect())
            .unwrap_or_default();
        let h = hyp_by_frame.get(&frame).cloned().unwrap_or_default();
        acc.update(frame, &g, &h);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracker::TrackOutput;
    use proptest::prelude::*;

    fn bb(x: f64) -> BoundingBox {
        BoundingBox::new(x, 0.0, 10.0, 20.0).unwrap()
    }

    fn gt_seq(tracks: &[(u64, &[(u32, f64)])]) -> BTreeMap<u32, Vec<GroundTruthRecord>> {
        let mut out: BTreeMap<u32, Vec<GroundTruthRecord>> = BTreeMap::new();
        for (id, path) in tracks {
            for &(frame, x) in *path {
                out.entry(frame).or_default().push(GroundTruthRecord {
                    frame,
                    gt_id: *id,
                    bbox: bb(x),
                    valid: true,
                });
            }
        }
        out
    }

    fn hyp_seq(rows: &[(u32, u64, f64)]) -> Vec<FrameOutput> {
        let mut frames: BTreeMap<u32, Vec<TrackOutput>> = BTreeMap::new();
        for &(frame, id, x) in rows {
            frames.entry(frame).or_default().push(TrackOutput { track_id: id, bbox: bb(x) });
        }
        frames
            .into_iter()
            .map(|(frame_index, tracks)| FrameOutput { frame_index, tracks })
            .collect()
    }

    #[test]
    fn identical_hypotheses() {
        let gt = [(1, bb(0.0)), (2, bb(50.0))];
        let m = match_frame(&gt, &[(7, bb(0.0)), (8, bb(50.0))], &BTreeMap::new(), 0.5);
        assert_eq!(m.pairs.len(), 2);
        assert!(m.unmatched_gt.is_empty() && m.unmatched_hyp.is_empty());

        let m = match_frame(&gt, &[], &BTreeMap::new(), 0.5);
        assert_eq!(m.unmatched_gt, vec![1, 2]);
    }

    #[test]
    fn persistence_precedes_cost_matching() {
        let g = BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        // IoU 0.6: overlap width w with 10x10 boxes gives w/(20-w) = 0.6 -> w = 7.5
        let a = BoundingBox::new(2.5, 0.0, 10.0, 10.0).unwrap();
        // IoU 0.8: w/(20-w) = 0.8 -> w = 80/9
        let b = BoundingBox::new(10.0 - 80.0 / 9.0, 0.0, 10.0, 10.0).unwrap();
        assert!((iou(&g, &a) - 0.6).abs() < 1e-12);
        assert!((iou(&g, &b) - 0.8).abs() < 1e-12);

        let previous = BTreeMap::from([(1, 100)]);
        let m = match_frame(&[(1, g)], &[(100, a), (200, b)], &previous, 0.5);
        assert_eq!(m.pairs.len(), 1);
        assert_eq!((m.pairs[0].0, m.pairs[0].1), (1, 100));
        assert_eq!(m.unmatched_hyp, vec![200]);

        let fresh = match_frame(&[(1, g)], &[(100, a), (200, b)], &BTreeMap::new(), 0.5);
        assert_eq!(fresh.pairs[0].1, 200);
    }

    #[test]
    fn below_threshold_is_not_a_match() {
        let g = BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let h = BoundingBox::new(6.0, 0.0, 10.0, 10.0).unwrap();
        let m = match_frame(&[(1, g)], &[(2, h)], &BTreeMap::new(), 0.5);
        assert!(m.pairs.is_empty());
        assert_eq!((m.unmatched_gt.len(), m.unmatched_hyp.len()), (1, 1));
    }

    #[test]
    fn perfect_tracking() {
        let path: Vec<(u32, f64)> = (1..=5).map(|f| (f, f as f64)).collect();
        let gt = gt_seq(&[(1, &path)]);
        let hyp = hyp_seq(&path.iter().map(|&(f, x)| (f, 9, x)).collect::<Vec<_>>());
        let r = evaluate_sequence(&gt, &hyp, 0.5).unwrap();
        assert_eq!(r.mota, 1.0);
        assert_eq!(r.motp, 1.0);
        assert_eq!((r.id_switches, r.fragmentations), (0, 0));
        assert_eq!((r.mt, r.ml), (1.0, 0.0));
    }

    #[test]
    fn one_switch_in_ten_boxes() {
        let path: Vec<(u32, f64)> = (1..=10).map(|f| (f, 3.0 * f as f64)).collect();
        let gt = gt_seq(&[(1, &path)]);
        let hyp = hyp_seq(
            &path
                .iter()
                .map(|&(f, x)| (f, if f <= 5 { 1 } else { 2 }, x))
                .collect::<Vec<_>>(),
        );
        let r = evaluate_sequence(&gt, &hyp, 0.5).unwrap();
        assert!((r.mota - 0.9).abs() < 1e-12);
        assert_eq!(r.id_switches, 1);
        assert_eq!((r.false_positives, r.false_negatives, r.fragmentations), (0, 0, 0));
    }

    #[test]
    fn empty_results() {
        let path: Vec<(u32, f64)> = (1..=4).map(|f| (f, 0.0)).collect();
        let gt = gt_seq(&[(1, &path), (2, &path[..2])]);
        let r = evaluate_sequence(&gt, &[], 0.5).unwrap();
        assert_eq!(r.mota, 0.0);
        assert_eq!(r.false_negatives, 6);
        assert_eq!((r.mt, r.ml), (0.0, 1.0));
    }

    #[test]
    fn empty_ground_truth_is_an_error() {
        let hyp = hyp_seq(&[(1, 1, 0.0)]);
        assert!(matches!(
            evaluate_sequence(&BTreeMap::new(), &hyp, 0.5),
            Err(Error::EmptyGroundTruth)
        ));
    }

    #[test]
    fn gap_counts_one_fragmentation_without_switch() {
        let path: Vec<(u32, f64)> = (1..=8).map(|f| (f, 2.0 * f as f64)).collect();
        let gt = gt_seq(&[(1, &path)]);
        let hyp = hyp_seq(
            &path
                .iter()
                .filter(|(f, _)| !(4..=5).contains(f))
                .map(|&(f, x)| (f, 3, x))
                .collect::<Vec<_>>(),
        );
        let r = evaluate_sequence(&gt, &hyp, 0.5).unwrap();
        assert_eq!(r.fragmentations, 1);
        assert_eq!(r.id_switches, 0);
        assert_eq!(r.false_negatives, 2);
        assert!((r.mota - 0.75).abs() < 1e-12);
    }

    #[test]
    fn invalid_gt_rows_are_ignored() {
        let mut gt = gt_seq(&[(1, &[(1, 0.0)])]);
        gt.get_mut(&1).unwrap().push(GroundTruthRecord {
            frame: 1,
            gt_id: 2,
            bbox: bb(100.0),
            valid: false,
        });
        let r = evaluate_sequence(&gt, &hyp_seq(&[(1, 1, 0.0)]), 0.5).unwrap();
        assert_eq!(r.false_negatives, 0);
        assert_eq!(r.mota, 1.0);
    }

    fn arb_scene() -> impl Strategy<Value = (BTreeMap<u32, Vec<GroundTruthRecord>>, Vec<FrameOutput>)> {
        let gt_rows = prop::collection::vec((1u32..12, 1u64..5, 0.0..60.0f64), 1..40);
        let hyp_rows = prop::collection::vec((1u32..12, 1u64..6, 0.0..60.0f64), 0..40);
        (gt_rows, hyp_rows).prop_map(|(g, h)| {
            let mut gt: BTreeMap<u32, Vec<GroundTruthRecord>> = BTreeMap::new();
            for (frame, id, x) in g {
                let e = gt.entry(frame).or_default();
                if !e.iter().any(|r| r.gt_id == id) {
                    e.push(GroundTruthRecord { frame, gt_id: id, bbox: bb(x), valid: true });
                }
            }
            let mut hyp: BTreeMap<u32, Vec<TrackOutput>> = BTreeMap::new();
            for (frame, id, x) in h {
                let e = hyp.entry(frame).or_default();
                if !e.iter().any(|t| t.track_id == id) {
                    e.push(TrackOutput { track_id: id, bbox: bb(x) });
                }
            }
            let hyp = hyp.into_iter().map(|(frame_index, tracks)| FrameOutput { frame_index, tracks }).collect();
            (gt, hyp)
        })
    }

    proptest! {
        #[test]
        fn accounting_invariants((gt, hyp) in arb_scene()) {
            let acc = accumulate(&gt, &hyp, 0.5);
            for e in acc.frames() {
                prop_assert_eq!(e.false_negatives + e.matches, e.gt_boxes);
                prop_assert_eq!(e.false_positives + e.matches, e.hyp_boxes);
                prop_assert!(e.matches <= e.gt_boxes.min(e.hyp_boxes));
            }
            let r = acc.report().unwrap();
            prop_assert!(r.mota <= 1.0);
            prop_assert_eq!(r.mota == 1.0, r.false_positives + r.false_negatives + r.id_switches == 0);
            if acc.frames().iter().any(|e| e.matches > 0) {
                prop_assert!(r.motp >= 0.5 - 1e-12 && r.motp <= 1.0 + 1e-12);
            }
            prop_assert!(r.mt + r.ml <= 1.0 + 1e-12);
        }

        #[test]
        fn hypothesis_renaming_is_invisible((gt, hyp) in arb_scene(), offset in 1u64..1000) {
            let renamed: Vec<FrameOutput> = hyp
                .iter()
                .map(|f| {
                    // any injective renaming; reverse order plus offset
                    let mut tracks: Vec<TrackOutput> = f.tracks.iter().map(|t| TrackOutput {
                        track_id: offset + 100 - t.track_id,
                        bbox: t.bbox,
                    }).collect();
                    tracks.sort_by_key(|t| t.track_id);
                    FrameOutput { frame_index: f.frame_index, tracks }
                })
                .collect();
            let a = evaluate_sequence(&gt, &hyp, 0.5).unwrap();
            let b = evaluate_sequence(&gt, &renamed, 0.5).unwrap();
            prop_assert_eq!(a.id_switches, b.id_switches);
            prop_assert_eq!(a.fragmentations, b.fragmentations);
        }
    }
}
