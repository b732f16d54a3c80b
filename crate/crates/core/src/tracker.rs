//! The tracker: matching cascade over confirmed tracks ordered by time since
//! their last association, an IoU stage for tentative and just-missed tracks,
//! and the tentative / confirmed / deleted track lifecycle.

use serde::{Deserialize, Serialize};

use crate::assignment::min_cost_matching;
use crate::association::{build_cost_matrices, iou_cost_matrix, Gallery};
use crate::error::{Error, Result};
use crate::kalman::{KalmanFilter, StateDistribution};
use crate::model::{AssociationMode, BoundingBox, Detection, TrackerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    Deleted,
}

#[derive(Debug, Clone)]
pub struct Track {
    pub id: u64,
    pub state: StateDistribution,
    /// Frames since the last successful association.
    pub time_since_update: u32,
    /// Successful associations, counting the detection that started the track.
    pub hits: u32,
    pub status: TrackStatus,
    pub gallery: Gallery,
}

impl Track {
    pub fn new(id: u64, state: StateDistribution, cfg: &TrackerConfig) -> Self {
        Self {
            id,
            state,
            time_since_update: 0,
            hits: 1,
            status: TrackStatus::Tentative,
            gallery: Gallery::new(cfg.feature_dim, cfg.gallery_budget),
        }
    }

    pub fn is_confirmed(&self) -> bool {
        self.status == TrackStatus::Confirmed
    }

    pub fn is_tentative(&self) -> bool {
        self.status == TrackStatus::Tentative
    }
}

/// One reported track in one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackOutput {
    pub track_id: u64,
    pub bbox: BoundingBox,
}

/// Confirmed tracks that were associated in a frame, ordered by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameOutput {
    pub frame_index: u32,
    pub tracks: Vec<TrackOutput>,
}

/// Result of one association stage. Track and detection entries index into
/// the slices given to the stage.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchOutcome {
    pub matches: Vec<(usize, usize)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_detections: Vec<usize>,
}

/// Solves one assignment subproblem per track age `1..=max_age` over the
/// confirmed tracks, handing detections to the most recently seen tracks
/// first. Only gated-in pairs are kept.
pub fn matching_cascade(
    kf: &KalmanFilter,
    tracks: &[Track],
    detections: &[Detection],
    cfg: &TrackerConfig,
) -> Result<MatchOutcome> {
    let confirmed: Vec<usize> = (0..tracks.len()).filter(|&i| tracks[i].is_confirmed()).collect();
    let mut unmatched: Vec<usize> = (0..detections.len()).collect();
    let mut matches = Vec::new();

    if !confirmed.is_empty() && !detections.is_empty() {
        let track_refs: Vec<&Track> = confirmed.iter().map(|&i| &tracks[i]).collect();
        let det_refs: Vec<&Detection> = detections.iter().collect();
        let costs = build_cost_matrices(kf, &track_refs, &det_refs, cfg)?;

        for age in 1..=cfg.max_age {
            if unmatched.is_empty() {
                break;
            }
            let rows: Vec<usize> = (0..confirmed.len())
                .filter(|&r| track_refs[r].time_since_update == age)
                .collect();
            if rows.is_empty() {
                continue;
            }
            let solved = min_cost_matching(&costs.cost, &rows, &unmatched);
            for (r, c) in solved.pairs {
                if costs.admissible[(r, c)] {
                    matches.push((confirmed[r], c));
                    unmatched.retain(|&j| j != c);
                }
            }
        }
    }

    let unmatched_tracks = confirmed
        .into_iter()
        .filter(|i| !matches.iter().any(|(t, _)| t == i))
        .collect();
    Ok(MatchOutcome {
        matches,
        unmatched_tracks,
        unmatched_detections: unmatched,
    })
}

/// Tracks eligible for the IoU stage: every tentative track plus the
/// cascade leftovers that were associated in the previous frame.
pub fn iou_candidates(tracks: &[Track], cascade_unmatched: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = (0..tracks.len())
        .filter(|&i| {
            let t = &tracks[i];
            t.is_tentative() || (cascade_unmatched.contains(&i) && t.time_since_update == 1)
        })
        .collect();
    out.sort_unstable();
    out
}

/// Single IoU assignment between `candidates` and the `unmatched` detections.
pub fn iou_stage(
    tracks: &[Track],
    candidates: &[usize],
    detections: &[Detection],
    unmatched: &[usize],
    cfg: &TrackerConfig,
) -> MatchOutcome {
    let track_refs: Vec<&Track> = candidates.iter().map(|&i| &tracks[i]).collect();
    let det_refs: Vec<&Detection> = unmatched.iter().map(|&j| &detections[j]).collect();
    let costs = iou_cost_matrix(&track_refs, &det_refs, cfg);
    let rows: Vec<usize> = (0..candidates.len()).collect();
    let cols: Vec<usize> = (0..unmatched.len()).collect();
    let solved = min_cost_matching(&costs.gated_cost(), &rows, &cols);

    let matches: Vec<(usize, usize)> = solved
        .pairs
        .into_iter()
        .filter(|&(r, c)| costs.admissible[(r, c)])
        .map(|(r, c)| (candidates[r], unmatched[c]))
        .collect();
    MatchOutcome {
        unmatched_tracks: candidates
            .iter()
            .copied()
            .filter(|i| !matches.iter().any(|(t, _)| t == i))
            .collect(),
        unmatched_detections: unmatched
            .iter()
            .copied()
            .filter(|j| !matches.iter().any(|(_, d)| d == j))
            .collect(),
        matches,
    }
}

/// Online multi-object tracker for a single sequence.
///
/// `step` must be called once per frame, in order, including frames without
/// detections.
#[derive(Debug, Clone)]
pub struct Tracker {
    cfg: TrackerConfig,
    kf: KalmanFilter,
    tracks: Vec<Track>,
    next_id: u64,
    last_frame: Option<u32>,
}

impl Tracker {
    pub fn new(cfg: TrackerConfig) -> Result<Self> {
        Self::with_filter(cfg, KalmanFilter::default())
    }

    pub fn with_filter(cfg: TrackerConfig, kf: KalmanFilter) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            kf,
            tracks: Vec::new(),
            next_id: 1,
            last_frame: None,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn filter(&self) -> &KalmanFilter {
        &self.kf
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Mutable access for constructing test scenarios.
    pub fn tracks_mut(&mut self) -> &mut Vec<Track> {
        &mut self.tracks
    }

    /// Id the next new track will receive.
    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn last_frame(&self) -> Option<u32> {
        self.last_frame
    }

    /// Advances one frame. On error the tracker is left exactly as before
    /// the call.
    pub fn step(&mut self, frame_index: u32, detections: &[Detection]) -> Result<FrameOutput> {
        if let Some(previous) = self.last_frame {
            if frame_index <= previous {
                return Err(Error::FrameOrder {
                    frame: frame_index,
                    previous,
                });
            }
        }
        self.validate_detections(detections)?;

        let snapshot: Vec<(StateDistribution, u32)> = self
            .tracks
            .iter()
            .map(|t| (t.state.clone(), t.time_since_update))
            .collect();
        for t in &mut self.tracks {
            t.state = self.kf.predict(&t.state);
            t.time_since_update += 1;
        }

        let planned = match self.plan_updates(detections) {
            Ok(p) => p,
            Err(e) => {
                for (t, (state, since)) in self.tracks.iter_mut().zip(snapshot) {
                    t.state = state;
                    t.time_since_update = since;
                }
                return Err(e);
            }
        };
        self.last_frame = Some(frame_index);
        Ok(self.commit(frame_index, detections, planned))
    }

    fn validate_detections(&self, detections: &[Detection]) -> Result<()> {
        for (index, d) in detections.iter().enumerate() {
            d.bbox.validate()?;
            match &d.descriptor {
                Some(r) if r.dim() != self.cfg.feature_dim => {
                    return Err(Error::DimensionMismatch {
                        expected: self.cfg.feature_dim,
                        found: r.dim(),
                    })
                }
                None if self.cfg.association == AssociationMode::Cascade => {
                    return Err(Error::MissingDescriptor { index });
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Runs association and the fallible Kalman updates without touching
    /// track bookkeeping.
    fn plan_updates(&self, detections: &[Detection]) -> Result<Planned> {
        let cascade = match self.cfg.association {
            AssociationMode::Cascade => matching_cascade(&self.kf, &self.tracks, detections, &self.cfg)?,
            AssociationMode::IouOnly => MatchOutcome {
                matches: Vec::new(),
                unmatched_tracks: (0..self.tracks.len()).filter(|&i| self.tracks[i].is_confirmed()).collect(),
                unmatched_detections: (0..detections.len()).collect(),
            },
        };
        let candidates = iou_candidates(&self.tracks, &cascade.unmatched_tracks);
        let iou = iou_stage(
            &self.tracks,
            &candidates,
            detections,
            &cascade.unmatched_detections,
            &self.cfg,
        );

        let mut matches = cascade.matches;
        matches.extend(iou.matches);
        matches.sort_unstable();

        let mut updates = Vec::with_capacity(matches.len());
        for &(ti, dj) in &matches {
            let t = &self.tracks[ti];
            let state = self
                .kf
                .update(&t.state, &detections[dj].bbox.to_xyah())
                .map_err(|e| Error::for_track(t.id, e))?;
            updates.push((ti, dj, state));
        }
        Ok(Planned {
            updates,
            unmatched_detections: iou.unmatched_detections,
        })
    }

    fn commit(&mut self, frame_index: u32, detections: &[Detection], planned: Planned) -> FrameOutput {
        let mut matched = vec![false; self.tracks.len()];
        for (ti, dj, state) in planned.updates {
            matched[ti] = true;
            let t = &mut self.tracks[ti];
            t.state = state;
            t.time_since_update = 0;
            t.hits += 1;
            if let Some(r) = &detections[dj].descriptor {
                t.gallery.append(r).expect("descriptor dimension validated");
            }
            if t.is_tentative() && t.hits >= self.cfg.n_init {
                t.status = TrackStatus::Confirmed;
            }
        }

        for (t, &hit) in self.tracks.iter_mut().zip(&matched) {
            if hit {
                continue;
            }
            if t.is_tentative() || t.time_since_update > self.cfg.max_age {
                t.status = TrackStatus::Deleted;
            }
        }

        let mut output: Vec<TrackOutput> = self
            .tracks
            .iter()
            .zip(&matched)
            .filter(|(t, &hit)| hit && t.is_confirmed())
            .map(|(t, _)| TrackOutput {
                track_id: t.id,
                bbox: t.state.bbox(),
            })
            .collect();
        output.sort_by_key(|o| o.track_id);

        self.tracks.retain(|t| t.status != TrackStatus::Deleted);

        let mut unmatched = planned.unmatched_detections;
        unmatched.sort_unstable();
        for dj in unmatched {
            let d = &detections[dj];
            let mut t = Track::new(self.next_id, self.kf.initiate(&d.bbox.to_xyah()), &self.cfg);
            self.next_id += 1;
            if let Some(r) = &d.descriptor {
                t.gallery.append(r).expect("descriptor dimension validated");
            }
            if t.hits >= self.cfg.n_init {
                t.status = TrackStatus::Confirmed;
            }
            self.tracks.push(t);
        }

        FrameOutput {
            frame_index,
            tracks: output,
        }
    }
}

struct Planned {
    updates: Vec<(usize, usize, StateDistribution)>,
    unmatched_detections: Vec<usize>,
}
