//! Association costs: appearance galleries, the smallest-cosine-distance
//! metric, Mahalanobis and appearance gates, the weighted combined cost and
//! the IoU cost used by the fallback stage.

use nalgebra::{DMatrix, DMatrixView};

use crate::error::{Error, Result};
use crate::kalman::{KalmanFilter, MeasurementVector};
use crate::model::{iou, AppearanceDescriptor, Detection, TrackerConfig};
use crate::tracker::Track;

/// Cost assigned to inadmissible pairs before solving. Strictly larger than
/// any admissible combined cost under valid configurations.
pub const GATED_COST: f64 = 1e5;

/// Fixed-capacity FIFO of the most recent descriptors associated with a
/// track.
///
/// Stored as a ring over one contiguous row-major buffer so the whole
/// gallery can be multiplied against a batch of queries at once.
#[derive(Debug, Clone, PartialEq)]
pub struct Gallery {
    dim: usize,
    budget: usize,
    data: Vec<f64>,
    len: usize,
    /// Slot holding the oldest entry once full.
    head: usize,
}

impl Gallery {
    pub fn new(dim: usize, budget: usize) -> Self {
        assert!(budget >= 1, "gallery budget must be positive");
        Self {
            dim,
            budget,
            data: Vec::new(),
            len: 0,
            head: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Appends `r`, evicting the oldest entry when the budget is exceeded.
    pub fn append(&mut self, r: &AppearanceDescriptor) -> Result<()> {
        if r.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: r.dim(),
            });
        }
        if self.len < self.budget {
            self.data.extend_from_slice(r.as_slice());
            self.len += 1;
        } else {
            let start = self.head * self.dim;
            self.data[start..start + self.dim].copy_from_slice(r.as_slice());
            self.head = (self.head + 1) % self.budget;
        }
        Ok(())
    }

    /// Entries from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        let start = if self.len < self.budget { 0 } else { self.head };
        (0..self.len).map(move |k| {
            let slot = (start + k) % self.len;
            &self.data[slot * self.dim..(slot + 1) * self.dim]
        })
    }

    /// Storage-order view, one descriptor per column.
    fn columns(&self) -> DMatrixView<'_, f64> {
        DMatrixView::from_slice(&self.data, self.dim, self.len)
    }
}

/// Smallest cosine distance `1 - r·g` between `r` and any gallery entry.
pub fn cosine_gallery_distance(g: &Gallery, r: &AppearanceDescriptor) -> Result<f64> {
    if g.is_empty() {
        return Err(Error::EmptyGallery);
    }
    if r.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: r.dim(),
        });
    }
    let best = g
        .iter()
        .map(|e| e.iter().zip(r.as_slice()).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(1.0 - best)
}

/// Batched form of [`cosine_gallery_distance`] against every row of
/// `queries` (`M x dim`).
fn cosine_gallery_distances(g: &Gallery, queries: &DMatrix<f64>) -> Result<Vec<f64>> {
    if g.is_empty() {
        return Err(Error::EmptyGallery);
    }
    // M x len; a plain product so the blocked gemm kernel is used.
    let dots = queries * g.columns();
    Ok(dots
        .row_iter()
        .map(|r| 1.0 - r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect())
}

/// Weighted cost and joint gate for one track/detection pair.
pub fn combined_cost(mahalanobis: f64, cosine: f64, cfg: &TrackerConfig) -> (f64, bool) {
    let cost = cfg.lambda * mahalanobis + (1.0 - cfg.lambda) * cosine;
    let admissible = mahalanobis <= cfg.mahalanobis_threshold && cosine <= cfg.cosine_threshold;
    (cost, admissible)
}

/// Paired cost and admissibility matrices, tracks by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrices {
    pub cost: DMatrix<f64>,
    pub admissible: DMatrix<bool>,
}

impl CostMatrices {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            cost: DMatrix::zeros(rows, cols),
            admissible: DMatrix::from_element(rows, cols, false),
        }
    }

    /// Costs with every inadmissible entry replaced by [`GATED_COST`].
    pub fn gated_cost(&self) -> DMatrix<f64> {
        self.cost
            .zip_map(&self.admissible, |c, ok| if ok { c } else { GATED_COST })
    }
}

/// Combined motion/appearance costs between `tracks` and `detections`.
///
/// Inadmissible entries carry [`GATED_COST`]. Every detection needs a
/// descriptor and every track a non-empty gallery.
pub fn build_cost_matrices(
    kf: &KalmanFilter,
    tracks: &[&Track],
    detections: &[&Detection],
    cfg: &TrackerConfig,
) -> Result<CostMatrices> {
    let m = detections.len();
    let mut out = CostMatrices::empty(tracks.len(), m);
    if tracks.is_empty() || m == 0 {
        return Ok(out);
    }

    let mut queries = DMatrix::zeros(cfg.feature_dim, m);
    for (j, d) in detections.iter().enumerate() {
        let r = d.descriptor.as_ref().ok_or(Error::MissingDescriptor { index: j })?;
        if r.dim() != cfg.feature_dim {
            return Err(Error::DimensionMismatch {
                expected: cfg.feature_dim,
                found: r.dim(),
            });
        }
        queries.column_mut(j).copy_from_slice(r.as_slice());
    }
    let queries = queries.transpose();
    let measurements: Vec<MeasurementVector> = detections
        .iter()
        .map(|d| MeasurementVector::from(d.bbox.to_xyah().as_array()))
        .collect();

    for (i, track) in tracks.iter().enumerate() {
        let wrap = |e| Error::for_track(track.id, e);
        let motion = kf
            .project(&track.state)
            .squared_mahalanobis(&measurements)
            .map_err(wrap)?;
        let appearance = cosine_gallery_distances(&track.gallery, &queries).map_err(wrap)?;
        for j in 0..m {
            let (c, ok) = combined_cost(motion[j], appearance[j], cfg);
            out.cost[(i, j)] = if ok { c } else { GATED_COST };
            out.admissible[(i, j)] = ok;
        }
    }
    Ok(out)
}

/// `1 - IoU` between each track's predicted box and each detection;
/// admissible when the cost is at most `iou_max_cost`.
pub fn iou_cost_matrix(tracks: &[&Track], detections: &[&Detection], cfg: &TrackerConfig) -> CostMatrices {
    let mut out = CostMatrices::empty(tracks.len(), detections.len());
    for (i, t) in tracks.iter().enumerate() {
        let predicted = t.state.bbox();
        for (j, d) in detections.iter().enumerate() {
            let c = 1.0 - iou(&predicted, &d.bbox);
            out.cost[(i, j)] = c;
            out.admissible[(i, j)] = c <= cfg.iou_max_cost;
        }
    }
    out
}
