//! Online multi-object tracking by detection.
//!
//! Tracks are propagated with a constant-velocity Kalman filter in image
//! space and associated with new detections through a cascade of
//! assignment problems that combine a Mahalanobis motion gate with the
//! smallest cosine distance to each track's appearance gallery. Left-over
//! tentative and just-missed tracks get a final IoU association. The crate
//! also provides the MOT file formats, CLEAR-MOT evaluation and a few
//! diagnostics.

pub mod assignment;
pub mod association;
pub mod clearmot;
pub mod error;
pub mod gate_check;
pub mod kalman;
pub mod model;
pub mod mot_io;
pub mod render;
pub mod shapes;
pub mod tracker;

pub use assignment::{min_cost_matching, AssignmentResult};
pub use association::{Gallery, CostMatrices};
pub use error::{Error, Result};
pub use kalman::{KalmanFilter, StateDistribution};
pub use model::{AppearanceDescriptor, AssociationMode, BoundingBox, Detection, MeasurementXyah, TrackerConfig};
pub use tracker::{FrameOutput, Track, TrackOutput, TrackStatus, Tracker};
