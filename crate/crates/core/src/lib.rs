//! Region proposals read directly off convolutional feature maps.
//!
//! The pipeline integrates a `C x H x W` activation stack into one map,
//! slices its value range into uniform levels, turns every connected cluster
//! of same-level cells into a pixel box, adds one bounding box per level and
//! four rescaled variants of each. An optional regressor loop refines the
//! result. [`eval`] measures proposal quality against ground truth.

pub mod eval;
pub mod geometry;
pub mod refine;
pub mod relief;
pub mod tensor_io;

pub use geometry::{BoxKind, BoxPx, GeometryMeta};
pub use relief::{generate_proposals, propose, PipelineConfig};
pub use tensor_io::{FeatureStack, ProposalSet};
