//! Proposal generation from a single feature stack: integrate the channels,
//! split the integrated map into value levels, label connected clusters per
//! level, map them to pixel boxes and widen each with local search.

mod clusters;
mod integrate;
mod levels;
mod pipeline;
mod rois;

pub use clusters::{extract_clusters, label_all_levels, Cluster, Connectivity};
pub use integrate::{build_integrate_map, IntegrateMap};
pub use levels::{separate_levels, LevelPartition};
pub use pipeline::{generate_proposals, propose, ConfigError, PipelineConfig, Proposals};
pub use rois::{big_roi, cluster_to_box, local_search, scaled_dims, scaled_rects, RoiError};
