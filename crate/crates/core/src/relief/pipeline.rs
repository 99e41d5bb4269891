use std::collections::HashSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::clusters::{label_all_levels, Connectivity};
use super::integrate::build_integrate_map;
use super::levels::separate_levels;
use super::rois::{big_roi, cluster_to_box, local_search};
use crate::geometry::BoxPx;
use crate::tensor_io::{FeatureStack, ProposalSet};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("need 0 < alpha < 1 < beta, got alpha={alpha}, beta={beta}")]
    BadRatios { alpha: f64, beta: f64 },
    #[error("level_count must be in 1..=65535, got {0}")]
    BadLevelCount(usize),
    #[error("min_cluster_cells must be at least 1")]
    BadMinCluster,
}

/// Knobs for proposal generation. Defaults are ten levels, `alpha = 0.8`,
/// `beta = 1.5`, 8-connectivity, local search and exact dedup on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub level_count: usize,
    pub alpha: f64,
    pub beta: f64,
    pub connectivity: Connectivity,
    pub local_search: bool,
    pub min_cluster_cells: usize,
    pub dedup_exact: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            level_count: 10,
            alpha: 0.8,
            beta: 1.5,
            connectivity: Connectivity::Eight,
            local_search: true,
            min_cluster_cells: 1,
            dedup_exact: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0 && self.beta > 1.0 && self.beta.is_finite()) {
            return Err(ConfigError::BadRatios {
                alpha: self.alpha,
                beta: self.beta,
            });
        }
        if self.level_count == 0 || self.level_count > u16::MAX as usize {
            return Err(ConfigError::BadLevelCount(self.level_count));
        }
        if self.min_cluster_cells == 0 {
            return Err(ConfigError::BadMinCluster);
        }
        Ok(())
    }
}

/// Untimed pipeline output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Proposals {
    pub boxes: Vec<BoxPx>,
    /// Clusters that mapped entirely outside the image.
    pub skipped_degenerate: usize,
    pub big_boxes: usize,
}

/// Runs the whole proposal pipeline on one stack without timing it.
///
/// Boxes come out grouped by level ascending. Within a level every small box
/// is followed by its four scaled variants, then the level's big box and its
/// variants. With `dedup_exact` a box whose corners repeat an earlier box is
/// dropped.
pub fn propose(stack: &FeatureStack, cfg: &PipelineConfig) -> Result<Proposals, ConfigError> {
    cfg.validate()?;
    let geom = stack.geometry();
    let map = build_integrate_map(stack);
    let part = separate_levels(&map, cfg.level_count);
    let levels = label_all_levels(&part, cfg.connectivity);

    let mut out = Proposals::default();
    let mut seen: HashSet<[u32; 4]> = HashSet::new();
    let mut emit = |b: BoxPx, boxes: &mut Vec<BoxPx>| {
        if !cfg.dedup_exact || seen.insert(b.corners()) {
            boxes.push(b);
        }
    };

    for clusters in levels {
        let mut smalls = Vec::new();
        for cl in clusters.iter().filter(|c| c.len() >= cfg.min_cluster_cells) {
            match cluster_to_box(cl, geom) {
                Ok(b) => smalls.push(b),
                Err(_) => out.skipped_degenerate += 1,
            }
        }
        let Ok(big) = big_roi(&smalls) else {
            continue;
        };
        out.big_boxes += 1;
        for b in smalls.iter().chain(std::iter::once(&big)) {
            emit(*b, &mut out.boxes);
            if cfg.local_search {
                for s in local_search(b, cfg.alpha, cfg.beta, geom) {
                    emit(s, &mut out.boxes);
                }
            }
        }
    }
    if out.skipped_degenerate > 0 {
        log::debug!(
            "skipped {} clusters outside the image",
            out.skipped_degenerate
        );
    }
    Ok(out)
}

/// Timed wrapper around [`propose`]. The returned set has an empty
/// `image_id`; callers fill it in.
pub fn generate_proposals(
    stack: &FeatureStack,
    cfg: &PipelineConfig,
) -> Result<ProposalSet, ConfigError> {
    let start = Instant::now();
    let props = propose(stack, cfg)?;
    let gen_time_ns = start.elapsed().as_nanos() as u64;
    Ok(ProposalSet {
        image_id: String::new(),
        gen_time_ns,
        boxes: props.boxes,
    })
}
