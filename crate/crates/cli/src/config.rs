use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use relief_core::refine::{RefineConfig, RegressorSpec};
use relief_core::relief::Connectivity;
use relief_core::PipelineConfig;
use serde::{Deserialize, Serialize};

/// Everything a run needs. Loadable from one JSON file; command-line flags
/// override file values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    pub refine: RefineConfig,
    pub regressor: RegressorSpec,
    pub io: IoPaths,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoPaths {
    pub features: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    pub proposals: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub iou_grid: Option<String>,
    pub top_k: Option<usize>,
    pub repeats: Option<usize>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn dump(&self, path: &Path) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing config {}", path.display()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RegressorKind {
    Identity,
    Affine,
}

/// Pipeline and refinement flags shared by `generate` and `bench`.
#[derive(Debug, Args, Default)]
pub struct PipelineFlags {
    /// Number of feature levels.
    #[arg(long = "levels")]
    pub level_count: Option<usize>,
    /// Shrink ratio for local search.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Grow ratio for local search.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Grid connectivity, 4 or 8.
    #[arg(long, value_parser = ["4", "8"])]
    pub connectivity: Option<String>,
    #[arg(long)]
    pub no_local_search: bool,
    /// Drop clusters with fewer cells than this.
    #[arg(long)]
    pub min_cluster_cells: Option<usize>,
    /// Keep exact duplicate boxes.
    #[arg(long)]
    pub no_dedup: bool,
    /// Recursive refinement loops (0 disables refinement).
    #[arg(long)]
    pub loops: Option<usize>,
    /// Corner movement (px) below which a box stops refining.
    #[arg(long)]
    pub convergence_eps: Option<f64>,
    #[arg(long, value_enum)]
    pub regressor: Option<RegressorKind>,
    #[arg(long, allow_hyphen_values = true)]
    pub dx: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub dy: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub dw: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub dh: Option<f64>,
}

impl PipelineFlags {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let p = &mut cfg.pipeline;
        if let Some(v) = self.level_count {
            p.level_count = v;
        }
        if let Some(v) = self.alpha {
            p.alpha = v;
        }
        if let Some(v) = self.beta {
            p.beta = v;
        }
        if let Some(v) = &self.connectivity {
            p.connectivity = if v == "4" {
                Connectivity::Four
            } else {
                Connectivity::Eight
            };
        }
        if self.no_local_search {
            p.local_search = false;
        }
        if let Some(v) = self.min_cluster_cells {
            p.min_cluster_cells = v;
        }
        if self.no_dedup {
            p.dedup_exact = false;
        }
        if let Some(v) = self.loops {
            cfg.refine.loops = v;
        }
        if let Some(v) = self.convergence_eps {
            cfg.refine.convergence_eps = v;
        }

        let deltas_given =
            self.dx.is_some() || self.dy.is_some() || self.dw.is_some() || self.dh.is_some();
        let kind = match (self.regressor, cfg.regressor) {
            (Some(k), _) => k,
            (None, RegressorSpec::Affine { .. }) => RegressorKind::Affine,
            (None, RegressorSpec::Identity) if deltas_given => RegressorKind::Affine,
            (None, RegressorSpec::Identity) => RegressorKind::Identity,
        };
        cfg.regressor = match kind {
            RegressorKind::Identity => RegressorSpec::Identity,
            RegressorKind::Affine => {
                let (dx, dy, dw, dh) = match cfg.regressor {
                    RegressorSpec::Affine { dx, dy, dw, dh } => (dx, dy, dw, dh),
                    RegressorSpec::Identity => (0.0, 0.0, 0.0, 0.0),
                };
                RegressorSpec::Affine {
                    dx: self.dx.unwrap_or(dx),
                    dy: self.dy.unwrap_or(dy),
                    dw: self.dw.unwrap_or(dw),
                    dh: self.dh.unwrap_or(dh),
                }
            }
        };
    }
}
