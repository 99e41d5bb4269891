//! Browser bindings for the proposal pipeline: synthesize a scene, look at
//! its feature levels, overlay proposals and plot recall against IoU.
//!
//! Boxes cross the boundary as flat `u32` arrays of
//! `[x0, y0, x1, y1, kind]` records, kind codes as in [`kind_code`].

use relief_core::eval::{best_ious, synth_scene, RecallCurve, SynthParams, SynthScene};
use relief_core::refine::{recursive_refine, RefineConfig, RegressorSpec};
use relief_core::relief::{build_integrate_map, separate_levels, Connectivity, IntegrateMap};
use relief_core::{propose, BoxKind, BoxPx, GeometryMeta, PipelineConfig};
use wasm_bindgen::prelude::*;

pub fn kind_code(kind: BoxKind) -> u32 {
    match kind {
        BoxKind::Small => 0,
        BoxKind::Big => 1,
        BoxKind::Scaled => 2,
        BoxKind::Refined => 3,
        BoxKind::Truth => 4,
    }
}

fn flatten(boxes: &[BoxPx]) -> Vec<u32> {
    boxes
        .iter()
        .flat_map(|b| [b.x0, b.y0, b.x1, b.y1, kind_code(b.kind)])
        .collect()
}

fn unflatten(flat: &[u32]) -> Vec<BoxPx> {
    flat.chunks_exact(5)
        .filter(|r| r[0] <= r[2] && r[1] <= r[3])
        .map(|r| BoxPx::new(r[0], r[1], r[2], r[3], BoxKind::Small))
        .collect()
}

/// Proposal knobs as set from the page.
#[wasm_bindgen]
#[derive(Debug, Clone, Copy)]
pub struct Knobs {
    pub levels: u32,
    pub alpha: f64,
    pub beta: f64,
    pub eight_connected: bool,
    pub local_search: bool,
    pub min_cluster_cells: u32,
}

#[wasm_bindgen]
impl Knobs {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Knobs {
        let d = PipelineConfig::default();
        Knobs {
            levels: d.level_count as u32,
            alpha: d.alpha,
            beta: d.beta,
            eight_connected: d.connectivity == Connectivity::Eight,
            local_search: d.local_search,
            min_cluster_cells: d.min_cluster_cells as u32,
        }
    }
}

impl Default for Knobs {
    fn default() -> Self {
        Knobs::new()
    }
}

impl Knobs {
    /// Out-of-range slider values are pulled back into the valid region.
    fn config(&self) -> PipelineConfig {
        PipelineConfig {
            level_count: self.levels.clamp(1, 64) as usize,
            alpha: self.alpha.clamp(0.05, 0.99),
            beta: self.beta.clamp(1.01, 4.0),
            connectivity: if self.eight_connected {
                Connectivity::Eight
            } else {
                Connectivity::Four
            },
            local_search: self.local_search,
            min_cluster_cells: self.min_cluster_cells.max(1) as usize,
            dedup_exact: true,
        }
    }
}

#[wasm_bindgen]
pub struct Scene {
    scene: SynthScene,
    map: IntegrateMap,
}

#[wasm_bindgen]
impl Scene {
    /// Planted-object scene on a `cols x rows` grid of `stride`-pixel cells.
    /// `None` when the objects do not fit.
    pub fn synth(
        seed: u32,
        objects: u32,
        noise: f64,
        cols: u32,
        rows: u32,
        stride: f64,
    ) -> Option<Scene> {
        let stride = stride.max(1.0);
        let geom = GeometryMeta::uniform(
            stride,
            (cols.clamp(2, 256) as f64 * stride) as u32,
            (rows.clamp(2, 256) as f64 * stride) as u32,
        );
        let params = SynthParams {
            n_objects: objects as usize,
            noise_sigma: noise.max(0.0),
            seed: seed as u64,
            ..Default::default()
        };
        let scene = synth_scene(&geom, &params).ok()?;
        let map = build_integrate_map(&scene.stack);
        Some(Scene { scene, map })
    }

    pub fn cols(&self) -> u32 {
        self.map.width as u32
    }

    pub fn rows(&self) -> u32 {
        self.map.height as u32
    }

    pub fn image_w(&self) -> u32 {
        self.scene.stack.geometry().image_w
    }

    pub fn image_h(&self) -> u32 {
        self.scene.stack.geometry().image_h
    }

    /// Row-major integrated map.
    pub fn integrate_map(&self) -> Vec<f32> {
        self.map.values.clone()
    }

    /// Row-major level index (1-based) of every cell.
    pub fn levels(&self, level_count: u32) -> Vec<u16> {
        separate_levels(&self.map, level_count.clamp(1, 64) as usize).level_of
    }

    pub fn ground_truth(&self) -> Vec<u32> {
        flatten(&self.scene.gt_boxes)
    }

    pub fn proposals(&self, knobs: &Knobs) -> Vec<u32> {
        flatten(&self.boxes(knobs))
    }

    /// Proposals after `loops` rounds of an affine regressor.
    pub fn refined(
        &self,
        knobs: &Knobs,
        dx: f64,
        dy: f64,
        dw: f64,
        dh: f64,
        loops: u32,
    ) -> Vec<u32> {
        let spec = RegressorSpec::Affine { dx, dy, dw, dh };
        let cfg = RefineConfig {
            loops: loops.min(10) as usize,
            ..Default::default()
        };
        flatten(&recursive_refine(
            &spec,
            &self.boxes(knobs),
            &cfg,
            self.scene.stack.geometry(),
        ))
    }

    /// Recall of a flat box array (as returned by `proposals` or `refined`)
    /// at IoU thresholds `0, 0.05, ..., 1`. `top_k == 0` means no cap.
    pub fn recall_curve(&self, flat: &[u32], top_k: u32) -> Vec<f64> {
        let boxes = unflatten(flat);
        let k = if top_k == 0 {
            boxes.len()
        } else {
            (top_k as usize).min(boxes.len())
        };
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        RecallCurve::from_best_ious(&best_ious(&self.scene.gt_boxes, &boxes[..k]), &grid).recall
    }
}

impl Scene {
    fn boxes(&self, knobs: &Knobs) -> Vec<BoxPx> {
        propose(&self.scene.stack, &knobs.config())
            .map(|p| p.boxes)
            .unwrap_or_default()
    }
}
