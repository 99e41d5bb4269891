//! Proposal-quality evaluation: IoU, recall-to-IoU curves, synthetic scenes
//! with known ground truth and a generation-time benchmark.

mod bench;
mod iou;
mod recall;
mod synth;

pub use bench::{bench, BenchReport};
pub use iou::{intersection_area, iou, iou_ratio};
pub use recall::{
    best_ious, iou_grid, matched_ious, recall_at, recall_curve, EvalError, RecallCurve,
};
pub use synth::{synth_scene, SynthError, SynthParams, SynthScene};
