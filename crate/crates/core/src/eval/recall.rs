use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::iou::iou;
use crate::geometry::BoxPx;
use crate::tensor_io::{AnnotationRecord, AnnotationSet, ProposalSet};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("no proposals for image ids: {}", .0.join(", "))]
    MissingImages(Vec<String>),
    #[error("IoU thresholds must be ascending and inside [0, 1]")]
    BadThresholds,
    #[error("bad IoU grid {0:?}: expected lo:hi:step with 0 <= lo <= hi <= 1 and step > 0")]
    BadGrid(String),
}

/// Recall as a function of the IoU threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct RecallCurve {
    pub thresholds: Vec<f64>,
    pub recall: Vec<f64>,
}

impl RecallCurve {
    /// Builds the curve from the best IoU each ground-truth box reached.
    /// With no ground truth at all every recall is 1.
    pub fn from_best_ious(best: &[f64], thresholds: &[f64]) -> Self {
        let recall = thresholds
            .iter()
            .map(|&t| {
                if best.is_empty() {
                    1.0
                } else {
                    best.iter().filter(|&&v| v >= t).count() as f64 / best.len() as f64
                }
            })
            .collect();
        RecallCurve {
            thresholds: thresholds.to_vec(),
            recall,
        }
    }

    /// Recall at the first threshold within 1e-9 of `thr`.
    pub fn at(&self, thr: f64) -> Option<f64> {
        self.thresholds
            .iter()
            .position(|&t| (t - thr).abs() < 1e-9)
            .map(|i| self.recall[i])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iou_threshold,recall\n");
        for (t, r) in self.thresholds.iter().zip(&self.recall) {
            writeln!(out, "{t},{r}").unwrap();
        }
        out
    }
}

/// Best IoU reached by any proposal, per ground-truth box.
pub fn best_ious(gt: &[BoxPx], props: &[BoxPx]) -> Vec<f64> {
    gt.iter()
        .map(|g| props.iter().map(|p| iou(g, p)).fold(0.0, f64::max))
        .collect()
}

/// Fraction of `gt` matched by some proposal at IoU >= `thr`.
pub fn recall_at(gt: &[BoxPx], props: &[BoxPx], thr: f64) -> f64 {
    if gt.is_empty() {
        return 1.0;
    }
    let hit = gt
        .iter()
        .filter(|g| props.iter().any(|p| iou(g, p) >= thr))
        .count();
    hit as f64 / gt.len() as f64
}

/// Micro-averaged recall over every ground-truth box of the corpus. When
/// `top_k` is set, only the first `top_k` proposals of each image count.
pub fn recall_curve(
    corpus: &AnnotationSet,
    proposals: &[ProposalSet],
    thresholds: &[f64],
    top_k: Option<usize>,
) -> Result<RecallCurve, EvalError> {
    if thresholds.windows(2).any(|w| w[0] > w[1])
        || thresholds.iter().any(|t| !(0.0..=1.0).contains(t))
    {
        return Err(EvalError::BadThresholds);
    }
    let best = matched_ious(corpus, proposals, top_k, 1)?;
    Ok(RecallCurve::from_best_ious(&best, thresholds))
}

/// Best IoU for every ground-truth box of the corpus, in corpus order.
/// Images are split across up to `jobs` threads.
pub fn matched_ious(
    corpus: &AnnotationSet,
    proposals: &[ProposalSet],
    top_k: Option<usize>,
    jobs: usize,
) -> Result<Vec<f64>, EvalError> {
    let by_id: HashMap<&str, &ProposalSet> =
        proposals.iter().map(|p| (p.image_id.as_str(), p)).collect();
    let missing: Vec<String> = corpus
        .records
        .iter()
        .filter(|r| !by_id.contains_key(r.image_id.as_str()))
        .map(|r| r.image_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingImages(missing));
    }
    let per_image = |rec: &AnnotationRecord| {
        let props = &by_id[rec.image_id.as_str()].boxes;
        let k = top_k.unwrap_or(props.len()).min(props.len());
        best_ious(&rec.gt_boxes, &props[..k])
    };
    let records = &corpus.records;
    let jobs = jobs.clamp(1, records.len().max(1));
    if jobs == 1 {
        return Ok(records.iter().flat_map(per_image).collect());
    }
    let chunk = records.len().div_ceil(jobs);
    let parts: Vec<Vec<f64>> = std::thread::scope(|s| {
        let handles: Vec<_> = records
            .chunks(chunk)
            .map(|recs| s.spawn(|| recs.iter().flat_map(per_image).collect::<Vec<f64>>()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("eval worker panicked"))
            .collect()
    });
    Ok(parts.concat())
}

/// Expands `lo:hi:step` into an ascending grid that includes `hi` when it
/// falls on the grid.
pub fn iou_grid(spec: &str) -> Result<Vec<f64>, EvalError> {
    let bad = || EvalError::BadGrid(spec.to_string());
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad());
    };
    if !(0.0 <= lo && lo <= hi && hi <= 1.0 && step > 0.0) {
        return Err(bad());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    // Round to 1e-9 so 0.5 + 4 * 0.05 prints as 0.7.
    Ok((0..=n)
        .map(|i| ((lo + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}
