use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geometry::{BoxKind, BoxPx, GeometryMeta};
use crate::tensor_io::{FeatureStack, TensorIoError};

const PLACEMENT_TRIES: usize = 1000;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("could not place object {placed} of {requested} after {PLACEMENT_TRIES} tries")]
    PlacementFailed { placed: usize, requested: usize },
    #[error("blob size range {min}..={max} does not fit a {rows}x{cols} cell grid")]
    BlobTooLarge {
        min: usize,
        max: usize,
        rows: usize,
        cols: usize,
    },
    #[error("noise_sigma must be finite and non-negative, got {0}")]
    BadNoise(f64),
    #[error(transparent)]
    Stack(#[from] TensorIoError),
}

/// Scene parameters. Blob sides are drawn uniformly from
/// `min_blob_cells..=max_blob_cells` (in cells).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub n_objects: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub channels: usize,
    pub min_blob_cells: usize,
    pub max_blob_cells: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_objects: 3,
            noise_sigma: 0.0,
            seed: 0,
            channels: 8,
            min_blob_cells: 2,
            max_blob_cells: 5,
        }
    }
}

/// A feature stack with planted rectangular objects and their pixel boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthScene {
    pub stack: FeatureStack,
    pub gt_boxes: Vec<BoxPx>,
    /// Planted blobs in cells: `(row_min, col_min, row_max, col_max)`.
    pub blobs: Vec<(usize, usize, usize, usize)>,
    pub noise_sigma: f64,
    pub seed: u64,
}

/// Plants `n_objects` blobs of activation 1.0 on a zero background in every
/// channel, then adds Gaussian noise. Blobs never touch, not even
/// diagonally, so each one stays its own connected region.
pub fn synth_scene(geom: &GeometryMeta, params: &SynthParams) -> Result<SynthScene, SynthError> {
    geom.validate().map_err(TensorIoError::from)?;
    if !(params.noise_sigma.is_finite() && params.noise_sigma >= 0.0) {
        return Err(SynthError::BadNoise(params.noise_sigma));
    }
    let (rows, cols) = geom.grid_dims();
    let (min_b, max_b) = (params.min_blob_cells.max(1), params.max_blob_cells);
    if params.n_objects > 0 && (min_b > max_b || min_b > rows || min_b > cols) {
        return Err(SynthError::BlobTooLarge {
            min: min_b,
            max: max_b,
            rows,
            cols,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut blobs: Vec<(usize, usize, usize, usize)> = Vec::with_capacity(params.n_objects);
    for placed in 0..params.n_objects {
        let mut ok = false;
        for _ in 0..PLACEMENT_TRIES {
            let bh = rng.random_range(min_b..=max_b.min(rows));
            let bw = rng.random_range(min_b..=max_b.min(cols));
            let r0 = rng.random_range(0..=rows - bh);
            let c0 = rng.random_range(0..=cols - bw);
            let cand = (r0, c0, r0 + bh - 1, c0 + bw - 1);
            // One free cell all around: bounding boxes expanded by one must not meet.
            let clear = blobs.iter().all(|&(a0, b0, a1, b1)| {
                cand.2 + 1 < a0 || a1 + 1 < cand.0 || cand.3 + 1 < b0 || b1 + 1 < cand.1
            });
            if clear {
                blobs.push(cand);
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(SynthError::PlacementFailed {
                placed,
                requested: params.n_objects,
            });
        }
    }

    let channels = params.channels.max(1);
    let plane = rows * cols;
    let mut values = vec![0f32; channels * plane];
    for &(r0, c0, r1, c1) in &blobs {
        for ch in 0..channels {
            for r in r0..=r1 {
                for c in c0..=c1 {
                    values[ch * plane + r * cols + c] = 1.0;
                }
            }
        }
    }
    if params.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, params.noise_sigma).expect("sigma validated above");
        for v in &mut values {
            *v += normal.sample(&mut rng) as f32;
        }
    }

    let gt_boxes = blobs
        .iter()
        .map(|&(r0, c0, r1, c1)| {
            geom.clip(geom.cell_span(r0, c0, r1, c1), BoxKind::Truth)
                .expect("blob cells lie inside the grid")
        })
        .collect();
    let stack = FeatureStack::new(channels, rows, cols, values, *geom)?;
    Ok(SynthScene {
        stack,
        gt_boxes,
        blobs,
        noise_sigma: params.noise_sigma,
        seed: params.seed,
    })
}
