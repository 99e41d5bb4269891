//! Pixel-space boxes and the cell-to-pixel mapping.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Where a box came from in the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxKind {
    /// One connected cluster of same-level cells.
    Small,
    /// Union of all small boxes of one level.
    Big,
    /// A local-search rescaling of a small or big box.
    Scaled,
    /// Output of a box regressor.
    Refined,
    /// Annotated ground truth.
    Truth,
}

/// Axis-aligned rectangle in source-image pixels. Corners are inclusive, so a
/// box with `x0 == x1` is one pixel wide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxPx {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
    pub kind: BoxKind,
}

impl BoxPx {
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32, kind: BoxKind) -> Self {
        debug_assert!(x0 <= x1 && y0 <= y1, "inverted box");
        BoxPx {
            x0,
            y0,
            x1,
            y1,
            kind,
        }
    }

    pub fn width(&self) -> u32 {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0 + 1
    }

    /// Pixel count.
    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    /// Real-valued center `((x0 + x1) / 2, (y0 + y1) / 2)`.
    pub fn center(&self) -> (f64, f64) {
        (
            (self.x0 as f64 + self.x1 as f64) / 2.0,
            (self.y0 as f64 + self.y1 as f64) / 2.0,
        )
    }

    pub fn corners(&self) -> [u32; 4] {
        [self.x0, self.y0, self.x1, self.y1]
    }

    pub fn same_rect(&self, other: &BoxPx) -> bool {
        self.corners() == other.corners()
    }

    pub fn contains(&self, other: &BoxPx) -> bool {
        self.x0 <= other.x0 && self.y0 <= other.y0 && self.x1 >= other.x1 && self.y1 >= other.y1
    }

    pub fn with_kind(mut self, kind: BoxKind) -> Self {
        self.kind = kind;
        self
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("stride must be positive and finite (got {stride_x}, {stride_y})")]
    BadStride { stride_x: f64, stride_y: f64 },
    #[error("offset must be non-negative and finite (got {offset_x}, {offset_y})")]
    BadOffset { offset_x: f64, offset_y: f64 },
    #[error("image dimensions must be positive (got {image_w}x{image_h})")]
    EmptyImage { image_w: u32, image_h: u32 },
    #[error("a {cells_w}x{cells_h} cell grid overshoots the {image_w}x{image_h} image by more than one stride")]
    GridOvershoot {
        cells_w: usize,
        cells_h: usize,
        image_w: u32,
        image_h: u32,
    },
}

/// Maps feature cells to source-image pixels. Cell `(row, col)` covers the
/// pixel tile starting at `(offset_x + col * stride_x, offset_y + row * stride_y)`
/// with size `stride_x` by `stride_y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryMeta {
    pub stride_x: f64,
    pub stride_y: f64,
    pub offset_x: f64,
    pub offset_y: f64,
    pub image_w: u32,
    pub image_h: u32,
}

impl GeometryMeta {
    /// Square stride, zero offset.
    pub fn uniform(stride: f64, image_w: u32, image_h: u32) -> Self {
        GeometryMeta {
            stride_x: stride,
            stride_y: stride,
            offset_x: 0.0,
            offset_y: 0.0,
            image_w,
            image_h,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let ok_stride = |s: f64| s.is_finite() && s > 0.0;
        if !ok_stride(self.stride_x) || !ok_stride(self.stride_y) {
            return Err(GeometryError::BadStride {
                stride_x: self.stride_x,
                stride_y: self.stride_y,
            });
        }
        let ok_offset = |o: f64| o.is_finite() && o >= 0.0;
        if !ok_offset(self.offset_x) || !ok_offset(self.offset_y) {
            return Err(GeometryError::BadOffset {
                offset_x: self.offset_x,
                offset_y: self.offset_y,
            });
        }
        if self.image_w == 0 || self.image_h == 0 {
            return Err(GeometryError::EmptyImage {
                image_w: self.image_w,
                image_h: self.image_h,
            });
        }
        Ok(())
    }

    /// Checks that a grid of the given size does not run past the image by
    /// more than one stride in either direction.
    pub fn validate_grid(&self, cells_h: usize, cells_w: usize) -> Result<(), GeometryError> {
        self.validate()?;
        let reach_x = self.offset_x + self.stride_x * cells_w as f64;
        let reach_y = self.offset_y + self.stride_y * cells_h as f64;
        if reach_x > self.image_w as f64 + self.stride_x
            || reach_y > self.image_h as f64 + self.stride_y
        {
            return Err(GeometryError::GridOvershoot {
                cells_w,
                cells_h,
                image_w: self.image_w,
                image_h: self.image_h,
            });
        }
        Ok(())
    }

    /// Number of whole or partial cells that fit inside the image.
    pub fn grid_dims(&self) -> (usize, usize) {
        let rows = ((self.image_h as f64 - self.offset_y) / self.stride_y)
            .ceil()
            .max(0.0) as usize;
        let cols = ((self.image_w as f64 - self.offset_x) / self.stride_x)
            .ceil()
            .max(0.0) as usize;
        (rows, cols)
    }

    /// Pixel span `[start, end]` (inclusive, unclipped) of cell rows
    /// `row_min..=row_max` and columns `col_min..=col_max`.
    pub fn cell_span(
        &self,
        row_min: usize,
        col_min: usize,
        row_max: usize,
        col_max: usize,
    ) -> [i64; 4] {
        let x0 = (self.offset_x + col_min as f64 * self.stride_x).floor() as i64;
        let y0 = (self.offset_y + row_min as f64 * self.stride_y).floor() as i64;
        let x1 = (self.offset_x + (col_max + 1) as f64 * self.stride_x).ceil() as i64 - 1;
        let y1 = (self.offset_y + (row_max + 1) as f64 * self.stride_y).ceil() as i64 - 1;
        [x0, y0, x1, y1]
    }

    /// Clips an integer rectangle to the image. `None` when nothing is left.
    pub fn clip(&self, rect: [i64; 4], kind: BoxKind) -> Option<BoxPx> {
        let [x0, y0, x1, y1] = rect;
        let max_x = self.image_w as i64 - 1;
        let max_y = self.image_h as i64 - 1;
        let (cx0, cy0) = (x0.max(0), y0.max(0));
        let (cx1, cy1) = (x1.min(max_x), y1.min(max_y));
        if cx0 > cx1 || cy0 > cy1 {
            return None;
        }
        Some(BoxPx::new(
            cx0 as u32, cy0 as u32, cx1 as u32, cy1 as u32, kind,
        ))
    }
}

/// Rounds half-up (`2.5 -> 3`, `-2.5 -> -2`).
pub fn round_half_up(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

/// Integer span of `size` pixels whose real-valued center is as close as
/// possible to `center`. The returned center is within 0.5 px of the target.
pub fn place_centered(center: f64, size: i64) -> (i64, i64) {
    let size = size.max(1);
    let start = round_half_up(center - (size - 1) as f64 / 2.0);
    (start, start + size - 1)
}
