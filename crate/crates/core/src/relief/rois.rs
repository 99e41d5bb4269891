use thiserror::Error;

use super::clusters::Cluster;
use crate::geometry::{place_centered, round_half_up, BoxKind, BoxPx, GeometryMeta};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RoiError {
    #[error(
        "cluster at cells ({row_min},{col_min})..({row_max},{col_max}) maps outside the image"
    )]
    DegenerateBox {
        row_min: usize,
        col_min: usize,
        row_max: usize,
        col_max: usize,
    },
    #[error("cannot assemble a big RoI from an empty level")]
    EmptyLevel,
}

/// Pixel box covering the cluster's cell bounds, clipped to the image.
pub fn cluster_to_box(cluster: &Cluster, geom: &GeometryMeta) -> Result<BoxPx, RoiError> {
    let rect = geom.cell_span(
        cluster.row_min,
        cluster.col_min,
        cluster.row_max,
        cluster.col_max,
    );
    geom.clip(rect, BoxKind::Small)
        .ok_or(RoiError::DegenerateBox {
            row_min: cluster.row_min,
            col_min: cluster.col_min,
            row_max: cluster.row_max,
            col_max: cluster.col_max,
        })
}

/// Tight bounding rectangle of every small box of one level.
pub fn big_roi(small_boxes: &[BoxPx]) -> Result<BoxPx, RoiError> {
    let first = small_boxes.first().ok_or(RoiError::EmptyLevel)?;
    let mut out = first.with_kind(BoxKind::Big);
    for b in &small_boxes[1..] {
        out.x0 = out.x0.min(b.x0);
        out.y0 = out.y0.min(b.y0);
        out.x1 = out.x1.max(b.x1);
        out.y1 = out.y1.max(b.y1);
    }
    Ok(out)
}

/// Scaled `(width, height)` pairs in emission order:
/// `(bw, bh), (bw, ah), (aw, ah), (aw, bh)`.
pub fn scaled_dims(width: u32, height: u32, alpha: f64, beta: f64) -> [(i64, i64); 4] {
    let s = |len: u32, k: f64| round_half_up(len as f64 * k).max(1);
    let (w, h) = (width, height);
    [
        (s(w, beta), s(h, beta)),
        (s(w, beta), s(h, alpha)),
        (s(w, alpha), s(h, alpha)),
        (s(w, alpha), s(h, beta)),
    ]
}

/// The four center-anchored rescalings before clipping, as `[x0, y0, x1, y1]`.
pub fn scaled_rects(b: &BoxPx, alpha: f64, beta: f64) -> [[i64; 4]; 4] {
    let (cx, cy) = b.center();
    scaled_dims(b.width(), b.height(), alpha, beta).map(|(w, h)| {
        let (x0, x1) = place_centered(cx, w);
        let (y0, y1) = place_centered(cy, h);
        [x0, y0, x1, y1]
    })
}

/// Four rescaled copies of `b` sharing its center, clipped to the image.
/// The input box itself is not part of the result.
pub fn local_search(b: &BoxPx, alpha: f64, beta: f64, geom: &GeometryMeta) -> [BoxPx; 4] {
    scaled_rects(b, alpha, beta).map(|r| {
        // The center pixel of `b` lies inside the image and inside every
        // rescaled rect, so clipping never empties one.
        geom.clip(r, BoxKind::Scaled)
            .expect("scaled box keeps its center pixel")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cluster(cells: &[(usize, usize)]) -> Cluster {
        let mut c = Cluster {
            level: 1,
            cells: vec![cells[0]],
            row_min: cells[0].0,
            col_min: cells[0].1,
            row_max: cells[0].0,
            col_max: cells[0].1,
        };
        for &(r, col) in &cells[1..] {
            c.cells.push((r, col));
            c.row_min = c.row_min.min(r);
            c.col_min = c.col_min.min(col);
            c.row_max = c.row_max.max(r);
            c.col_max = c.col_max.max(col);
        }
        c
    }

    fn bx(x0: u32, y0: u32, x1: u32, y1: u32) -> BoxPx {
        BoxPx::new(x0, y0, x1, y1, BoxKind::Small)
    }

    #[test]
    fn unit_cell() {
        let g = GeometryMeta::uniform(4.0, 32, 32);
        let b = cluster_to_box(&cluster(&[(0, 0)]), &g).unwrap();
        assert_eq!(b.corners(), [0, 0, 3, 3]);
        assert_eq!(b.kind, BoxKind::Small);
    }

    #[test]
    fn block_rows_one_two_cols_one_three() {
        let g = GeometryMeta::uniform(4.0, 32, 32);
        let b = cluster_to_box(
            &cluster(&[(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3)]),
            &g,
        )
        .unwrap();
        // x: 4 .. 4*4-1, y: 4 .. 3*4-1
        assert_eq!(b.corners(), [4, 4, 15, 11]);
    }

    #[test]
    fn right_edge_clipped() {
        let g = GeometryMeta::uniform(4.0, 30, 32);
        let b = cluster_to_box(&cluster(&[(0, 7)]), &g).unwrap();
        assert_eq!(b.corners(), [28, 0, 29, 3]);
    }

    #[test]
    fn outside_is_degenerate() {
        let g = GeometryMeta {
            offset_x: 40.0,
            ..GeometryMeta::uniform(4.0, 32, 32)
        };
        assert!(matches!(
            cluster_to_box(&cluster(&[(0, 0)]), &g),
            Err(RoiError::DegenerateBox { .. })
        ));
    }

    #[test]
    fn big_roi_examples() {
        assert_eq!(
            big_roi(&[bx(0, 0, 3, 3)]).unwrap(),
            BoxPx::new(0, 0, 3, 3, BoxKind::Big)
        );
        assert_eq!(
            big_roi(&[bx(0, 0, 3, 3), bx(10, 10, 12, 12)])
                .unwrap()
                .corners(),
            [0, 0, 12, 12]
        );
        assert_eq!(
            big_roi(&[bx(2, 5, 6, 9), bx(0, 7, 3, 8)])
                .unwrap()
                .corners(),
            [0, 5, 6, 9]
        );
        assert_eq!(big_roi(&[]), Err(RoiError::EmptyLevel));
    }

    #[test]
    fn local_search_dimension_pairs() {
        // w=10, h=20 with 0.8 / 1.5
        assert_eq!(
            scaled_dims(10, 20, 0.8, 1.5),
            [(15, 30), (15, 16), (8, 16), (8, 30)]
        );
        let g = GeometryMeta::uniform(1.0, 200, 200);
        let out = local_search(&bx(50, 50, 59, 69), 0.8, 1.5, &g);
        let dims: Vec<_> = out.iter().map(|b| (b.width(), b.height())).collect();
        assert_eq!(dims, vec![(15, 30), (15, 16), (8, 16), (8, 30)]);
        assert!(out.iter().all(|b| b.kind == BoxKind::Scaled));
    }

    #[test]
    fn local_search_minimum_size() {
        let g = GeometryMeta::uniform(1.0, 10, 10);
        for b in local_search(&bx(4, 4, 4, 4), 0.999, 1.001, &g) {
            assert!(b.width() >= 1 && b.height() >= 1);
        }
        assert_eq!(scaled_dims(1, 1, 0.1, 1.2), [(1, 1); 4]);
    }

    #[test]
    fn local_search_at_corner_is_clipped() {
        let g = GeometryMeta::uniform(1.0, 20, 20);
        for b in local_search(&bx(0, 0, 5, 5), 0.8, 1.5, &g) {
            assert!(b.x1 < 20 && b.y1 < 20);
        }
        let out = local_search(&bx(0, 0, 5, 5), 0.8, 1.5, &g);
        assert_eq!((out[0].x0, out[0].y0), (0, 0));
    }
}
