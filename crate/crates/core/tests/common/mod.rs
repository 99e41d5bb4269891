//! Brute-force reference implementations, kept independent of the library
//! code paths they check.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

/// Level of `v` by scanning bin edges `min + i * stride` from the bottom.
pub fn bin_scan(v: f64, min: f64, max: f64, l: usize) -> usize {
    if max == min {
        return 1;
    }
    let stride = (max - min) / l as f64;
    for i in 1..=l {
        let lo = min + (i - 1) as f64 * stride;
        let hi = min + i as f64 * stride;
        if v >= lo && v < hi {
            return i;
        }
    }
    l
}

/// BFS flood fill over a boolean mask. Components come back sorted by
/// `(row_min, col_min, first cell)` with cells in raster order.
pub fn flood_fill(mask: &[bool], h: usize, w: usize, eight: bool) -> Vec<Vec<(usize, usize)>> {
    let mut seen = vec![false; h * w];
    let mut comps = Vec::new();
    for start in 0..h * w {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([(start / w, start % w)]);
        let mut cells = BTreeSet::new();
        while let Some((r, c)) = queue.pop_front() {
            cells.insert((r, c));
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    if (dr == 0 && dc == 0) || (!eight && dr != 0 && dc != 0) {
                        continue;
                    }
                    let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                    if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                        continue;
                    }
                    let k = nr as usize * w + nc as usize;
                    if mask[k] && !seen[k] {
                        seen[k] = true;
                        queue.push_back((nr as usize, nc as usize));
                    }
                }
            }
        }
        comps.push(cells.into_iter().collect::<Vec<_>>());
    }
    comps.sort_by_key(|cells: &Vec<(usize, usize)>| {
        let rmin = cells.iter().map(|p| p.0).min().unwrap();
        let cmin = cells.iter().map(|p| p.1).min().unwrap();
        (rmin, cmin, cells[0])
    });
    comps
}

/// IoU by counting pixels one at a time. Returns `(intersection, union)`.
pub fn pixel_iou(a: [u32; 4], b: [u32; 4]) -> (u64, u64) {
    let inside =
        |bx: [u32; 4], x: u32, y: u32| x >= bx[0] && x <= bx[2] && y >= bx[1] && y <= bx[3];
    let (mut inter, mut union) = (0, 0);
    let xmax = a[2].max(b[2]);
    let ymax = a[3].max(b[3]);
    for y in 0..=ymax {
        for x in 0..=xmax {
            let (ia, ib) = (inside(a, x, y), inside(b, x, y));
            inter += (ia && ib) as u64;
            union += (ia || ib) as u64;
        }
    }
    (inter, union)
}

/// Recall at `thr` recomputed from raw annotation and proposal JSON lines.
pub fn recall_from_json(annotations: &str, proposals: &str, thr: f64) -> f64 {
    use std::collections::HashMap;
    let mut props: HashMap<String, Vec<[u32; 4]>> = HashMap::new();
    for line in proposals.lines().filter(|l| !l.trim().is_empty()) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let boxes = v["boxes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|b| {
                let g = |k: &str| b[k].as_u64().unwrap() as u32;
                [g("x0"), g("y0"), g("x1"), g("y1")]
            })
            .collect();
        props.insert(v["image_id"].as_str().unwrap().to_string(), boxes);
    }
    let (mut hit, mut total) = (0usize, 0usize);
    for line in annotations.lines().filter(|l| !l.trim().is_empty()) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let id = v["image_id"].as_str().unwrap();
        for g in v["gt_boxes"].as_array().unwrap() {
            let gt: Vec<u32> = g
                .as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_u64().unwrap() as u32)
                .collect();
            let gt = [gt[0], gt[1], gt[2], gt[3]];
            total += 1;
            let matched = props[id].iter().any(|p| {
                let (i, u) = pixel_iou_fast(gt, *p);
                i as f64 / u as f64 >= thr
            });
            hit += matched as usize;
        }
    }
    if total == 0 {
        1.0
    } else {
        hit as f64 / total as f64
    }
}

/// Interval-overlap IoU written out longhand (used where pixel scans are too slow).
fn pixel_iou_fast(a: [u32; 4], b: [u32; 4]) -> (u64, u64) {
    let overlap = |lo1: u32, hi1: u32, lo2: u32, hi2: u32| -> u64 {
        let lo = lo1.max(lo2) as i64;
        let hi = hi1.min(hi2) as i64;
        (hi - lo + 1).max(0) as u64
    };
    let inter = overlap(a[0], a[2], b[0], b[2]) * overlap(a[1], a[3], b[1], b[3]);
    let area = |x: [u32; 4]| (x[2] - x[0] + 1) as u64 * (x[3] - x[1] + 1) as u64;
    (inter, area(a) + area(b) - inter)
}
