use crate::geometry::BoxPx;

/// Overlap in pixels (inclusive corners).
pub fn intersection_area(a: &BoxPx, b: &BoxPx) -> u64 {
    let x0 = a.x0.max(b.x0);
    let y0 = a.y0.max(b.y0);
    let x1 = a.x1.min(b.x1);
    let y1 = a.y1.min(b.y1);
    if x0 > x1 || y0 > y1 {
        return 0;
    }
    (x1 - x0 + 1) as u64 * (y1 - y0 + 1) as u64
}

/// IoU as an exact `(intersection, union)` pixel-count pair.
pub fn iou_ratio(a: &BoxPx, b: &BoxPx) -> (u64, u64) {
    let inter = intersection_area(a, b);
    (inter, a.area() + b.area() - inter)
}

pub fn iou(a: &BoxPx, b: &BoxPx) -> f64 {
    let (inter, union) = iou_ratio(a, b);
    inter as f64 / union as f64
}
