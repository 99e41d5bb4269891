//! Recursive fine-tuning: a box regressor run in a closed loop, its output
//! fed back as its next input.

use serde::{Deserialize, Serialize};

use crate::geometry::{place_centered, round_half_up, BoxKind, BoxPx, GeometryMeta};

/// Anything that maps a box to an adjusted box.
pub trait BoxRegressor {
    fn regress(&self, b: &BoxPx, geom: &GeometryMeta) -> BoxPx;
}

/// Built-in class-agnostic regressors.
///
/// `Affine` uses the usual R-CNN delta form: the center moves by
/// `(dx * w, dy * h)` and the size scales by `(exp(dw), exp(dh))`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RegressorSpec {
    #[default]
    Identity,
    Affine {
        #[serde(default)]
        dx: f64,
        #[serde(default)]
        dy: f64,
        #[serde(default)]
        dw: f64,
        #[serde(default)]
        dh: f64,
    },
}

impl BoxRegressor for RegressorSpec {
    fn regress(&self, b: &BoxPx, geom: &GeometryMeta) -> BoxPx {
        apply_regressor(self, b, geom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineConfig {
    pub loops: usize,
    /// A box stops iterating once no corner moves by this many pixels or more.
    pub convergence_eps: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            loops: 3,
            convergence_eps: 0.5,
        }
    }
}

pub fn apply_regressor(spec: &RegressorSpec, b: &BoxPx, geom: &GeometryMeta) -> BoxPx {
    match *spec {
        RegressorSpec::Identity => *b,
        RegressorSpec::Affine { dx, dy, dw, dh } => {
            let (w, h) = (b.width() as f64, b.height() as f64);
            let (cx, cy) = b.center();
            let new_w = round_half_up(w * dw.exp()).max(1);
            let new_h = round_half_up(h * dh.exp()).max(1);
            let (x0, x1) = place_centered(cx + dx * w, new_w);
            let (y0, y1) = place_centered(cy + dy * h, new_h);
            geom.clip([x0, y0, x1, y1], BoxKind::Refined)
                .unwrap_or_else(|| clamp_inside(x0, y0, x1, y1, geom))
        }
    }
}

/// A regressed box that left the image entirely collapses onto the nearest
/// border pixel instead of vanishing.
fn clamp_inside(x0: i64, y0: i64, x1: i64, y1: i64, geom: &GeometryMeta) -> BoxPx {
    let max_x = geom.image_w as i64 - 1;
    let max_y = geom.image_h as i64 - 1;
    let cx0 = x0.clamp(0, max_x);
    let cy0 = y0.clamp(0, max_y);
    let cx1 = x1.clamp(cx0, max_x);
    let cy1 = y1.clamp(cy0, max_y);
    BoxPx::new(
        cx0 as u32,
        cy0 as u32,
        cx1 as u32,
        cy1 as u32,
        BoxKind::Refined,
    )
}

fn max_corner_shift(a: &BoxPx, b: &BoxPx) -> f64 {
    a.corners()
        .iter()
        .zip(b.corners())
        .map(|(&p, q)| (p as f64 - q as f64).abs())
        .fold(0.0, f64::max)
}

/// Refines one box: at most `cfg.loops` regressor calls, stopping early once
/// every corner moves less than `cfg.convergence_eps`.
pub fn refine_box<R: BoxRegressor + ?Sized>(
    regressor: &R,
    b: &BoxPx,
    cfg: &RefineConfig,
    geom: &GeometryMeta,
) -> BoxPx {
    let mut cur = *b;
    for _ in 0..cfg.loops {
        let next = regressor.regress(&cur, geom);
        let shift = max_corner_shift(&cur, &next);
        cur = next;
        if shift < cfg.convergence_eps {
            break;
        }
    }
    if cur.same_rect(b) {
        *b
    } else {
        cur.with_kind(BoxKind::Refined)
    }
}

/// Refines every box independently. Never drops a box; order is preserved.
/// Boxes that end where they started keep their original kind.
pub fn recursive_refine<R: BoxRegressor + ?Sized>(
    regressor: &R,
    boxes: &[BoxPx],
    cfg: &RefineConfig,
    geom: &GeometryMeta,
) -> Vec<BoxPx> {
    boxes
        .iter()
        .map(|b| refine_box(regressor, b, cfg, geom))
        .collect()
}
