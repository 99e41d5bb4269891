use super::integrate::IntegrateMap;

/// Assignment of every integrate-map cell to one of `level_count` uniform
/// value bins. Levels are 1-based.
///
/// Bin `i` is `[min + (i-1)*stride, min + i*stride)`; the last bin is closed
/// at `value_max` so that every cell lands somewhere. A constant map has
/// `stride == 0` and puts every cell in level 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPartition {
    pub level_count: usize,
    pub stride: f64,
    pub value_min: f64,
    pub value_max: f64,
    pub height: usize,
    pub width: usize,
    pub level_of: Vec<u16>,
}

impl LevelPartition {
    pub fn level_at(&self, row: usize, col: usize) -> usize {
        self.level_of[row * self.width + col] as usize
    }

    /// Lower edge of level `i`.
    pub fn lower_edge(&self, level: usize) -> f64 {
        self.value_min + (level - 1) as f64 * self.stride
    }

    /// Cell count per level, indexed `0..level_count` for levels `1..=level_count`.
    pub fn histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.level_count];
        for &l in &self.level_of {
            h[l as usize - 1] += 1;
        }
        h
    }
}

/// Splits the map into `level_count` bins of equal value width.
///
/// # Panics
/// If `level_count` is zero or exceeds `u16::MAX`.
pub fn separate_levels(map: &IntegrateMap, level_count: usize) -> LevelPartition {
    assert!(
        level_count >= 1 && level_count <= u16::MAX as usize,
        "level_count out of range"
    );
    let (lo, hi) = map.range();
    let (value_min, value_max) = (lo as f64, hi as f64);
    let stride = (value_max - value_min) / level_count as f64;
    let l = level_count as i64;

    let level_of = map
        .values
        .iter()
        .map(|&v| {
            if stride == 0.0 {
                return 1;
            }
            let v = v as f64;
            // Division gives the bin up to rounding; the edges themselves are
            // defined as `min + i * stride`, so nudge the guess against those.
            let mut i = (((v - value_min) / stride).floor() as i64 + 1).clamp(1, l);
            while i > 1 && v < value_min + (i - 1) as f64 * stride {
                i -= 1;
            }
            while i < l && v >= value_min + i as f64 * stride {
                i += 1;
            }
            i as u16
        })
        .collect();

    LevelPartition {
        level_count,
        stride,
        value_min,
        value_max,
        height: map.height,
        width: map.width,
        level_of,
    }
}
