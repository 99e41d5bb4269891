use crate::tensor_io::FeatureStack;

/// Single `H x W` map: every channel divided by its own maximum, then summed.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateMap {
    pub height: usize,
    pub width: usize,
    pub values: Vec<f32>,
}

impl IntegrateMap {
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.values[row * self.width + col]
    }

    /// `(min, max)` over all cells.
    pub fn range(&self) -> (f32, f32) {
        self.values
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Channels whose maximum is exactly zero contribute nothing.
pub fn build_integrate_map(stack: &FeatureStack) -> IntegrateMap {
    let plane = stack.height() * stack.width();
    let mut acc = vec![0f64; plane];
    for ch in 0..stack.channels() {
        let data = stack.channel(ch);
        let max = data.iter().copied().fold(f32::NEG_INFINITY, f32::max);
        if max == 0.0 {
            continue;
        }
        let max = max as f64;
        for (a, &v) in acc.iter_mut().zip(data) {
            *a += v as f64 / max;
        }
    }
    IntegrateMap {
        height: stack.height(),
        width: stack.width(),
        values: acc.into_iter().map(|v| v as f32).collect(),
    }
}
