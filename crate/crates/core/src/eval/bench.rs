use std::fmt::Write as _;
use std::time::Instant;

use crate::relief::{propose, ConfigError, PipelineConfig};
use crate::tensor_io::FeatureStack;

/// Per-image proposal count and generation time.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub images: usize,
    pub mean_proposals: f64,
    pub mean_gen_time_ns: f64,
    pub p50_ns: u64,
    pub p95_ns: u64,
}

impl BenchReport {
    pub const CSV_HEADER: &'static str = "images,mean_proposals,mean_time_ns,p50_ns,p95_ns";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        writeln!(
            out,
            "{},{},{},{},{}",
            self.images, self.mean_proposals, self.mean_gen_time_ns, self.p50_ns, self.p95_ns
        )
        .unwrap();
        out
    }
}

/// Nearest-rank percentile of sorted samples.
fn percentile(sorted: &[u64], p: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Times `repeats` runs per stack after one untimed warm-up run each.
/// Runs serially on the calling thread.
pub fn bench(
    stacks: &[FeatureStack],
    cfg: &PipelineConfig,
    repeats: usize,
) -> Result<BenchReport, ConfigError> {
    let repeats = repeats.max(1);
    let mut times = Vec::with_capacity(stacks.len() * repeats);
    let mut proposal_total = 0usize;
    for stack in stacks {
        proposal_total += propose(stack, cfg)?.boxes.len();
        for _ in 0..repeats {
            let start = Instant::now();
            let out = propose(stack, cfg)?;
            let ns = (start.elapsed().as_nanos() as u64).max(1);
            std::hint::black_box(out);
            times.push(ns);
        }
    }
    times.sort_unstable();
    let n = stacks.len().max(1) as f64;
    let mean_gen_time_ns = if times.is_empty() {
        0.0
    } else {
        times.iter().map(|&t| t as f64).sum::<f64>() / times.len() as f64
    };
    Ok(BenchReport {
        images: stacks.len(),
        mean_proposals: proposal_total as f64 / n,
        mean_gen_time_ns,
        p50_ns: percentile(&times, 50.0),
        p95_ns: percentile(&times, 95.0),
    })
}
