use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use relief_core::eval::{self, iou_grid, matched_ious, RecallCurve, SynthParams};
use relief_core::refine::{recursive_refine, RefineConfig, RegressorSpec};
use relief_core::tensor_io::{
    load_annotations, load_feature_stack, load_proposals, save_annotations, save_feature_stack,
    save_proposals, AnnotationRecord, AnnotationSet,
};
use relief_core::{generate_proposals, GeometryMeta, PipelineConfig, ProposalSet};

use crate::config::RunConfig;
use crate::{BenchArgs, Common, EvalArgs, GenerateArgs, SynthArgs};

const DEFAULT_GRID: &str = "0.5:1.0:0.05";

fn base_config(common: &Common) -> anyhow::Result<RunConfig> {
    match &common.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    }
}

fn finish_config(common: &Common, cfg: &RunConfig) -> anyhow::Result<()> {
    cfg.pipeline.validate()?;
    if let Some(path) = &common.dump_config {
        cfg.dump(path)?;
    }
    Ok(())
}

fn image_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn run_one(
    path: &Path,
    pipeline: &PipelineConfig,
    refine: &RefineConfig,
    regressor: &RegressorSpec,
) -> anyhow::Result<ProposalSet> {
    let stack = load_feature_stack(path).with_context(|| format!("loading {}", path.display()))?;
    let mut set = generate_proposals(&stack, pipeline)?;
    set.image_id = image_id(path);
    if refine.loops > 0 {
        set.boxes = recursive_refine(regressor, &set.boxes, refine, stack.geometry());
    }
    Ok(set)
}

pub fn generate(args: GenerateArgs) -> anyhow::Result<()> {
    let mut cfg = base_config(&args.common)?;
    args.pipeline.apply(&mut cfg);
    if !args.features.is_empty() {
        cfg.io.features = args.features.clone();
    }
    if args.out.is_some() {
        cfg.io.out = args.out.clone();
    }
    if args.jobs.is_some() {
        cfg.io.jobs = args.jobs;
    }
    finish_config(&args.common, &cfg)?;
    if cfg.io.features.is_empty() {
        bail!("--features is required");
    }
    let out = cfg.io.out.clone().context("--out is required")?;

    let start = Instant::now();
    let paths = &cfg.io.features;
    let jobs = cfg.io.jobs.unwrap_or(1).clamp(1, paths.len());
    let chunk = paths.len().div_ceil(jobs);
    let results: Vec<anyhow::Result<ProposalSet>> = std::thread::scope(|s| {
        let handles: Vec<_> = paths
            .chunks(chunk)
            .map(|part| {
                let cfg = &cfg;
                s.spawn(move || {
                    part.iter()
                        .map(|p| run_one(p, &cfg.pipeline, &cfg.refine, &cfg.regressor))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("generate worker panicked"))
            .collect()
    });
    let sets = results.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
    save_proposals(&sets, &out)?;

    let boxes: usize = sets.iter().map(|s| s.boxes.len()).sum();
    let gen_ms: f64 = sets.iter().map(|s| s.gen_time_ns as f64).sum::<f64>() / 1e6;
    log::info!(
        "wrote {} in {:.3} ms wall",
        out.display(),
        start.elapsed().as_secs_f64() * 1e3
    );
    println!(
        "{boxes} boxes for {} image(s), generation {gen_ms:.3} ms",
        sets.len()
    );
    Ok(())
}

pub fn eval(args: EvalArgs) -> anyhow::Result<()> {
    let mut cfg = base_config(&args.common)?;
    let io = &mut cfg.io;
    if args.proposals.is_some() {
        io.proposals = args.proposals.clone();
    }
    if args.annotations.is_some() {
        io.annotations = args.annotations.clone();
    }
    if args.iou_grid.is_some() {
        io.iou_grid = args.iou_grid.clone();
    }
    if args.top_k.is_some() {
        io.top_k = args.top_k;
    }
    if args.out.is_some() {
        io.out = args.out.clone();
    }
    if args.jobs.is_some() {
        io.jobs = args.jobs;
    }
    finish_config(&args.common, &cfg)?;
    let io = &cfg.io;
    let props_path = io.proposals.as_ref().context("--proposals is required")?;
    let ann_path = io
        .annotations
        .as_ref()
        .context("--annotations is required")?;
    let out = io.out.as_ref().context("--out is required")?;

    let proposals = load_proposals(props_path)?;
    let annotations = load_annotations(ann_path)?;
    let grid = iou_grid(io.iou_grid.as_deref().unwrap_or(DEFAULT_GRID))?;
    let best = matched_ious(&annotations, &proposals, io.top_k, io.jobs.unwrap_or(1))?;
    let curve = RecallCurve::from_best_ious(&best, &grid);
    fs::write(out, curve.to_csv()).with_context(|| format!("writing {}", out.display()))?;

    let headline = RecallCurve::from_best_ious(&best, &[0.5, 0.7]);
    println!(
        "recall@0.5={:.4} recall@0.7={:.4} ({} gt boxes)",
        headline.recall[0],
        headline.recall[1],
        best.len()
    );
    Ok(())
}

/// Expands directories into their `.rfm` files, sorted by name.
fn collect_stacks(inputs: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "rfm"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

pub fn bench(args: BenchArgs) -> anyhow::Result<()> {
    let mut cfg = base_config(&args.common)?;
    args.pipeline.apply(&mut cfg);
    if !args.features.is_empty() {
        cfg.io.features = args.features.clone();
    }
    if args.repeats.is_some() {
        cfg.io.repeats = args.repeats;
    }
    if args.out.is_some() {
        cfg.io.out = args.out.clone();
    }
    finish_config(&args.common, &cfg)?;
    let out = cfg.io.out.as_ref().context("--out is required")?;
    let paths = collect_stacks(&cfg.io.features)?;
    if paths.is_empty() {
        bail!("no feature stacks found");
    }
    let stacks = paths
        .iter()
        .map(|p| load_feature_stack(p).with_context(|| format!("loading {}", p.display())))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let report = eval::bench(&stacks, &cfg.pipeline, cfg.io.repeats.unwrap_or(5))?;
    fs::write(out, report.to_csv()).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "{} image(s): {:.1} proposals, mean {:.3} ms, p95 {:.3} ms",
        report.images,
        report.mean_proposals,
        report.mean_gen_time_ns / 1e6,
        report.p95_ns as f64 / 1e6
    );
    Ok(())
}

pub fn synth(args: SynthArgs) -> anyhow::Result<()> {
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let geom = GeometryMeta::uniform(args.stride, args.image_w, args.image_h);
    let mut annotations = AnnotationSet::default();
    for i in 0..args.count {
        let params = SynthParams {
            n_objects: args.objects,
            noise_sigma: args.noise,
            seed: args
                .seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(i as u64),
            channels: args.channels,
            min_blob_cells: args.min_blob,
            max_blob_cells: args.max_blob,
        };
        let scene = eval::synth_scene(&geom, &params).with_context(|| format!("scene {i}"))?;
        let id = format!("synth_{i:04}");
        save_feature_stack(&scene.stack, args.out.join(format!("{id}.rfm")))?;
        annotations.records.push(AnnotationRecord {
            image_id: id,
            gt_boxes: scene.gt_boxes,
        });
    }
    save_annotations(&annotations, args.out.join("annotations.jsonl"))?;
    println!(
        "{} image(s), {} objects in {}",
        args.count,
        annotations.total_boxes(),
        args.out.display()
    );
    Ok(())
}
