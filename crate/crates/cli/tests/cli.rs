use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn relief(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relief"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn relief")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = relief(dir, args);
    assert!(
        out.status.success(),
        "relief {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn corpus(dir: &Path) -> Vec<String> {
    ok(
        dir,
        &[
            "synth", "--out", "corpus", "--count", "3", "--seed", "7", "--noise", "0.05",
        ],
    );
    (0..3).map(|i| format!("corpus/synth_{i:04}.rfm")).collect()
}

/// Proposal lines with the timing field removed.
fn untimed(path: PathBuf) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let mut v: Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("gen_time_ns");
            v
        })
        .collect()
}

fn kinds(lines: &[Value]) -> Vec<String> {
    lines
        .iter()
        .flat_map(|l| l["boxes"].as_array().unwrap().iter())
        .map(|b| b["kind"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn generate_defaults_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let feats = corpus(d);
    let stdout = ok(
        d,
        &["generate", "--features", &feats[0], "--out", "p.jsonl"],
    );
    assert!(stdout.contains("boxes"), "{stdout}");
    let lines = untimed(d.join("p.jsonl"));
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["image_id"], "synth_0000");
    let k = kinds(&lines);
    assert!(k.iter().filter(|k| *k == "big").count() <= 10);
    assert!(k.contains(&"small".to_string()) && k.contains(&"scaled".to_string()));

    ok(
        d,
        &[
            "generate",
            "--features",
            &feats[0],
            "--out",
            "n.jsonl",
            "--no-local-search",
        ],
    );
    assert!(!kinds(&untimed(d.join("n.jsonl"))).contains(&"scaled".to_string()));
}

#[test]
fn identity_refinement_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let feats = corpus(d);
    let mut a = vec![
        "generate",
        "--out",
        "a.jsonl",
        "--loops",
        "3",
        "--regressor",
        "identity",
        "--features",
    ];
    a.extend(feats.iter().map(String::as_str));
    ok(d, &a);
    let mut b = vec![
        "generate",
        "--out",
        "b.jsonl",
        "--loops",
        "0",
        "--jobs",
        "2",
        "--features",
    ];
    b.extend(feats.iter().map(String::as_str));
    ok(d, &b);
    assert_eq!(untimed(d.join("a.jsonl")), untimed(d.join("b.jsonl")));

    ok(
        d,
        &[
            "generate",
            "--features",
            &feats[0],
            "--out",
            "r.jsonl",
            "--loops",
            "2",
            "--dw",
            "-0.3",
        ],
    );
    assert!(kinds(&untimed(d.join("r.jsonl"))).contains(&"refined".to_string()));
}

#[test]
fn eval_perfect_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("gt.jsonl"),
        "{\"image_id\":\"a\",\"gt_boxes\":[[0,0,9,9],[20,20,40,30]]}\n{\"image_id\":\"b\",\"gt_boxes\":[]}\n",
    )
    .unwrap();
    fs::write(
        d.join("p.jsonl"),
        concat!(
            "{\"image_id\":\"a\",\"gen_time_ns\":1,\"boxes\":[{\"x0\":0,\"y0\":0,\"x1\":9,\"y1\":9,\"kind\":\"small\"},",
            "{\"x0\":20,\"y0\":20,\"x1\":40,\"y1\":30,\"kind\":\"big\"}]}\n",
            "{\"image_id\":\"b\",\"gen_time_ns\":1,\"boxes\":[]}\n"
        ),
    )
    .unwrap();
    let stdout = ok(
        d,
        &[
            "eval",
            "--proposals",
            "p.jsonl",
            "--annotations",
            "gt.jsonl",
            "--out",
            "c.csv",
        ],
    );
    assert!(
        stdout.contains("recall@0.5=1.0000") && stdout.contains("recall@0.7=1.0000"),
        "{stdout}"
    );
    let csv = fs::read_to_string(d.join("c.csv")).unwrap();
    let mut rows = csv.lines();
    assert_eq!(rows.next(), Some("iou_threshold,recall"));
    let rows: Vec<&str> = rows.collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.ends_with(",1")));

    ok(
        d,
        &[
            "eval",
            "--proposals",
            "p.jsonl",
            "--annotations",
            "gt.jsonl",
            "--out",
            "g.csv",
            "--iou-grid",
            "0.5:1.0:0.25",
            "--top-k",
            "1",
            "--jobs",
            "2",
        ],
    );
    assert_eq!(
        fs::read_to_string(d.join("g.csv")).unwrap(),
        "iou_threshold,recall\n0.5,0.5\n0.75,0.5\n1,0.5\n"
    );
}

#[test]
fn eval_reports_missing_ids() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("gt.jsonl"),
        "{\"image_id\":\"a\",\"gt_boxes\":[]}\n{\"image_id\":\"zz\",\"gt_boxes\":[]}\n",
    )
    .unwrap();
    fs::write(
        d.join("p.jsonl"),
        "{\"image_id\":\"a\",\"gen_time_ns\":1,\"boxes\":[]}\n",
    )
    .unwrap();
    let out = relief(
        d,
        &[
            "eval",
            "--proposals",
            "p.jsonl",
            "--annotations",
            "gt.jsonl",
            "--out",
            "c.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zz"));
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for out in ["one", "two"] {
        ok(
            d,
            &[
                "synth", "--out", out, "--count", "3", "--seed", "7", "--noise", "0.1",
            ],
        );
    }
    let mut names: Vec<_> = fs::read_dir(d.join("one"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for n in names {
        assert_eq!(
            fs::read(d.join("one").join(&n)).unwrap(),
            fs::read(d.join("two").join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

#[test]
fn bench_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d);
    ok(
        d,
        &[
            "bench",
            "--features",
            "corpus",
            "--repeats",
            "2",
            "--out",
            "b.csv",
        ],
    );
    let csv = fs::read_to_string(d.join("b.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "images,mean_proposals,mean_time_ns,p50_ns,p95_ns");
    assert_eq!(lines.len(), 2);
    let f: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(f[0], 3.0);
    assert!(f[3] <= f[4]);
}

#[test]
fn dumped_config_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let feats = corpus(d);
    ok(
        d,
        &[
            "generate",
            "--features",
            &feats[1],
            "--out",
            "a.jsonl",
            "--levels",
            "6",
            "--connectivity",
            "4",
            "--alpha",
            "0.7",
            "--dx",
            "0.05",
            "--dump-config",
            "run.json",
        ],
    );
    ok(d, &["generate", "--config", "run.json"]);
    // Same out path in the config, so re-run into a copy.
    let first = untimed(d.join("a.jsonl"));
    ok(d, &["generate", "--config", "run.json", "--out", "b.jsonl"]);
    assert_eq!(first, untimed(d.join("b.jsonl")));
    let cfg: Value =
        serde_json::from_str(&fs::read_to_string(d.join("run.json")).unwrap()).unwrap();
    assert_eq!(cfg["pipeline"]["level_count"], 6);
    assert_eq!(cfg["regressor"]["kind"], "affine");
}

#[test]
fn bad_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.json"), "{\"pipeline\":{\"levelz\":3}}").unwrap();
    let out = relief(
        d,
        &[
            "generate",
            "--config",
            "bad.json",
            "--features",
            "x.rfm",
            "--out",
            "p.jsonl",
        ],
    );
    assert_eq!(out.status.code(), Some(1));

    let out = relief(
        d,
        &["generate", "--features", "missing.rfm", "--out", "p.jsonl"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!d.join("p.jsonl").exists());

    fs::write(d.join("junk.rfm"), b"NOPE0000").unwrap();
    let out = relief(
        d,
        &["generate", "--features", "junk.rfm", "--out", "p.jsonl"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("magic"));

    let feats = corpus(d);
    let out = relief(
        d,
        &[
            "generate",
            "--features",
            &feats[0],
            "--out",
            "p.jsonl",
            "--alpha",
            "1.3",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}
