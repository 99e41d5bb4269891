//! Feature stacks, annotations and proposal sets on disk.
//!
//! Feature stacks use the RFM1 layout (all little-endian):
//!
//! ```text
//! b"RFM1" | C: u32 | H: u32 | W: u32 | C*H*W x f32 (channel-major, row-major)
//! ```
//!
//! Geometry lives next to the tensor in `<path>.geom.json`. Annotations and
//! proposals are JSON lines, one image per line.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{BoxKind, BoxPx, GeometryError, GeometryMeta};

pub const RFM1_MAGIC: [u8; 4] = *b"RFM1";
pub const RFM1_HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum TensorIoError {
    #[error("bad magic {found:?}, expected \"RFM1\"")]
    BadMagic { found: [u8; 4] },
    #[error("truncated file: need at least {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("payload holds {actual} bytes but the header declares {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("zero-sized dimension in header ({channels}x{height}x{width})")]
    ZeroDimension {
        channels: u32,
        height: u32,
        width: u32,
    },
    #[error("non-finite value {value} at flat index {index}")]
    NonFinite { index: usize, value: f32 },
    #[error("missing geometry sidecar {0}")]
    MissingSidecar(PathBuf),
    #[error("invalid geometry sidecar {path}: {reason}")]
    BadSidecar { path: PathBuf, reason: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("failed to read {path}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to write {path}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    BadLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

type Result<T> = std::result::Result<T, TensorIoError>;

/// A `C x H x W` activation tensor plus the geometry tying cells to pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStack {
    channels: usize,
    height: usize,
    width: usize,
    values: Vec<f32>,
    geometry: GeometryMeta,
}

impl FeatureStack {
    pub fn new(
        channels: usize,
        height: usize,
        width: usize,
        values: Vec<f32>,
        geometry: GeometryMeta,
    ) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(TensorIoError::ZeroDimension {
                channels: channels as u32,
                height: height as u32,
                width: width as u32,
            });
        }
        let expected = channels * height * width;
        if values.len() != expected {
            return Err(TensorIoError::LengthMismatch {
                expected: expected * 4,
                actual: values.len() * 4,
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(TensorIoError::NonFinite { index, value });
        }
        geometry.validate_grid(height, width)?;
        Ok(FeatureStack {
            channels,
            height,
            width,
            values,
            geometry,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn geometry(&self) -> &GeometryMeta {
        &self.geometry
    }

    /// Row-major `H x W` slice of one channel.
    pub fn channel(&self, ch: usize) -> &[f32] {
        let plane = self.height * self.width;
        &self.values[ch * plane..(ch + 1) * plane]
    }

    pub fn get(&self, ch: usize, row: usize, col: usize) -> f32 {
        self.values[(ch * self.height + row) * self.width + col]
    }

    /// Encodes the tensor (not the geometry) as RFM1 bytes.
    pub fn to_rfm1_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(RFM1_HEADER_LEN + self.values.len() * 4);
        out.extend_from_slice(&RFM1_MAGIC);
        for dim in [self.channels, self.height, self.width] {
            out.extend_from_slice(&(dim as u32).to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Decodes RFM1 bytes and attaches `geometry`.
    pub fn from_rfm1_bytes(bytes: &[u8], geometry: GeometryMeta) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(TensorIoError::Truncated {
                expected: RFM1_HEADER_LEN,
                actual: bytes.len(),
            });
        }
        let found: [u8; 4] = bytes[..4].try_into().unwrap();
        if found != RFM1_MAGIC {
            return Err(TensorIoError::BadMagic { found });
        }
        if bytes.len() < RFM1_HEADER_LEN {
            return Err(TensorIoError::Truncated {
                expected: RFM1_HEADER_LEN,
                actual: bytes.len(),
            });
        }
        let dim = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
        let (c, h, w) = (dim(0), dim(1), dim(2));
        if c == 0 || h == 0 || w == 0 {
            return Err(TensorIoError::ZeroDimension {
                channels: c,
                height: h,
                width: w,
            });
        }
        let payload = &bytes[RFM1_HEADER_LEN..];
        let expected = (c as u64 * h as u64 * w as u64 * 4) as usize;
        if payload.len() < expected {
            return Err(TensorIoError::Truncated {
                expected: RFM1_HEADER_LEN + expected,
                actual: bytes.len(),
            });
        }
        if payload.len() != expected {
            return Err(TensorIoError::LengthMismatch {
                expected,
                actual: payload.len(),
            });
        }
        let values = payload
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        FeatureStack::new(c as usize, h as usize, w as usize, values, geometry)
    }
}

/// Path of the geometry sidecar for a feature-stack file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".geom.json");
    PathBuf::from(name)
}

pub fn load_feature_stack(path: impl AsRef<Path>) -> Result<FeatureStack> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| TensorIoError::Read {
        path: path.to_owned(),
        source,
    })?;
    // Reject non-RFM1 files before looking for a sidecar.
    if let Some(found) = bytes.get(..4) {
        if found != RFM1_MAGIC {
            return Err(TensorIoError::BadMagic {
                found: found.try_into().unwrap(),
            });
        }
    }
    let side = sidecar_path(path);
    let geom_text = match fs::read_to_string(&side) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(TensorIoError::MissingSidecar(side));
        }
        Err(source) => return Err(TensorIoError::Read { path: side, source }),
    };
    let geometry: GeometryMeta =
        serde_json::from_str(&geom_text).map_err(|e| TensorIoError::BadSidecar {
            path: side.clone(),
            reason: e.to_string(),
        })?;
    FeatureStack::from_rfm1_bytes(&bytes, geometry)
}

pub fn save_feature_stack(stack: &FeatureStack, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let write_err = |p: &Path| {
        let p = p.to_owned();
        move |source| TensorIoError::Write { path: p, source }
    };
    fs::write(path, stack.to_rfm1_bytes()).map_err(write_err(path))?;
    let side = sidecar_path(path);
    let mut json = serde_json::to_string_pretty(&stack.geometry).expect("geometry serializes");
    json.push('\n');
    fs::write(&side, json).map_err(write_err(&side))?;
    Ok(())
}

/// Ground truth for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationRecord {
    pub image_id: String,
    pub gt_boxes: Vec<BoxPx>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnotationSet {
    pub records: Vec<AnnotationRecord>,
}

impl AnnotationSet {
    pub fn get(&self, image_id: &str) -> Option<&AnnotationRecord> {
        self.records.iter().find(|r| r.image_id == image_id)
    }

    pub fn total_boxes(&self) -> usize {
        self.records.iter().map(|r| r.gt_boxes.len()).sum()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationLine {
    image_id: String,
    gt_boxes: Vec<[u32; 4]>,
}

/// Proposals produced for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProposalSet {
    pub image_id: String,
    pub gen_time_ns: u64,
    pub boxes: Vec<BoxPx>,
}

fn parse_annotation_line(
    line: &str,
    seen: &mut std::collections::HashSet<String>,
) -> std::result::Result<AnnotationRecord, String> {
    let parsed: AnnotationLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if parsed.image_id.is_empty() {
        return Err("empty image_id".into());
    }
    if !seen.insert(parsed.image_id.clone()) {
        return Err(format!("duplicate image_id {:?}", parsed.image_id));
    }
    let mut gt_boxes = Vec::with_capacity(parsed.gt_boxes.len());
    for [x0, y0, x1, y1] in parsed.gt_boxes {
        if x0 > x1 || y0 > y1 {
            return Err(format!("inverted box [{x0},{y0},{x1},{y1}]"));
        }
        gt_boxes.push(BoxPx::new(x0, y0, x1, y1, BoxKind::Truth));
    }
    Ok(AnnotationRecord {
        image_id: parsed.image_id,
        gt_boxes,
    })
}

/// Reads non-blank lines of a JSON-lines file, tagging each with its 1-based
/// line number.
fn for_each_line(
    path: &Path,
    mut f: impl FnMut(usize, &str) -> std::result::Result<(), String>,
) -> Result<()> {
    let file = fs::File::open(path).map_err(|source| TensorIoError::Read {
        path: path.to_owned(),
        source,
    })?;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| TensorIoError::Read {
            path: path.to_owned(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        f(i + 1, &line).map_err(|reason| TensorIoError::BadLine {
            path: path.to_owned(),
            line: i + 1,
            reason,
        })?;
    }
    Ok(())
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<AnnotationSet> {
    let mut seen = std::collections::HashSet::new();
    let mut records = Vec::new();
    for_each_line(path.as_ref(), |_, line| {
        records.push(parse_annotation_line(line, &mut seen)?);
        Ok(())
    })?;
    Ok(AnnotationSet { records })
}

pub fn save_annotations(set: &AnnotationSet, path: impl AsRef<Path>) -> Result<()> {
    let lines = set.records.iter().map(|r| AnnotationLine {
        image_id: r.image_id.clone(),
        gt_boxes: r.gt_boxes.iter().map(BoxPx::corners).collect(),
    });
    write_json_lines(path.as_ref(), lines)
}

pub fn load_proposals(path: impl AsRef<Path>) -> Result<Vec<ProposalSet>> {
    let mut out = Vec::new();
    for_each_line(path.as_ref(), |_, line| {
        let set: ProposalSet = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if let Some(b) = set.boxes.iter().find(|b| b.x0 > b.x1 || b.y0 > b.y1) {
            return Err(format!("inverted box {:?}", b.corners()));
        }
        out.push(set);
        Ok(())
    })?;
    Ok(out)
}

pub fn save_proposals(props: &[ProposalSet], path: impl AsRef<Path>) -> Result<()> {
    write_json_lines(path.as_ref(), props.iter())
}

fn write_json_lines<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let wrap = |source| TensorIoError::Write {
        path: path.to_owned(),
        source,
    };
    let file = fs::File::create(path).map_err(wrap)?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, &item).map_err(|e| wrap(e.into()))?;
        w.write_all(b"\n").map_err(wrap)?;
    }
    w.flush().map_err(wrap)
}
