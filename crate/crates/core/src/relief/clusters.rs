use serde::{Deserialize, Serialize};

use super::levels::LevelPartition;

/// Which grid neighbours count as adjacent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(format!("connectivity must be 4 or 8, got {other}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

/// One maximal connected set of same-level cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub level: usize,
    /// `(row, col)` pairs in raster order.
    pub cells: Vec<(usize, usize)>,
    pub row_min: usize,
    pub col_min: usize,
    pub row_max: usize,
    pub col_max: usize,
}

impl Cluster {
    fn start(level: usize, row: usize, col: usize) -> Self {
        Cluster {
            level,
            cells: vec![(row, col)],
            row_min: row,
            col_min: col,
            row_max: row,
            col_max: col,
        }
    }

    fn push(&mut self, row: usize, col: usize) {
        self.cells.push((row, col));
        self.row_min = self.row_min.min(row);
        self.col_min = self.col_min.min(col);
        self.row_max = self.row_max.max(row);
        self.col_max = self.col_max.max(col);
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller index wins so roots are the raster-first cell.
            let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[drop as usize] = keep;
        }
    }
}

/// Labels every level at once. Returns clusters grouped by level
/// (`out[i]` holds level `i + 1`), each group ordered by
/// `(row_min, col_min)` and then by first cell in raster order.
pub fn label_all_levels(part: &LevelPartition, connectivity: Connectivity) -> Vec<Vec<Cluster>> {
    let (h, w) = (part.height, part.width);
    let mut sets = DisjointSet::new(h * w);
    let idx = |r: usize, c: usize| (r * w + c) as u32;

    // Raster pass over already-visited neighbours: left, up, and for
    // 8-connectivity the two upper diagonals.
    for r in 0..h {
        for c in 0..w {
            let lvl = part.level_of[r * w + c];
            let here = idx(r, c);
            if c > 0 && part.level_of[r * w + c - 1] == lvl {
                sets.union(here, idx(r, c - 1));
            }
            if r > 0 {
                if part.level_of[(r - 1) * w + c] == lvl {
                    sets.union(here, idx(r - 1, c));
                }
                if connectivity == Connectivity::Eight {
                    if c > 0 && part.level_of[(r - 1) * w + c - 1] == lvl {
                        sets.union(here, idx(r - 1, c - 1));
                    }
                    if c + 1 < w && part.level_of[(r - 1) * w + c + 1] == lvl {
                        sets.union(here, idx(r - 1, c + 1));
                    }
                }
            }
        }
    }

    let mut slot_of_root = vec![u32::MAX; h * w];
    let mut clusters: Vec<Cluster> = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let root = sets.find(idx(r, c)) as usize;
            match slot_of_root[root] {
                u32::MAX => {
                    slot_of_root[root] = clusters.len() as u32;
                    clusters.push(Cluster::start(part.level_of[r * w + c] as usize, r, c));
                }
                slot => clusters[slot as usize].push(r, c),
            }
        }
    }

    let mut by_level = vec![Vec::new(); part.level_count];
    for cl in clusters {
        by_level[cl.level - 1].push(cl);
    }
    for group in &mut by_level {
        // Stable: ties keep raster order of the first cell.
        group.sort_by_key(|cl| (cl.row_min, cl.col_min));
    }
    by_level
}

/// Connected clusters of one level (1-based). A level with no cells yields
/// an empty list.
///
/// # Panics
/// If `level` is outside `1..=part.level_count`.
pub fn extract_clusters(
    part: &LevelPartition,
    level: usize,
    connectivity: Connectivity,
) -> Vec<Cluster> {
    assert!(
        level >= 1 && level <= part.level_count,
        "level {level} out of range"
    );
    let mut all = label_all_levels(part, connectivity);
    std::mem::take(&mut all[level - 1])
}
