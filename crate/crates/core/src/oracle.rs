//! Brute-force references that share no code path with the production
//! dual construction.
//!
//! [`exhaustive_duals`] snaps every finest-level dual in a box and keeps the
//! shapes with volume. [`uniform_mc_reference`] runs textbook Marching Cubes
//! on an all-level-0 dataset. Both are only meant for small inputs.

use std::collections::{BTreeSet, HashMap};

use crate::error::{AmrError, Result};
use crate::locator::CellId;
use crate::model::{AmrDataset, IntBox};
use crate::tables::TRI_TABLE;
use crate::weld::{weld, IndexedMesh};
use crate::{FatTriangle, WorldPoint};

/// Canonical identity of a dual shape: its corner ids, sorted.
pub type DualKey = [CellId; 8];

/// Dense finest-level map from integer point to the containing cell.
struct Raster {
    bbox: IntBox,
    ext: [i64; 3],
    slots: Vec<Option<CellId>>,
}

impl Raster {
    fn new(dataset: &AmrDataset, bbox: IntBox) -> Result<Self> {
        let ext = bbox.extent();
        let volume = ext
            .iter()
            .try_fold(1i64, |acc, &e| acc.checked_mul(e.max(0)));
        let volume = match volume {
            Some(v) if v <= 1 << 24 => v as usize,
            _ => return Err(AmrError::Contract(format!("oracle box {ext:?} too large"))),
        };
        let mut raster = Raster {
            bbox,
            ext,
            slots: vec![None; volume],
        };
        for (n, c) in dataset.cells().iter().enumerate() {
            let cell = IntBox::of_cell(c);
            let lo: [i64; 3] = std::array::from_fn(|d| cell.min[d].max(bbox.min[d]));
            let hi: [i64; 3] = std::array::from_fn(|d| cell.max[d].min(bbox.max[d]));
            for x in lo[0]..hi[0] {
                for y in lo[1]..hi[1] {
                    for z in lo[2]..hi[2] {
                        let slot = raster.slot([x, y, z]).expect("inside box");
                        raster.slots[slot] = Some(CellId(n as u32));
                    }
                }
            }
        }
        Ok(raster)
    }

    fn slot(&self, p: [i64; 3]) -> Option<usize> {
        let mut s = 0usize;
        for ((&v, &lo), &ext) in p.iter().zip(&self.bbox.min).zip(&self.ext) {
            let q = v - lo;
            if q < 0 || q >= ext {
                return None;
            }
            s = s * ext as usize + q as usize;
        }
        Some(s)
    }

    fn get(&self, p: [i64; 3]) -> Option<CellId> {
        self.slot(p).and_then(|s| self.slots[s])
    }
}

/// Dimension of the affine hull of a point set, exact on integers.
fn affine_rank(points: &[[i64; 3]]) -> usize {
    let Some(&p0) = points.first() else { return 0 };
    let vecs: Vec<[i64; 3]> = points[1..]
        .iter()
        .map(|p| [p[0] - p0[0], p[1] - p0[1], p[2] - p0[2]])
        .filter(|v| *v != [0, 0, 0])
        .collect();
    if vecs.is_empty() {
        return 0;
    }
    let cross = |a: [i64; 3], b: [i64; 3]| {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let normals: Vec<[i64; 3]> = vecs
        .iter()
        .enumerate()
        .flat_map(|(n, &a)| vecs[n + 1..].iter().map(move |&b| cross(a, b)))
        .filter(|c| *c != [0, 0, 0])
        .collect();
    if normals.is_empty() {
        return 1;
    }
    let volumetric = normals.iter().any(|nrm| {
        vecs.iter()
            .any(|v| nrm[0] * v[0] + nrm[1] * v[1] + nrm[2] * v[2] != 0)
    });
    if volumetric {
        3
    } else {
        2
    }
}

/// Every finest-level dual in `bbox`, snapped, with missing-corner and
/// zero-volume shapes dropped.
///
/// A shape has zero volume when some axis maps every corner pair to the
/// same cell (a face, edge or point of the real dual mesh seen edge-on,
/// possibly non-planar), or when its distinct corner centers span less
/// than three dimensions.
///
/// Shapes are identified by their sorted corner ids. Cost is linear in the
/// box volume; intended for boxes up to about `32^3`.
pub fn exhaustive_duals(dataset: &AmrDataset, bbox: IntBox) -> Result<BTreeSet<DualKey>> {
    // Level-0 duals with any corner inside the box start one unit lower.
    let grown = IntBox {
        min: bbox.min.map(|v| v - 1),
        max: bbox.max.map(|v| v + 1),
    };
    let raster = Raster::new(dataset, grown)?;
    let mut out = BTreeSet::new();
    for x in bbox.min[0] - 1..bbox.max[0] {
        for y in bbox.min[1] - 1..bbox.max[1] {
            'base: for z in bbox.min[2] - 1..bbox.max[2] {
                let mut key = [CellId(0); 8];
                for (d, slot) in key.iter_mut().enumerate() {
                    let p = [
                        x + (d & 1) as i64,
                        y + ((d >> 1) & 1) as i64,
                        z + ((d >> 2) & 1) as i64,
                    ];
                    match raster.get(p) {
                        Some(id) => *slot = id,
                        None => continue 'base,
                    }
                }
                // Same cell on both ends of every edge along one axis: the
                // shape has no thickness there, whatever its centers do.
                let flat = (0..3).any(|a| (0..8).all(|d| key[d] == key[d ^ (1 << a)]));
                if flat {
                    continue;
                }
                let mut distinct: Vec<CellId> = key.to_vec();
                distinct.sort_unstable();
                distinct.dedup();
                // Doubled centers are integers.
                let centers: Vec<[i64; 3]> = distinct
                    .iter()
                    .map(|id| {
                        let c = &dataset.cells()[id.index()];
                        let w = c.width();
                        c.anchor().map(|a| 2 * a + w)
                    })
                    .collect();
                if affine_rank(&centers) == 3 {
                    key.sort_unstable();
                    out.insert(key);
                }
            }
        }
    }
    Ok(out)
}

/// Table corner offsets in the table's own numbering.
const TABLE_CORNERS: [[i64; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Table edges in the table's own numbering.
const TABLE_EDGES: [(usize, usize); 12] = [
    (0, 1),
    (1, 2),
    (2, 3),
    (3, 0),
    (4, 5),
    (5, 6),
    (6, 7),
    (7, 4),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

/// Classic Marching Cubes over the grid of level-0 cell centers, welded.
///
/// Edge vertices are interpolated from the lexicographically smaller grid
/// point to the larger one. Every grid cube with all eight cells present
/// is contoured.
pub fn uniform_mc_reference(dataset: &AmrDataset, iso: f64) -> Result<IndexedMesh> {
    if dataset.level_set() != [0] {
        return Err(AmrError::Contract(
            "reference requires an all-level-0 dataset".into(),
        ));
    }
    let values: HashMap<[i64; 3], f64> = dataset
        .cells()
        .iter()
        .zip(dataset.scalars())
        .map(|(c, &v)| (c.anchor(), v))
        .collect();
    let bbox = dataset.bbox();
    let mut fat = Vec::new();
    for x in bbox.min[0]..bbox.max[0] - 1 {
        for y in bbox.min[1]..bbox.max[1] - 1 {
            'cube: for z in bbox.min[2]..bbox.max[2] - 1 {
                let mut pts = [[0i64; 3]; 8];
                let mut vals = [0f64; 8];
                let mut case = 0usize;
                for c in 0..8 {
                    let o = TABLE_CORNERS[c];
                    pts[c] = [x + o[0], y + o[1], z + o[2]];
                    match values.get(&pts[c]) {
                        Some(&v) => vals[c] = v,
                        None => continue 'cube,
                    }
                    if vals[c] > iso {
                        case |= 1 << c;
                    }
                }
                let vertex = |e: usize| {
                    let (mut a, mut b) = TABLE_EDGES[e];
                    if pts[b] < pts[a] {
                        std::mem::swap(&mut a, &mut b);
                    }
                    let pa = pts[a].map(|v| v as f64 + 0.5);
                    let pb = pts[b].map(|v| v as f64 + 0.5);
                    let t = (iso - vals[a]) / (vals[b] - vals[a]);
                    WorldPoint::new(
                        pa[0] + t * (pb[0] - pa[0]) + 0.0,
                        pa[1] + t * (pb[1] - pa[1]) + 0.0,
                        pa[2] + t * (pb[2] - pa[2]) + 0.0,
                    )
                };
                for tri in TRI_TABLE[case].chunks_exact(3).take_while(|t| t[0] >= 0) {
                    let t = FatTriangle {
                        v: [
                            vertex(tri[0] as usize),
                            vertex(tri[1] as usize),
                            vertex(tri[2] as usize),
                        ],
                    };
                    if !t.is_degenerate() {
                        fat.push(t);
                    }
                }
            }
        }
    }
    Ok(weld(&fat))
}
