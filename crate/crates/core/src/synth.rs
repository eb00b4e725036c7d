//! Synthetic datasets: uniform grids, octrees and block layouts with holes.

use std::fmt;
use std::str::FromStr;

use crate::error::{AmrError, Result};
use crate::model::{cell_center, AmrDataset, CellCoord, IntBox, WorldPoint, MAX_LEVEL};

/// Analytic scalar field sampled at cell centers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldSpec {
    /// Signed distance to a sphere: `|p - center| - radius`.
    Sphere { center: [f64; 3], radius: f64 },
    /// `gradient . p + offset`.
    Linear { gradient: [f64; 3], offset: f64 },
    /// `sin(frequency * |p - center|)`; its zero sets are concentric spheres.
    RadialSine { center: [f64; 3], frequency: f64 },
}

impl FieldSpec {
    pub fn sphere(center: [f64; 3], radius: f64) -> Self {
        FieldSpec::Sphere { center, radius }
    }

    pub fn linear(gradient: [f64; 3], offset: f64) -> Self {
        FieldSpec::Linear { gradient, offset }
    }

    pub fn radial_sine(center: [f64; 3], frequency: f64) -> Self {
        FieldSpec::RadialSine { center, frequency }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            FieldSpec::Sphere { center, radius } => vec![center[0], center[1], center[2], radius],
            FieldSpec::Linear { gradient, offset } => {
                vec![gradient[0], gradient[1], gradient[2], offset]
            }
            FieldSpec::RadialSine { center, frequency } => {
                vec![center[0], center[1], center[2], frequency]
            }
        }
    }

    pub fn eval(&self, p: WorldPoint) -> f64 {
        let dist = |c: [f64; 3]| {
            let (dx, dy, dz) = (p.x - c[0], p.y - c[1], p.z - c[2]);
            (dx * dx + dy * dy + dz * dz).sqrt()
        };
        match *self {
            FieldSpec::Sphere { center, radius } => dist(center) - radius,
            FieldSpec::Linear { gradient, offset } => {
                gradient[0] * p.x + gradient[1] * p.y + gradient[2] * p.z + offset
            }
            FieldSpec::RadialSine { center, frequency } => (frequency * dist(center)).sin(),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FieldSpec::Sphere { .. } => "sphere",
            FieldSpec::Linear { .. } => "linear",
            FieldSpec::RadialSine { .. } => "sine",
        };
        let p: Vec<String> = self.params().iter().map(|v| v.to_string()).collect();
        write!(f, "{name}:{}", p.join(","))
    }
}

/// Parses `sphere:cx,cy,cz,r`, `linear:gx,gy,gz,offset` or
/// `sine:cx,cy,cz,frequency`.
impl FromStr for FieldSpec {
    type Err = AmrError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| AmrError::Format(format!("field '{s}': {why}"));
        let (name, rest) = s
            .split_once(':')
            .ok_or_else(|| bad("expected kind:params"))?;
        let v: Vec<f64> = rest
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("parameters must be numbers"))?;
        if v.len() != 4 {
            return Err(bad("expected four parameters"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(bad("parameters must be finite"));
        }
        let xyz = [v[0], v[1], v[2]];
        match name {
            "sphere" => Ok(FieldSpec::sphere(xyz, v[3])),
            "linear" => Ok(FieldSpec::linear(xyz, v[3])),
            "sine" | "radial-sine" => Ok(FieldSpec::radial_sine(xyz, v[3])),
            _ => Err(bad("unknown kind")),
        }
    }
}

fn sampled(cells: Vec<CellCoord>, field: &FieldSpec) -> Result<AmrDataset> {
    let scalars = cells.iter().map(|c| field.eval(cell_center(c))).collect();
    AmrDataset::new(cells, scalars)
}

/// `n^3` level-0 cells anchored at `{0..n-1}^3`.
pub fn gen_uniform(n: u32, field: &FieldSpec) -> Result<AmrDataset> {
    if n == 0 || n > 1 << 10 {
        return Err(AmrError::Contract(format!(
            "grid size {n} out of range 1..=1024"
        )));
    }
    let n = n as i32;
    let mut cells = Vec::with_capacity((n * n * n) as usize);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                cells.push(CellCoord { i, j, k, level: 0 });
            }
        }
    }
    sampled(cells, field)
}

/// Octree with a single level-`depth` root at the origin.
///
/// A cell is split when the spread of the field over its eight corners
/// exceeds `threshold`; leaves become the actual cells.
pub fn gen_octree(depth: u8, field: &FieldSpec, threshold: f64) -> Result<AmrDataset> {
    gen_octree_forest([1, 1, 1], depth, field, threshold)
}

/// Like [`gen_octree`], with `roots[0] x roots[1] x roots[2]` level-`depth`
/// roots tiled from the origin.
pub fn gen_octree_forest(
    roots: [u32; 3],
    depth: u8,
    field: &FieldSpec,
    threshold: f64,
) -> Result<AmrDataset> {
    if depth > 20 {
        return Err(AmrError::Contract(format!(
            "octree depth {depth} exceeds 20"
        )));
    }
    if threshold.is_nan() {
        return Err(AmrError::Contract("threshold is NaN".into()));
    }
    let w = 1i64 << depth;
    for &r in &roots {
        if r == 0 || r as i64 * w > i32::MAX as i64 {
            return Err(AmrError::Contract(format!("root count {r} out of range")));
        }
    }
    let mut cells = Vec::new();
    for x in 0..roots[0] as i32 {
        for y in 0..roots[1] as i32 {
            for z in 0..roots[2] as i32 {
                let w = w as i32;
                let root = CellCoord {
                    i: x * w,
                    j: y * w,
                    k: z * w,
                    level: depth,
                };
                refine(root, field, threshold, &mut cells);
            }
        }
    }
    sampled(cells, field)
}

fn corner_spread(c: &CellCoord, field: &FieldSpec) -> f64 {
    let w = c.width() as f64;
    let (lo, hi) = (0..8).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
        let p = WorldPoint::new(
            c.i as f64 + w * (d & 1) as f64,
            c.j as f64 + w * ((d >> 1) & 1) as f64,
            c.k as f64 + w * ((d >> 2) & 1) as f64,
        );
        let v = field.eval(p);
        (lo.min(v), hi.max(v))
    });
    hi - lo
}

fn refine(c: CellCoord, field: &FieldSpec, threshold: f64, out: &mut Vec<CellCoord>) {
    if c.level == 0 || corner_spread(&c, field) <= threshold {
        out.push(c);
        return;
    }
    let h = 1i32 << (c.level - 1);
    for d in 0..8 {
        let child = CellCoord {
            i: c.i + h * (d & 1),
            j: c.j + h * ((d >> 1) & 1),
            k: c.k + h * ((d >> 2) & 1),
            level: c.level - 1,
        };
        refine(child, field, threshold, out);
    }
}

/// A rectangular block of same-level cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockSpec {
    /// Lower corner in finest-level units; must be `2^level` aligned.
    pub anchor: [i32; 3],
    /// Cells per axis.
    pub size: [u32; 3],
    pub level: u8,
}

impl BlockSpec {
    pub fn new(anchor: [i32; 3], size: [u32; 3], level: u8) -> Self {
        BlockSpec {
            anchor,
            size,
            level,
        }
    }

    pub fn extent(&self) -> IntBox {
        let w = 1i64 << self.level;
        let min = self.anchor.map(i64::from);
        IntBox {
            min,
            max: std::array::from_fn(|d| min[d] + self.size[d] as i64 * w),
        }
    }
}

/// Cells of every block at its level, minus those touching a hole.
///
/// Overlapping blocks are rejected. Adjacent blocks may differ by any
/// number of levels.
pub fn gen_blocks(blocks: &[BlockSpec], field: &FieldSpec, holes: &[IntBox]) -> Result<AmrDataset> {
    for (n, b) in blocks.iter().enumerate() {
        if b.level > MAX_LEVEL {
            return Err(AmrError::Contract(format!(
                "block {n}: level {} too deep",
                b.level
            )));
        }
        CellCoord::new(b.anchor[0], b.anchor[1], b.anchor[2], b.level)
            .map_err(|e| AmrError::Contract(format!("block {n}: {e}")))?;
        let ext = b.extent();
        if ext.max.iter().any(|&v| v > i32::MAX as i64) {
            return Err(AmrError::Contract(format!(
                "block {n} exceeds 32-bit range"
            )));
        }
        for (m, other) in blocks[..n].iter().enumerate() {
            if ext.intersects(&other.extent()) {
                return Err(AmrError::Contract(format!("blocks {m} and {n} overlap")));
            }
        }
    }
    let mut cells = Vec::new();
    for b in blocks {
        let w = 1i32 << b.level;
        for x in 0..b.size[0] as i32 {
            for y in 0..b.size[1] as i32 {
                for z in 0..b.size[2] as i32 {
                    let c = CellCoord {
                        i: b.anchor[0] + x * w,
                        j: b.anchor[1] + y * w,
                        k: b.anchor[2] + z * w,
                        level: b.level,
                    };
                    let ext = IntBox::of_cell(&c);
                    if !holes.iter().any(|h| h.intersects(&ext)) {
                        cells.push(c);
                    }
                }
            }
        }
    }
    sampled(cells, field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locator::CellIndex;

    #[test]
    fn uniform() {
        let f = FieldSpec::sphere([0.0; 3], 1.0);
        assert_eq!(gen_uniform(1, &f).unwrap().len(), 1);
        let ds = gen_uniform(2, &f).unwrap();
        assert_eq!(ds.len(), 8);
        for c in ds.cells() {
            let p = cell_center(c);
            assert_eq!(p.x.fract(), 0.5);
        }
        let ds = gen_uniform(16, &FieldSpec::sphere([8.0; 3], 5.0)).unwrap();
        assert!(CellIndex::new(&ds).validate().is_clean());
        assert!(gen_uniform(0, &f).is_err());
    }

    #[test]
    fn octree_extremes() {
        let f = FieldSpec::linear([1.0, 0.3, 0.1], 0.0);
        let ds = gen_octree(3, &f, f64::INFINITY).unwrap();
        assert_eq!(
            ds.cells(),
            &[CellCoord {
                i: 0,
                j: 0,
                k: 0,
                level: 3
            }]
        );
        let ds = gen_octree(3, &f, 0.0).unwrap();
        assert_eq!(ds.len(), 512);
        assert_eq!(ds.level_set(), &[0]);
    }

    fn volume(ds: &AmrDataset) -> i64 {
        ds.cells().iter().map(|c| c.width().pow(3)).sum()
    }

    /// Largest level difference between face-adjacent cells.
    fn max_face_jump(ds: &AmrDataset) -> u8 {
        let idx = CellIndex::new(ds);
        let mut jump = 0;
        for c in ds.cells() {
            let w = c.width();
            let a = c.anchor();
            for axis in 0..3 {
                for side in [-1, w] {
                    let mut p = a;
                    p[axis] += side;
                    // Sample every unit position on that face.
                    for u in 0..w {
                        for v in 0..w {
                            let mut q = p;
                            q[(axis + 1) % 3] += u;
                            q[(axis + 2) % 3] += v;
                            if let Some(n) = idx.snap(q, None) {
                                jump = jump.max(idx.cell(n).level.abs_diff(c.level));
                            }
                        }
                    }
                }
            }
        }
        jump
    }

    #[test]
    fn octree_sphere_partitions_root_with_level_jumps() {
        // Off-grid centers: a centered sphere leaves every corner of the
        // root equidistant and nothing refines.
        let cases = [
            (3u8, [5.32, 5.5, 5.5], 1.33, 2.0),
            (4, [5.3, 6.1, 7.7], 3.5, 3.0),
            (5, [10.4, 14.14, 11.37], 5.4, 2.5),
        ];
        for (depth, center, radius, threshold) in cases {
            let ds = gen_octree(depth, &FieldSpec::sphere(center, radius), threshold).unwrap();
            assert_eq!(volume(&ds), 1i64 << (3 * depth as i64));
            assert!(CellIndex::new(&ds).validate().is_clean());
            assert!(ds.level_set().len() >= 2, "{:?}", ds.level_set());
            assert!(max_face_jump(&ds) >= 2, "depth {depth}");
        }
        let ds = gen_octree(4, &FieldSpec::sphere([5.3, 6.1, 7.7], 3.5), 3.0).unwrap();
        assert_eq!(ds.level_set(), &[0, 1, 2]);
    }

    #[test]
    fn forest_tiles() {
        let f = FieldSpec::linear([1.0, 2.0, 3.0], 0.0);
        let ds = gen_octree_forest([2, 1, 3], 2, &f, f64::INFINITY).unwrap();
        assert_eq!(ds.len(), 6);
        assert_eq!(
            ds.bbox(),
            IntBox {
                min: [0; 3],
                max: [8, 4, 12]
            }
        );
    }

    #[test]
    fn blocks() {
        let f = FieldSpec::linear([1.0, 0.0, 0.0], 0.0);
        let ds = gen_blocks(&[BlockSpec::new([0; 3], [2; 3], 0)], &f, &[]).unwrap();
        assert_eq!(ds.len(), 8);

        // Level 0 beside level 2: a two-level jump across a face.
        let bs = [
            BlockSpec::new([0; 3], [4; 3], 0),
            BlockSpec::new([4, 0, 0], [1; 3], 2),
        ];
        let ds = gen_blocks(&bs, &f, &[]).unwrap();
        assert!(CellIndex::new(&ds).validate().is_clean());
        assert_eq!(max_face_jump(&ds), 2);

        let hole = IntBox {
            min: [1; 3],
            max: [3; 3],
        };
        let ds = gen_blocks(&bs[..1], &f, &[hole]).unwrap();
        assert_eq!(ds.len(), 64 - 8);

        let overlapping = [
            BlockSpec::new([0; 3], [4; 3], 0),
            BlockSpec::new([2, 0, 0], [1; 3], 1),
        ];
        assert!(gen_blocks(&overlapping, &f, &[]).is_err());
        assert!(gen_blocks(&[BlockSpec::new([1, 0, 0], [1; 3], 1)], &f, &[]).is_err());
    }

    #[test]
    fn field_parsing() {
        let f: FieldSpec = "sphere:8,8,8,5".parse().unwrap();
        assert_eq!(f, FieldSpec::sphere([8.0; 3], 5.0));
        assert_eq!(f.eval(WorldPoint::new(8.0, 8.0, 13.0)), 0.0);
        let g: FieldSpec = "linear:1,0,0,-2".parse().unwrap();
        assert_eq!(g.eval(WorldPoint::new(3.0, 9.0, 9.0)), 1.0);
        let s: FieldSpec = "sine:0,0,0,2".parse().unwrap();
        assert_eq!(s.to_string().parse::<FieldSpec>().unwrap(), s);
        assert!("cube:1,2,3,4".parse::<FieldSpec>().is_err());
        assert!("sphere:1,2,3".parse::<FieldSpec>().is_err());
        assert!("sphere:1,2,3,x".parse::<FieldSpec>().is_err());
        assert!("sphere:1,2,3,inf".parse::<FieldSpec>().is_err());
    }
}
