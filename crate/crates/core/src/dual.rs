//! Dual-cell construction by snapping.
//!
//! Every vertex of an actual cell is the center of one of eight logical
//! dual cells on that cell's level. Each such dual snaps its eight corner
//! cells through the locator and is kept only if
//!
//! 1. every corner exists,
//! 2. no corner lies on a finer level, and
//! 3. no same-level corner has a smaller cell key than the owning cell.
//!
//! Together these emit every dual-mesh element exactly once, with no
//! coordination between cells. Nothing here reads scalar data.

use crate::locator::{CellId, CellIndex};
use crate::model::CellCoord;

/// One possibly-degenerate dual hexahedron.
///
/// `corners[d]` with `d = dz*4 + dy*2 + dx` is the actual cell snapped to
/// from logical corner `base + (dx, dy, dz) * 2^level`. Corners may repeat.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DualCell {
    pub corners: [CellId; 8],
    pub base: [i64; 3],
    pub level: u8,
    pub owner: CellId,
}

impl DualCell {
    /// Corner ids sorted ascending; the shape's identity as a multiset.
    pub fn canonical_key(&self) -> [CellId; 8] {
        let mut k = self.corners;
        k.sort_unstable();
        k
    }
}

/// Why a candidate dual was not emitted. Only the first rule to fire is
/// reported, evaluating corners in `d` order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rejection {
    /// Rule 1: a corner snapped to no actual cell.
    MissingCorner,
    /// Rule 2: a corner snapped to a finer level.
    FinerCorner,
    /// Rule 3: a same-level corner has a smaller key than the owner.
    NotOwner,
}

/// Offset of corner `d` in units of the dual's cell width.
#[inline]
pub const fn corner_offset(d: usize) -> [i64; 3] {
    [(d & 1) as i64, ((d >> 1) & 1) as i64, ((d >> 2) & 1) as i64]
}

/// Base anchors of the eight same-level duals centered on `c`'s vertices,
/// in `d` order (dx fastest).
pub fn dual_bases_of_cell(c: &CellCoord) -> [[i64; 3]; 8] {
    let w = c.width();
    let a = c.anchor();
    std::array::from_fn(|d| {
        let o = corner_offset(d);
        [
            a[0] + (o[0] - 1) * w,
            a[1] + (o[1] - 1) * w,
            a[2] + (o[2] - 1) * w,
        ]
    })
}

/// Snaps the dual at `base` on `level` and applies the ownership rules for
/// `owner`, an actual cell on exactly `level`.
#[inline]
pub fn try_build_dual(
    index: &CellIndex<'_>,
    base: [i64; 3],
    level: u8,
    owner: CellId,
) -> Result<DualCell, Rejection> {
    let w = 1i64 << level;
    let mut corners = [CellId(0); 8];
    for (d, slot) in corners.iter_mut().enumerate() {
        let o = corner_offset(d);
        let p = [base[0] + o[0] * w, base[1] + o[1] * w, base[2] + o[2] * w];
        let v = index.snap(p, Some(level)).ok_or(Rejection::MissingCorner)?;
        let vl = index.cell(v).level;
        if vl < level {
            return Err(Rejection::FinerCorner);
        }
        // Ids follow key order, so this is the cell-key comparison.
        if vl == level && v < owner {
            return Err(Rejection::NotOwner);
        }
        *slot = v;
    }
    Ok(DualCell {
        corners,
        base,
        level,
        owner,
    })
}

/// Accepted duals of one cell, in `d` order.
pub fn duals_of_cell(index: &CellIndex<'_>, cell: CellId) -> Vec<DualCell> {
    let c = index.cell(cell);
    dual_bases_of_cell(c)
        .into_iter()
        .filter_map(|b| try_build_dual(index, b, c.level, cell).ok())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AmrDataset;

    fn cc(i: i32, j: i32, k: i32, level: u8) -> CellCoord {
        CellCoord { i, j, k, level }
    }

    fn dataset(cells: &[CellCoord]) -> AmrDataset {
        AmrDataset::new(cells.to_vec(), vec![0.0; cells.len()]).unwrap()
    }

    fn block(n: i32) -> AmrDataset {
        let mut cells = Vec::new();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    cells.push(cc(x, y, z, 0));
                }
            }
        }
        dataset(&cells)
    }

    #[test]
    fn bases() {
        let b = dual_bases_of_cell(&cc(0, 0, 0, 0));
        assert_eq!(b[0], [-1, -1, -1]);
        assert_eq!(b[1], [0, -1, -1]);
        assert_eq!(b[7], [0, 0, 0]);
        let b = dual_bases_of_cell(&cc(4, 4, 4, 1));
        assert!(b.iter().flatten().all(|&v| v == 2 || v == 4));
        assert_eq!(b[7], [4, 4, 4]);
        let mut sorted = b.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 8);
    }

    #[test]
    fn single_cell_rejects_by_missing_corner() {
        let ds = dataset(&[cc(0, 0, 0, 0)]);
        let idx = CellIndex::new(&ds);
        assert_eq!(
            try_build_dual(&idx, [0, 0, 0], 0, CellId(0)),
            Err(Rejection::MissingCorner)
        );
        assert!(duals_of_cell(&idx, CellId(0)).is_empty());
    }

    #[test]
    fn uniform_block_of_two() {
        let ds = block(2);
        let idx = CellIndex::new(&ds);
        let owner = idx.find_exact(&cc(0, 0, 0, 0)).unwrap();
        let dual = try_build_dual(&idx, [0, 0, 0], 0, owner).unwrap();
        for d in 0..8 {
            let o = corner_offset(d);
            assert_eq!(
                *idx.cell(dual.corners[d]),
                cc(o[0] as i32, o[1] as i32, o[2] as i32, 0)
            );
        }
        let other = idx.find_exact(&cc(1, 0, 0, 0)).unwrap();
        assert_eq!(
            try_build_dual(&idx, [0, 0, 0], 0, other),
            Err(Rejection::NotOwner)
        );
        assert_eq!(duals_of_cell(&idx, owner).len(), 1);
        for id in idx.ids().filter(|&id| id != owner) {
            assert!(duals_of_cell(&idx, id).is_empty());
        }
    }

    #[test]
    fn uniform_block_counts_interior_vertices() {
        for n in 1..6 {
            let ds = block(n);
            let idx = CellIndex::new(&ds);
            let total: usize = idx.ids().map(|id| duals_of_cell(&idx, id).len()).sum();
            assert_eq!(total, ((n - 1) * (n - 1) * (n - 1)) as usize);
        }
    }

    #[test]
    fn finer_corner_rejects() {
        // Coarse cell next to a refined one: the coarse dual straddling the
        // boundary sees level-0 corners.
        let mut cells = vec![cc(0, 0, 0, 1)];
        for d in 0..8 {
            cells.push(cc(2 + (d & 1), (d >> 1) & 1, (d >> 2) & 1, 0));
        }
        let ds = dataset(&cells);
        let idx = CellIndex::new(&ds);
        let coarse = idx.find_exact(&cc(0, 0, 0, 1)).unwrap();
        assert_eq!(
            try_build_dual(&idx, [0, -2, -2], 1, coarse),
            Err(Rejection::MissingCorner)
        );
        assert_eq!(
            try_build_dual(&idx, [0, 0, 0], 1, coarse),
            Err(Rejection::FinerCorner)
        );
    }

    #[test]
    fn degenerate_dual_across_level_boundary() {
        // One level-1 cell beside a 2x2x2 block of level-0 cells. The
        // level-0 duals reaching into the coarse cell repeat it.
        let mut cells = vec![cc(0, 0, 0, 1)];
        for d in 0..8 {
            cells.push(cc(2 + (d & 1), (d >> 1) & 1, (d >> 2) & 1, 0));
        }
        let ds = dataset(&cells);
        let idx = CellIndex::new(&ds);
        let coarse = idx.find_exact(&cc(0, 0, 0, 1)).unwrap();
        let owner = idx.find_exact(&cc(2, 0, 0, 0)).unwrap();
        let dual = try_build_dual(&idx, [1, 0, 0], 0, owner).unwrap();
        let repeats = dual.corners.iter().filter(|&&c| c == coarse).count();
        assert_eq!(repeats, 4);
        let total: usize = idx.ids().map(|id| duals_of_cell(&idx, id).len()).sum();
        // The fine block's interior dual plus the pyramid onto the coarse cell.
        assert_eq!(total, 2);
    }
}
