//! Marching Cubes over possibly-degenerate dual hexahedra.
//!
//! Degenerate duals are fed to the table exactly like regular hexahedra.
//! An edge whose two corners snapped to the same cell has equal values at
//! both ends, so the table never places a vertex on it. Vertices on shared
//! edges come out bit-identical in every dual that sees the edge because
//! interpolation always runs from the lower-keyed cell to the higher one.

use arrayvec::ArrayVec;

use crate::dual::DualCell;
use crate::error::{AmrError, Result};
use crate::locator::{CellId, CellIndex};
use crate::model::{cell_center, WorldPoint};
use crate::tables::{table_case, EDGE_CORNERS, TRI_TABLE};

/// Most triangles a single hexahedron can produce.
pub const MAX_TRIANGLES_PER_HEX: usize = 5;

/// The eight snapped corners of one dual, in `d` order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HexInput {
    pub corner_cell: [CellId; 8],
    pub corner_pos: [WorldPoint; 8],
    pub corner_val: [f64; 8],
}

impl HexInput {
    /// Looks up centers and scalars of the dual's corner cells.
    pub fn from_dual(index: &CellIndex<'_>, dual: &DualCell) -> Self {
        HexInput {
            corner_cell: dual.corners,
            corner_pos: dual.corners.map(|id| cell_center(index.cell(id))),
            corner_val: dual.corners.map(|id| index.scalar(id)),
        }
    }
}

/// A triangle holding its three positions explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct FatTriangle {
    pub v: [WorldPoint; 3],
}

impl FatTriangle {
    /// True when two of the corners are bit-identical.
    pub fn is_degenerate(&self) -> bool {
        let [a, b, c] = &self.v;
        a.bit_eq(b) || b.bit_eq(c) || a.bit_eq(c)
    }
}

/// Bit `d` is set iff `values[d] > iso`.
#[inline]
pub fn mc_case_index(values: &[f64; 8], iso: f64) -> u8 {
    values
        .iter()
        .enumerate()
        .fold(0u8, |acc, (d, &v)| acc | (((v > iso) as u8) << d))
}

/// One end of an edge handed to [`interpolate_edge`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeEnd {
    pub cell: CellId,
    pub pos: WorldPoint,
    pub val: f64,
}

/// Position where the linear interpolant along `a`–`b` equals `iso`.
///
/// The endpoints are first put in cell-key order, so the result depends
/// only on the unordered pair.
#[inline]
pub fn interpolate_edge(a: EdgeEnd, b: EdgeEnd, iso: f64) -> Result<WorldPoint> {
    if (a.val > iso) == (b.val > iso) {
        return Err(AmrError::Contract(format!(
            "edge {}-{} does not cross iso {iso} (values {} and {})",
            a.cell, b.cell, a.val, b.val
        )));
    }
    if a.cell == b.cell {
        return Err(AmrError::Contract(format!(
            "collapsed edge at cell {}",
            a.cell
        )));
    }
    let (a, b) = if b.cell < a.cell { (b, a) } else { (a, b) };
    let t = (iso - a.val) / (b.val - a.val);
    // `+ 0.0` folds a negative zero into positive zero so that welding,
    // which compares bit patterns, sees one zero.
    Ok(WorldPoint::new(
        a.pos.x + t * (b.pos.x - a.pos.x) + 0.0,
        a.pos.y + t * (b.pos.y - a.pos.y) + 0.0,
        a.pos.z + t * (b.pos.z - a.pos.z) + 0.0,
    ))
}

/// Runs the case table on one hexahedron and drops triangles whose
/// corners are not pairwise distinct.
pub fn contour_hex(h: &HexInput, iso: f64) -> Result<ArrayVec<FatTriangle, MAX_TRIANGLES_PER_HEX>> {
    let mut out = ArrayVec::new();
    let case = mc_case_index(&h.corner_val, iso);
    if case == 0 || case == 0xff {
        return Ok(out);
    }
    let row = &TRI_TABLE[table_case(case) as usize];

    let mut edge_vertex: [Option<WorldPoint>; 12] = [None; 12];
    let mut vertex = |e: usize| -> Result<WorldPoint> {
        if let Some(p) = edge_vertex[e] {
            return Ok(p);
        }
        let (p, q) = EDGE_CORNERS[e];
        if h.corner_cell[p] == h.corner_cell[q] {
            return Err(AmrError::Internal(format!(
                "case {case:#04x} selects collapsed edge {e} (cell {})",
                h.corner_cell[p]
            )));
        }
        let end = |c: usize| EdgeEnd {
            cell: h.corner_cell[c],
            pos: h.corner_pos[c],
            val: h.corner_val[c],
        };
        let v = interpolate_edge(end(p), end(q), iso)?;
        edge_vertex[e] = Some(v);
        Ok(v)
    };

    for tri in row.chunks_exact(3).take_while(|t| t[0] >= 0) {
        let t = FatTriangle {
            v: [
                vertex(tri[0] as usize)?,
                vertex(tri[1] as usize)?,
                vertex(tri[2] as usize)?,
            ],
        };
        if !t.is_degenerate() {
            out.push(t);
        }
    }
    Ok(out)
}
