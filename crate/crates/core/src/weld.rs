//! Fat triangle soup to indexed face set.
//!
//! Every corner is tagged with `3 * triangle + corner`, the tags are sorted
//! by position, and a run of bit-identical positions shares one index.
//! Indices are handed out in sorted order, so the result does not depend
//! on thread count or on arrival order of equal positions.

use rayon::prelude::*;

use crate::contour::FatTriangle;
use crate::model::WorldPoint;

/// Deduplicated vertices plus triangles indexing into them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IndexedMesh {
    pub vertices: Vec<WorldPoint>,
    pub triangles: Vec<[u32; 3]>,
}

impl IndexedMesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Triangles as explicit positions again.
    pub fn expand(&self) -> Vec<FatTriangle> {
        self.triangles
            .iter()
            .map(|t| FatTriangle {
                v: t.map(|i| self.vertices[i as usize]),
            })
            .collect()
    }
}

/// Welds bit-identical positions into shared vertices.
///
/// # Panics
///
/// If the soup has more than `u32::MAX / 3` triangles; callers bound the
/// size beforehand.
pub fn weld(fat: &[FatTriangle]) -> IndexedMesh {
    assert!(
        fat.len() <= (u32::MAX / 3) as usize,
        "triangle soup too large for 32-bit tags"
    );
    let mut tagged: Vec<(WorldPoint, u32)> = fat
        .par_iter()
        .enumerate()
        .flat_map_iter(|(t, tri)| (0..3).map(move |c| (tri.v[c], (3 * t + c) as u32)))
        .collect();
    tagged.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut vertices: Vec<WorldPoint> = Vec::new();
    let mut corner_index = vec![0u32; tagged.len()];
    for (n, (pos, tag)) in tagged.iter().enumerate() {
        if n == 0 || !tagged[n - 1].0.bit_eq(pos) {
            vertices.push(*pos);
        }
        corner_index[*tag as usize] = (vertices.len() - 1) as u32;
    }

    let triangles = corner_index
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    IndexedMesh {
        vertices,
        triangles,
    }
}
