//! Dual-mesh construction and crack-free iso-surface extraction for
//! cell-centered adaptive mesh refinement (AMR) data.
//!
//! Input is a flat list of cells `(i, j, k; level)` with one scalar each,
//! from any refinement scheme: block-structured, octree, or arbitrary cell
//! lists with holes and level jumps of any size. The dual mesh is built by
//! snapping logical dual cells to actual cells with binary search over the
//! sorted cell array, and the iso-surface comes from running Marching
//! Cubes directly on the (possibly degenerate) dual hexahedra.
//!
//! ```
//! use amrdual::{extract_isosurface, synth, IsoParams};
//!
//! let field = synth::FieldSpec::sphere([4.0, 4.0, 4.0], 2.5);
//! let dataset = synth::gen_uniform(8, &field).unwrap();
//! let out = extract_isosurface(&dataset, &IsoParams::new(0.0)).unwrap();
//! assert!(!out.mesh.triangles.is_empty());
//! ```

pub mod contour;
pub mod dual;
mod error;
pub mod io;
pub mod locator;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod synth;
mod tables;
pub mod weld;

pub use contour::{contour_hex, FatTriangle, HexInput};
pub use dual::{DualCell, Rejection};
pub use error::{AmrError, Result};
pub use locator::{build_index, CellId, CellIndex, ValidationReport};
pub use model::{AmrDataset, CellCoord, IntBox, WorldPoint};
pub use pipeline::{
    extract_dual_mesh, extract_isosurface, Extraction, ExtractionStats, IsoParams, Threads,
};
pub use weld::{weld, IndexedMesh};
