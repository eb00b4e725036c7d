//! End-to-end extraction: count pass, prefix sum, emit pass, weld.
//!
//! Work is split into one task per `(cell, d)` pair, `8 * N` in total, run
//! in fixed-size chunks of consecutive cells. The count pass records how
//! many triangles each task produces; an exclusive prefix sum over those
//! counts places every task's output, and the emit pass re-runs the same
//! tasks writing into exactly that much memory. Output order is task order,
//! so the result is identical for any number of threads.

use std::num::NonZeroUsize;
use std::ops::AddAssign;
use std::time::Instant;

use arrayvec::ArrayVec;
use rayon::prelude::*;

use crate::contour::{contour_hex, FatTriangle, HexInput, MAX_TRIANGLES_PER_HEX};
use crate::dual::{dual_bases_of_cell, try_build_dual, DualCell, Rejection};
use crate::error::{AmrError, Result};
use crate::locator::{CellId, CellIndex};
use crate::model::AmrDataset;
use crate::weld::{weld, IndexedMesh};

/// Cells per scheduling chunk.
const CHUNK_CELLS: usize = 1024;

/// Worker count for the extraction pool.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Threads {
    /// Rayon's default: `RAYON_NUM_THREADS` or the number of cores.
    #[default]
    Auto,
    Fixed(NonZeroUsize),
}

impl Threads {
    pub fn count(n: usize) -> Self {
        NonZeroUsize::new(n).map_or(Threads::Auto, Threads::Fixed)
    }

    fn pool(self) -> Result<rayon::ThreadPool> {
        let n = match self {
            Threads::Auto => 0,
            Threads::Fixed(n) => n.get(),
        };
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| AmrError::Internal(format!("thread pool: {e}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsoParams {
    pub iso: f64,
    /// Also return the accepted dual cells.
    pub emit_dual_mesh: bool,
    pub threads: Threads,
}

impl IsoParams {
    pub fn new(iso: f64) -> Self {
        IsoParams {
            iso,
            emit_dual_mesh: false,
            threads: Threads::Auto,
        }
    }

    pub fn with_threads(mut self, threads: Threads) -> Self {
        self.threads = threads;
        self
    }
}

/// Outcome tallies of the `8 * N` dual tasks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DualTally {
    pub accepted: u64,
    pub rejected_missing_corner: u64,
    pub rejected_finer_corner: u64,
    pub rejected_not_owner: u64,
}

impl DualTally {
    fn record<T>(&mut self, r: &std::result::Result<T, Rejection>) {
        match r {
            Ok(_) => self.accepted += 1,
            Err(Rejection::MissingCorner) => self.rejected_missing_corner += 1,
            Err(Rejection::FinerCorner) => self.rejected_finer_corner += 1,
            Err(Rejection::NotOwner) => self.rejected_not_owner += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.accepted
            + self.rejected_missing_corner
            + self.rejected_finer_corner
            + self.rejected_not_owner
    }
}

impl AddAssign for DualTally {
    fn add_assign(&mut self, o: Self) {
        self.accepted += o.accepted;
        self.rejected_missing_corner += o.rejected_missing_corner;
        self.rejected_finer_corner += o.rejected_finer_corner;
        self.rejected_not_owner += o.rejected_not_owner;
    }
}

/// Wall-clock seconds per phase.
///
/// `sort` is left at zero by the library: datasets arrive sorted, so the
/// caller that loaded them fills it in.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimings {
    pub sort: f64,
    pub count_pass: f64,
    pub emit_pass: f64,
    pub weld: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExtractionStats {
    pub cells: u64,
    pub duals: DualTally,
    pub pass1_triangles: u64,
    pub pass2_triangles: u64,
    pub fat_triangle_count: u64,
    pub welded_vertex_count: u64,
    pub welded_triangle_count: u64,
    pub timings: PhaseTimings,
}

impl ExtractionStats {
    /// `key=value` rendering, one pair per entry, in a fixed order.
    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("cells", self.cells.to_string()),
            ("duals_accepted", self.duals.accepted.to_string()),
            (
                "duals_rejected_rule1",
                self.duals.rejected_missing_corner.to_string(),
            ),
            (
                "duals_rejected_rule2",
                self.duals.rejected_finer_corner.to_string(),
            ),
            (
                "duals_rejected_rule3",
                self.duals.rejected_not_owner.to_string(),
            ),
            ("pass1_triangles", self.pass1_triangles.to_string()),
            ("pass2_triangles", self.pass2_triangles.to_string()),
            ("fat_triangle_count", self.fat_triangle_count.to_string()),
            ("welded_vertex_count", self.welded_vertex_count.to_string()),
            (
                "welded_triangle_count",
                self.welded_triangle_count.to_string(),
            ),
            ("sort_seconds", format!("{:.6}", self.timings.sort)),
            ("pass1_seconds", format!("{:.6}", self.timings.count_pass)),
            ("pass2_seconds", format!("{:.6}", self.timings.emit_pass)),
            ("weld_seconds", format!("{:.6}", self.timings.weld)),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub mesh: IndexedMesh,
    pub stats: ExtractionStats,
    /// Accepted duals in `(cell, d)` order, when requested.
    pub duals: Option<Vec<DualCell>>,
}

type TaskTriangles = ArrayVec<FatTriangle, MAX_TRIANGLES_PER_HEX>;

#[inline]
fn run_task(
    index: &CellIndex<'_>,
    cell: CellId,
    base: [i64; 3],
    iso: f64,
    tally: &mut DualTally,
) -> Result<TaskTriangles> {
    let level = index.cell(cell).level;
    let dual = try_build_dual(index, base, level, cell);
    tally.record(&dual);
    match dual {
        Ok(dual) => contour_hex(&HexInput::from_dual(index, &dual), iso),
        Err(_) => Ok(ArrayVec::new()),
    }
}

fn chunk_cells(chunk: usize, n: usize) -> std::ops::Range<usize> {
    chunk * CHUNK_CELLS..((chunk + 1) * CHUNK_CELLS).min(n)
}

/// Extracts the iso-surface as a welded indexed mesh.
///
/// The dataset is assumed valid; see [`CellIndex::validate`].
pub fn extract_isosurface(dataset: &AmrDataset, params: &IsoParams) -> Result<Extraction> {
    if dataset.is_empty() {
        return Err(AmrError::EmptyDataset);
    }
    if !params.iso.is_finite() {
        return Err(AmrError::Contract(format!(
            "iso value {} is not finite",
            params.iso
        )));
    }
    let pool = params.threads.pool()?;
    pool.install(|| extract_in_pool(dataset, params))
}

fn extract_in_pool(dataset: &AmrDataset, params: &IsoParams) -> Result<Extraction> {
    let index = CellIndex::new(dataset);
    let n = dataset.len();
    let iso = params.iso;
    let n_chunks = n.div_ceil(CHUNK_CELLS);
    let mut stats = ExtractionStats {
        cells: n as u64,
        ..Default::default()
    };

    // Count pass.
    let t0 = Instant::now();
    let mut counts = vec![0u8; 8 * n];
    let tally = counts
        .par_chunks_mut(8 * CHUNK_CELLS)
        .enumerate()
        .map(|(chunk, counts)| -> Result<DualTally> {
            let mut tally = DualTally::default();
            for (slot, cell) in chunk_cells(chunk, n).enumerate() {
                let id = CellId(cell as u32);
                for (d, base) in dual_bases_of_cell(index.cell(id)).into_iter().enumerate() {
                    counts[8 * slot + d] = run_task(&index, id, base, iso, &mut tally)?.len() as u8;
                }
            }
            Ok(tally)
        })
        .try_reduce(DualTally::default, |mut a, b| {
            a += b;
            Ok(a)
        })?;
    stats.duals = tally;
    debug_assert_eq!(tally.total(), 8 * n as u64);

    // Exclusive prefix sum. Per-chunk totals place each chunk; inside a
    // chunk, tasks write in order, which is the per-task prefix sum.
    let chunk_totals: Vec<u64> = counts
        .par_chunks(8 * CHUNK_CELLS)
        .map(|c| c.iter().map(|&x| x as u64).sum())
        .collect();
    let total: u64 = chunk_totals.iter().sum();
    stats.pass1_triangles = total;
    if total > (u32::MAX / 3) as u64 {
        return Err(AmrError::Overflow(format!(
            "{total} triangles exceed the 32-bit index range"
        )));
    }
    stats.timings.count_pass = t0.elapsed().as_secs_f64();

    // Emit pass into exactly the counted amount of memory.
    let t1 = Instant::now();
    let mut fat = vec![FatTriangle::default(); total as usize];
    let mut slices = Vec::with_capacity(n_chunks);
    let mut rest = fat.as_mut_slice();
    for &t in &chunk_totals {
        let (head, tail) = rest.split_at_mut(t as usize);
        slices.push(head);
        rest = tail;
    }
    let written: u64 = slices
        .into_par_iter()
        .zip(counts.par_chunks(8 * CHUNK_CELLS))
        .enumerate()
        .map(|(chunk, (out, counts))| -> Result<u64> {
            let mut tally = DualTally::default();
            let mut at = 0usize;
            for (slot, cell) in chunk_cells(chunk, n).enumerate() {
                let id = CellId(cell as u32);
                for (d, base) in dual_bases_of_cell(index.cell(id)).into_iter().enumerate() {
                    let tris = run_task(&index, id, base, iso, &mut tally)?;
                    if tris.len() != counts[8 * slot + d] as usize || at + tris.len() > out.len() {
                        return Err(AmrError::Internal(format!(
                            "task ({cell}, {d}) emitted {} triangles but counted {}",
                            tris.len(),
                            counts[8 * slot + d]
                        )));
                    }
                    out[at..at + tris.len()].copy_from_slice(&tris);
                    at += tris.len();
                }
            }
            Ok(at as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    stats.pass2_triangles = written;
    if written != total {
        return Err(AmrError::Internal(format!(
            "emit pass wrote {written} triangles, count pass predicted {total}"
        )));
    }
    stats.fat_triangle_count = written;
    stats.timings.emit_pass = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let mesh = weld(&fat);
    stats.timings.weld = t2.elapsed().as_secs_f64();
    stats.welded_vertex_count = mesh.vertices.len() as u64;
    stats.welded_triangle_count = mesh.triangles.len() as u64;

    let duals = if params.emit_dual_mesh {
        Some(collect_duals(&index).0)
    } else {
        None
    };
    Ok(Extraction { mesh, stats, duals })
}

fn collect_duals(index: &CellIndex<'_>) -> (Vec<DualCell>, DualTally) {
    let n = index.dataset().len();
    let parts: Vec<(Vec<DualCell>, DualTally)> = (0..n.div_ceil(CHUNK_CELLS))
        .into_par_iter()
        .map(|chunk| {
            let mut tally = DualTally::default();
            let mut out = Vec::new();
            for cell in chunk_cells(chunk, n) {
                let id = CellId(cell as u32);
                let c = index.cell(id);
                for base in dual_bases_of_cell(c) {
                    let r = try_build_dual(index, base, c.level, id);
                    tally.record(&r);
                    if let Ok(dual) = r {
                        out.push(dual);
                    }
                }
            }
            (out, tally)
        })
        .collect();
    let mut tally = DualTally::default();
    let mut duals = Vec::with_capacity(parts.iter().map(|p| p.0.len()).sum());
    for (d, t) in parts {
        duals.extend(d);
        tally += t;
    }
    (duals, tally)
}

/// All accepted duals in `(cell key, d)` order, with rule tallies.
pub fn extract_dual_mesh_with_stats(dataset: &AmrDataset) -> Result<(Vec<DualCell>, DualTally)> {
    if dataset.is_empty() {
        return Err(AmrError::EmptyDataset);
    }
    Ok(collect_duals(&CellIndex::new(dataset)))
}

/// All accepted duals in `(cell key, d)` order. Scalars are not read.
pub fn extract_dual_mesh(dataset: &AmrDataset) -> Result<Vec<DualCell>> {
    extract_dual_mesh_with_stats(dataset).map(|(d, _)| d)
}
