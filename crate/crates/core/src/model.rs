//! Integer cell coordinates, refinement levels and the sorted dataset.
//!
//! Every cell is addressed by the integer lower corner of its extent,
//! measured in finest-level units, together with its level `l`. A level-`l`
//! cell spans `2^l` units per axis and its anchor is a multiple of `2^l`.
//! Level 0 is the finest level.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;

use crate::error::{AmrError, Result};

/// Deepest refinement level accepted anywhere in the crate.
pub const MAX_LEVEL: u8 = 30;

/// Width of a level-`level` cell in finest-level units.
pub fn cell_width(level: u8) -> Result<i64> {
    if level > MAX_LEVEL {
        return Err(AmrError::Contract(format!(
            "level {level} exceeds the maximum of {MAX_LEVEL}"
        )));
    }
    Ok(1i64 << level)
}

/// Largest multiple of `2^level` that is `<= x`.
///
/// Two's-complement masking of the low bits is exactly floor-to-multiple,
/// so negative inputs need no special case.
#[inline]
pub fn anchor_mask(x: i64, level: u8) -> i64 {
    debug_assert!(level <= MAX_LEVEL);
    x & !((1i64 << level) - 1)
}

/// Integer identity of a logical or actual AMR cell.
///
/// The derived ordering is the canonical cell key: lexicographic on
/// `(i, j, k, level)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CellCoord {
    pub i: i32,
    pub j: i32,
    pub k: i32,
    pub level: u8,
}

impl CellCoord {
    /// Checked constructor enforcing the level cap and anchor alignment.
    pub fn new(i: i32, j: i32, k: i32, level: u8) -> Result<Self> {
        let c = CellCoord { i, j, k, level };
        c.check()?;
        Ok(c)
    }

    pub(crate) fn check(&self) -> Result<()> {
        let w = cell_width(self.level)?;
        for (axis, v) in ["i", "j", "k"].iter().zip(self.anchor()) {
            if v.rem_euclid(w) != 0 {
                return Err(AmrError::Contract(format!(
                    "anchor {axis}={v} is not a multiple of {w} (level {})",
                    self.level
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn anchor(&self) -> [i64; 3] {
        [self.i as i64, self.j as i64, self.k as i64]
    }

    #[inline]
    pub fn width(&self) -> i64 {
        1i64 << self.level
    }

    /// Whether the integer point `p` lies in this cell's half-open extent.
    #[inline]
    pub fn contains(&self, p: [i64; 3]) -> bool {
        let a = self.anchor();
        (0..3).all(|d| anchor_mask(p[d], self.level) == a[d])
    }
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{};{})", self.i, self.j, self.k, self.level)
    }
}

/// Canonical strict total order on cells: `(i, j, k, level)` ascending.
#[inline]
pub fn cell_key_compare(a: &CellCoord, b: &CellCoord) -> Ordering {
    a.cmp(b)
}

/// A position in finest-level cell units.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl WorldPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        WorldPoint { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Bit patterns of the three coordinates; equality of these is the
    /// vertex identity used by welding.
    #[inline]
    pub fn to_bits(&self) -> [u64; 3] {
        [self.x.to_bits(), self.y.to_bits(), self.z.to_bits()]
    }

    /// Lexicographic `(x, y, z)` order under `f64::total_cmp`.
    #[inline]
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.x
            .total_cmp(&other.x)
            .then(self.y.total_cmp(&other.y))
            .then(self.z.total_cmp(&other.z))
    }

    #[inline]
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.to_bits() == other.to_bits()
    }
}

/// Center of a cell: anchor plus half the width on every axis.
#[inline]
pub fn cell_center(c: &CellCoord) -> WorldPoint {
    let h = 0.5 * c.width() as f64;
    WorldPoint::new(c.i as f64 + h, c.j as f64 + h, c.k as f64 + h)
}

/// Integer axis-aligned box, `min` inclusive and `max` exclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntBox {
    pub min: [i64; 3],
    pub max: [i64; 3],
}

impl IntBox {
    pub fn of_cell(c: &CellCoord) -> Self {
        let a = c.anchor();
        let w = c.width();
        IntBox {
            min: a,
            max: [a[0] + w, a[1] + w, a[2] + w],
        }
    }

    pub fn union(&self, other: &IntBox) -> IntBox {
        let mut out = *self;
        for d in 0..3 {
            out.min[d] = out.min[d].min(other.min[d]);
            out.max[d] = out.max[d].max(other.max[d]);
        }
        out
    }

    /// True when the two half-open boxes share volume.
    pub fn intersects(&self, other: &IntBox) -> bool {
        (0..3).all(|d| self.min[d] < other.max[d] && other.min[d] < self.max[d])
    }

    pub fn extent(&self) -> [i64; 3] {
        [
            self.max[0] - self.min[0],
            self.max[1] - self.min[1],
            self.max[2] - self.min[2],
        ]
    }
}

/// Validated cell set sorted by cell key, one scalar per cell.
#[derive(Clone, Debug)]
pub struct AmrDataset {
    cells: Vec<CellCoord>,
    scalars: Vec<f64>,
    levels: Vec<u8>,
    bbox: IntBox,
}

impl AmrDataset {
    /// Validates and sorts the input. Scalars are permuted with their cells.
    ///
    /// Errors name the offending record by its position in the input.
    pub fn new(cells: Vec<CellCoord>, scalars: Vec<f64>) -> Result<Self> {
        if cells.len() != scalars.len() {
            return Err(AmrError::Contract(format!(
                "{} cells but {} scalars",
                cells.len(),
                scalars.len()
            )));
        }
        if cells.is_empty() {
            return Err(AmrError::EmptyDataset);
        }
        if cells.len() > u32::MAX as usize {
            return Err(AmrError::Overflow(format!(
                "{} cells do not fit 32-bit cell ids",
                cells.len()
            )));
        }
        for (n, (c, s)) in cells.iter().zip(&scalars).enumerate() {
            if c.level > MAX_LEVEL {
                return Err(AmrError::load(
                    n,
                    format!("level {} exceeds the maximum of {MAX_LEVEL}", c.level),
                ));
            }
            if let Err(AmrError::Contract(msg)) = c.check() {
                return Err(AmrError::load(n, msg));
            }
            if !s.is_finite() {
                return Err(AmrError::load(n, format!("scalar {s} is not finite")));
            }
        }

        let mut pairs: Vec<(CellCoord, f64)> = cells.into_iter().zip(scalars).collect();
        pairs.par_sort_by(|a, b| a.0.cmp(&b.0));
        let (cells, scalars): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();

        let mut present = [false; MAX_LEVEL as usize + 1];
        let mut bbox = IntBox::of_cell(&cells[0]);
        for c in &cells {
            present[c.level as usize] = true;
            bbox = bbox.union(&IntBox::of_cell(c));
        }
        let levels = (0..=MAX_LEVEL).filter(|&l| present[l as usize]).collect();

        Ok(AmrDataset {
            cells,
            scalars,
            levels,
            bbox,
        })
    }

    #[inline]
    pub fn cells(&self) -> &[CellCoord] {
        &self.cells
    }

    #[inline]
    pub fn scalars(&self) -> &[f64] {
        &self.scalars
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Distinct levels present, ascending (finest first).
    pub fn level_set(&self) -> &[u8] {
        &self.levels
    }

    pub fn max_level(&self) -> u8 {
        *self.levels.last().expect("dataset is never empty")
    }

    pub fn bbox(&self) -> IntBox {
        self.bbox
    }

    pub fn min_scalar(&self) -> f64 {
        self.scalars.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_scalar(&self) -> f64 {
        self.scalars
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
