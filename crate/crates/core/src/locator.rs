//! Cell location over the sorted cell array.
//!
//! A point is located by masking it to each candidate level's anchor and
//! binary-searching the sorted cells for that `(anchor, level)` key. No
//! floating point, no tree, and no distinction between interior and
//! boundary cells.

use std::fmt;

use crate::error::Result;
use crate::model::{anchor_mask, AmrDataset, CellCoord};

/// Position of a cell in the dataset's sorted cell array.
///
/// Because the array is sorted by cell key, comparing two ids of distinct
/// cells gives the same answer as comparing their keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CellId(pub u32);

impl CellId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Sorts the input and wraps it as a dataset ready for indexing.
pub fn build_index(cells: Vec<CellCoord>, scalars: Vec<f64>) -> Result<AmrDataset> {
    AmrDataset::new(cells, scalars)
}

/// Read-only query view over a sorted dataset.
#[derive(Clone, Copy, Debug)]
pub struct CellIndex<'a> {
    dataset: &'a AmrDataset,
}

impl<'a> CellIndex<'a> {
    pub fn new(dataset: &'a AmrDataset) -> Self {
        CellIndex { dataset }
    }

    #[inline]
    pub fn dataset(&self) -> &'a AmrDataset {
        self.dataset
    }

    #[inline]
    pub fn level_set(&self) -> &'a [u8] {
        self.dataset.level_set()
    }

    #[inline]
    pub fn cell(&self, id: CellId) -> &'a CellCoord {
        &self.dataset.cells()[id.index()]
    }

    #[inline]
    pub fn scalar(&self, id: CellId) -> f64 {
        self.dataset.scalars()[id.index()]
    }

    pub fn ids(&self) -> impl Iterator<Item = CellId> {
        (0..self.dataset.len() as u32).map(CellId)
    }

    /// The cell whose coordinates equal `c` in all four fields.
    #[inline]
    pub fn find_exact(&self, c: &CellCoord) -> Option<CellId> {
        self.dataset
            .cells()
            .binary_search(c)
            .ok()
            .map(|n| CellId(n as u32))
    }

    #[inline]
    fn probe(&self, p: [i64; 3], level: u8) -> Option<CellId> {
        let mut a = [0i32; 3];
        for d in 0..3 {
            a[d] = i32::try_from(anchor_mask(p[d], level)).ok()?;
        }
        self.find_exact(&CellCoord {
            i: a[0],
            j: a[1],
            k: a[2],
            level,
        })
    }

    /// The actual cell whose extent contains the integer point `p`.
    ///
    /// `hint` is probed first; the remaining present levels are probed
    /// finest to coarsest. On an overlap-free dataset the answer does not
    /// depend on probe order. On an invalid dataset the first hit wins.
    #[inline]
    pub fn snap(&self, p: [i64; 3], hint: Option<u8>) -> Option<CellId> {
        if let Some(h) = hint {
            if let Some(id) = self.probe(p, h) {
                return Some(id);
            }
        }
        self.level_set()
            .iter()
            .filter(|&&l| Some(l) != hint)
            .find_map(|&l| self.probe(p, l))
    }

    /// Checks alignment, duplicates and overlaps.
    ///
    /// Overlaps are found by masking each cell's anchor to every coarser
    /// present level and looking for an actual cell there.
    pub fn validate(&self) -> ValidationReport {
        let cells = self.dataset.cells();
        let mut report = ValidationReport::default();
        for (n, c) in cells.iter().enumerate() {
            let id = CellId(n as u32);
            if c.check().is_err() {
                report.misaligned.push(id);
            }
            if n > 0 && cells[n - 1] == *c {
                report.duplicates.push((CellId(n as u32 - 1), id));
            }
            for &l in self.level_set().iter().filter(|&&l| l > c.level) {
                if let Some(other) = self.probe(c.anchor(), l) {
                    report.overlaps.push((other, id));
                }
            }
        }
        report
    }
}

/// Findings of [`CellIndex::validate`]. Empty means the dataset is valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub misaligned: Vec<CellId>,
    /// Pairs of identical cells, lower id first.
    pub duplicates: Vec<(CellId, CellId)>,
    /// `(coarse, fine)` pairs where the coarse cell contains the fine one.
    pub overlaps: Vec<(CellId, CellId)>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.misaligned.is_empty() && self.duplicates.is_empty() && self.overlaps.is_empty()
    }

    /// Human-readable listing, one finding per line.
    pub fn describe(&self, dataset: &AmrDataset) -> String {
        let cell = |id: CellId| dataset.cells()[id.index()];
        let mut out = String::new();
        for &id in &self.misaligned {
            out.push_str(&format!("misaligned {}\n", cell(id)));
        }
        for &(a, b) in &self.duplicates {
            out.push_str(&format!("duplicate {} {}\n", cell(a), cell(b)));
        }
        for &(a, b) in &self.overlaps {
            out.push_str(&format!("overlap {} contains {}\n", cell(a), cell(b)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cc(i: i32, j: i32, k: i32, level: u8) -> CellCoord {
        CellCoord { i, j, k, level }
    }

    fn dataset(cells: &[CellCoord]) -> AmrDataset {
        let scalars = (0..cells.len()).map(|n| n as f64).collect();
        AmrDataset::new(cells.to_vec(), scalars).unwrap()
    }

    /// Random overlap-free dataset: a block of level-2 cells, each either
    /// kept, dropped, or refined once or twice at random.
    fn random_octree(rng: &mut ChaCha8Rng, n: i32) -> AmrDataset {
        fn split(rng: &mut ChaCha8Rng, c: CellCoord, out: &mut Vec<CellCoord>) {
            let r: f64 = rng.gen();
            if r < 0.1 {
                return;
            }
            if c.level == 0 || r < 0.5 {
                out.push(c);
                return;
            }
            let h = 1 << (c.level - 1);
            for d in 0..8 {
                let child = cc(
                    c.i + h * (d & 1),
                    c.j + h * ((d >> 1) & 1),
                    c.k + h * ((d >> 2) & 1),
                    c.level - 1,
                );
                split(rng, child, out);
            }
        }
        let mut cells = Vec::new();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    split(rng, cc(4 * x - 4, 4 * y, 4 * z - 8, 2), &mut cells);
                }
            }
        }
        if cells.is_empty() {
            cells.push(cc(0, 0, 0, 0));
        }
        dataset(&cells)
    }

    #[test]
    fn build_sorts() {
        let ds = build_index(vec![cc(2, 0, 0, 1), cc(0, 0, 0, 0)], vec![1.0, 2.0]).unwrap();
        assert_eq!(ds.cells(), &[cc(0, 0, 0, 0), cc(2, 0, 0, 1)]);
        let ds = build_index(vec![cc(8, 8, 8, 3)], vec![1.0]).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.level_set(), &[3]);
    }

    #[test]
    fn build_matches_pair_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut cells = Vec::new();
        let mut scalars = Vec::new();
        for n in 0..1000 {
            let l: u8 = rng.gen_range(0..4);
            let w = 1 << l;
            cells.push(cc(
                rng.gen_range(-50..50) * w,
                rng.gen_range(-50..50) * w,
                rng.gen_range(-50..50) * w,
                l,
            ));
            scalars.push(n as f64);
        }
        let mut oracle: Vec<(CellCoord, f64)> =
            cells.iter().copied().zip(scalars.iter().copied()).collect();
        oracle.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let ds = build_index(cells, scalars).unwrap();
        assert!(ds.cells().windows(2).all(|w| w[0] <= w[1]));
        let got: Vec<(CellCoord, f64)> = ds
            .cells()
            .iter()
            .copied()
            .zip(ds.scalars().iter().copied())
            .collect();
        assert_eq!(got, oracle);
    }

    #[test]
    fn find_exact_examples() {
        let ds = dataset(&[cc(0, 0, 0, 1)]);
        let idx = CellIndex::new(&ds);
        assert_eq!(idx.find_exact(&cc(0, 0, 0, 1)), Some(CellId(0)));
        assert_eq!(idx.find_exact(&cc(0, 0, 0, 0)), None);
    }

    #[test]
    fn snap_examples() {
        let ds = dataset(&[cc(0, 0, 0, 1)]);
        let idx = CellIndex::new(&ds);
        assert_eq!(idx.snap([1, 1, 1], None), Some(CellId(0)));
        assert_eq!(idx.snap([2, 0, 0], None), None);
        assert_eq!(idx.snap([-1, 0, 0], None), None);

        let mut cells = Vec::new();
        for d in 0..8 {
            cells.push(cc(d & 1, (d >> 1) & 1, (d >> 2) & 1, 0));
        }
        cells.push(cc(0, 0, 2, 1));
        let ds = dataset(&cells);
        let idx = CellIndex::new(&ds);
        let id = idx.snap([1, 1, 3], None).unwrap();
        assert_eq!(*idx.cell(id), cc(0, 0, 2, 1));
        assert_eq!(idx.snap([1, 1, 3], Some(0)), Some(id));
        assert_eq!(idx.snap([1, 1, 3], Some(7)), Some(id));
    }

    #[test]
    fn snap_handles_far_points() {
        let ds = dataset(&[cc(0, 0, 0, 0)]);
        let idx = CellIndex::new(&ds);
        assert_eq!(idx.snap([i64::from(i32::MAX) + 5, 0, 0], None), None);
        assert_eq!(idx.snap([i64::from(i32::MIN) - 5, 0, 0], Some(0)), None);
    }

    #[test]
    fn snap_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let ds = random_octree(&mut rng, 3);
            let idx = CellIndex::new(&ds);
            for _ in 0..1000 {
                let p = [
                    rng.gen_range(-6..10),
                    rng.gen_range(-2..14),
                    rng.gen_range(-10..6),
                ];
                let oracle = ds
                    .cells()
                    .iter()
                    .position(|c| c.contains(p))
                    .map(|n| CellId(n as u32));
                assert_eq!(idx.snap(p, None), oracle);
                let hint = rng.gen_range(0..4);
                assert_eq!(idx.snap(p, Some(hint)), oracle);
            }
        }
    }

    #[test]
    fn find_exact_round_trip_and_self_snap() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ds = random_octree(&mut rng, 4);
        let idx = CellIndex::new(&ds);
        for id in idx.ids() {
            let c = idx.cell(id);
            assert_eq!(idx.find_exact(c), Some(id));
            assert_eq!(idx.snap(c.anchor(), None), Some(id));
        }
    }

    #[test]
    fn validation() {
        let ds = dataset(&[cc(0, 0, 0, 0), cc(0, 0, 0, 1)]);
        let report = CellIndex::new(&ds).validate();
        assert_eq!(report.overlaps, vec![(CellId(1), CellId(0))]);
        assert!(!report.is_clean());
        assert!(report
            .describe(&ds)
            .contains("overlap (0,0,0;1) contains (0,0,0;0)"));

        let ds = dataset(&[cc(4, 4, 4, 2)]);
        assert!(CellIndex::new(&ds).validate().is_clean());

        let ds = dataset(&[cc(4, 4, 4, 2), cc(4, 4, 4, 2)]);
        let report = CellIndex::new(&ds).validate();
        assert_eq!(report.duplicates, vec![(CellId(0), CellId(1))]);

        let ds = dataset(&[cc(0, 0, 0, 3), cc(7, 7, 7, 0)]);
        assert_eq!(CellIndex::new(&ds).validate().overlaps.len(), 1);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let ds = random_octree(&mut rng, 3);
            assert!(CellIndex::new(&ds).validate().is_clean());
        }
    }

    proptest! {
        #[test]
        fn probe_order_does_not_matter(seed in any::<u64>(), x in -6i64..10, y in -2i64..14, z in -10i64..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ds = random_octree(&mut rng, 2);
            let idx = CellIndex::new(&ds);
            let base = idx.snap([x, y, z], None);
            for h in 0..4 {
                prop_assert_eq!(idx.snap([x, y, z], Some(h)), base);
            }
            let hits = ds.cells().iter().filter(|c| c.contains([x, y, z])).count();
            prop_assert!(hits <= 1);
        }
    }
}
