//! Superpixel partitions of a pixel grid.
//!
//! A partition assigns every pixel exactly one superpixel index in `[0, K)`.
//! Indices are always kept in first-occurrence order (the superpixel of pixel
//! 0 is 0, the next new superpixel met in raster order is 1, ...), which makes
//! the representation canonical: two partitions with the same cells compare
//! equal and serialize identically.

mod io;
mod slic;

use std::collections::{BTreeMap, HashMap};

pub use io::{load_partition, load_partition_csv, load_partition_pgm, save_partition_csv, save_partition_pgm};
pub use slic::{slic_superpixels, SlicParams};

use crate::error::{Error, Result};
use crate::grid::connected_components;
use crate::mrf::{GridGeometry, NeighborPair};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperpixelPartition {
    geometry: GridGeometry,
    labels: Vec<u32>,
    count: usize,
}

impl SuperpixelPartition {
    /// Builds a partition from arbitrary per-pixel ids, relabeling them densely
    /// in first-occurrence order.
    pub fn from_labels(geometry: GridGeometry, raw: &[u32]) -> Result<Self> {
        if raw.len() != geometry.pixel_count() {
            return Err(Error::DimensionMismatch {
                what: "partition labels",
                expected: geometry.pixel_count(),
                actual: raw.len(),
            });
        }
        let mut remap: HashMap<u32, u32> = HashMap::new();
        let labels = raw
            .iter()
            .map(|id| {
                let next = remap.len() as u32;
                *remap.entry(*id).or_insert(next)
            })
            .collect();
        Ok(Self { geometry, labels, count: remap.len() })
    }

    pub fn identity(geometry: GridGeometry) -> Self {
        let n = geometry.pixel_count();
        Self { geometry, labels: (0..n as u32).collect(), count: n }
    }

    pub fn single(geometry: GridGeometry) -> Self {
        Self { geometry, labels: vec![0; geometry.pixel_count()], count: 1 }
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    /// Number of superpixels `K`.
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn label(&self, p: usize) -> usize {
        self.labels[p] as usize
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &k in &self.labels {
            sizes[k as usize] += 1;
        }
        sizes
    }

    /// Pixel sets `Omega_k`, each in raster order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.count];
        for (p, &k) in self.labels.iter().enumerate() {
            members[k as usize].push(p);
        }
        members
    }

    /// Number of 4-connected pieces of each superpixel.
    pub fn component_counts(&self) -> Vec<usize> {
        let (comp, n) = connected_components(self.geometry, |_| true, |p, q| self.labels[p] == self.labels[q]);
        let mut seen = vec![false; n];
        let mut counts = vec![0; self.count];
        for (p, &c) in comp.iter().enumerate() {
            if !seen[c as usize] {
                seen[c as usize] = true;
                counts[self.label(p)] += 1;
            }
        }
        counts
    }

    pub fn is_connected(&self) -> bool {
        self.component_counts().iter().all(|&c| c == 1)
    }

    /// Pixels with a 4-neighbor in a different superpixel.
    pub fn boundary_mask(&self) -> Vec<bool> {
        (0..self.geometry.pixel_count())
            .map(|p| self.geometry.neighbors4(p).any(|q| self.labels[q] != self.labels[p]))
            .collect()
    }
}

pub fn identity_partition(geometry: GridGeometry) -> SuperpixelPartition {
    SuperpixelPartition::identity(geometry)
}

/// Superpixel pairs `(k, l)`, `k < l`, joined by at least one pixel pair, with
/// the number of crossing pixel pairs.
pub fn adjacency(partition: &SuperpixelPartition, pairs: &[NeighborPair]) -> BTreeMap<(usize, usize), usize> {
    let mut out = BTreeMap::new();
    for pair in pairs {
        let (k, l) = (partition.label(pair.p), partition.label(pair.q));
        if k != l {
            *out.entry((k.min(l), k.max(l))).or_insert(0) += 1;
        }
    }
    out
}
