use crate::error::{Error, Result};
use crate::mrf::{GridGeometry, NeighborPair};
use crate::raster::{self, RgbImage};

/// Weight of a pair touching an edge pixel: `exp(-5)`.
pub const EDGE_PAIR_WEIGHT: f64 = 0.006_737_946_999_085_467;
/// Weight of a pair away from edges.
pub const PLAIN_PAIR_WEIGHT: f64 = 20.0;

/// Binary per-pixel edge indicator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    geometry: GridGeometry,
    edges: Vec<bool>,
}

impl EdgeMap {
    pub fn new(geometry: GridGeometry, edges: Vec<bool>) -> Result<Self> {
        if edges.len() != geometry.pixel_count() {
            return Err(Error::DimensionMismatch { what: "edge map", expected: geometry.pixel_count(), actual: edges.len() });
        }
        Ok(Self { geometry, edges })
    }

    pub fn empty(geometry: GridGeometry) -> Self {
        Self { geometry, edges: vec![false; geometry.pixel_count()] }
    }

    /// PGM or PNG; any non-zero sample marks an edge.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let (geometry, edges) = raster::decode_binary(bytes)?;
        Self::new(geometry, edges)
    }

    /// Pixels whose luminance gradient magnitude (central differences,
    /// clamped at the border) is non-zero and at least its 90th percentile.
    pub fn from_gradient(image: &RgbImage) -> Self {
        let g = image.geometry();
        let (w, h) = (g.width(), g.height());
        let lum: Vec<f64> = (0..g.pixel_count()).map(|p| image.luminance(p)).collect();
        let magnitude: Vec<f64> = (0..g.pixel_count())
            .map(|p| {
                let (x, y) = g.coords(p);
                let gx = (lum[g.index((x + 1).min(w - 1), y)] - lum[g.index(x.saturating_sub(1), y)]) / 2.0;
                let gy = (lum[g.index(x, (y + 1).min(h - 1))] - lum[g.index(x, y.saturating_sub(1))]) / 2.0;
                (gx * gx + gy * gy).sqrt()
            })
            .collect();
        let mut sorted = magnitude.clone();
        sorted.sort_by(f64::total_cmp);
        // nearest-rank percentile
        let rank = ((0.9 * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
        let threshold = sorted[rank - 1];
        Self { geometry: g, edges: magnitude.iter().map(|&m| m > 0.0 && m >= threshold).collect() }
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    #[inline]
    pub fn is_edge(&self, p: usize) -> bool {
        self.edges[p]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.edges
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        raster::encode_binary_pgm(self.geometry, &self.edges)
    }
}

/// Potts weight per 4-adjacency: `exp(-5 I_e(p,q))` when `p` or `q` is an
/// edge pixel, otherwise 20. Sorted by `(p, q)`.
pub fn edge_pairwise_weights(edges: &EdgeMap) -> Vec<(NeighborPair, f64)> {
    edges
        .geometry
        .grid_pairs()
        .into_iter()
        .map(|pair| {
            let on_edge = edges.is_edge(pair.p) || edges.is_edge(pair.q);
            (pair, if on_edge { EDGE_PAIR_WEIGHT } else { PLAIN_PAIR_WEIGHT })
        })
        .collect()
}
