//! Seed-driven interactive segmentation on top of the superpixel MRF.

mod edges;
mod metrics;
mod pipeline;
mod robot;
mod unary;

use std::collections::BTreeSet;

pub use edges::{edge_pairwise_weights, EdgeMap, EDGE_PAIR_WEIGHT, PLAIN_PAIR_WEIGHT};
pub use metrics::{boundary_deviation, boundary_pixels, overlap_ratio, user_effort};
pub use pipeline::{build_potts_model, segment_pixel, segment_superpixel, SegmentParams, Segmentation, Timings};
pub use robot::{robot_user, superpixel_majority, RobotSeed};
pub use unary::{hard_constraint_magnitude, seed_unary, UnaryParams};

use crate::error::{Error, Result};
use crate::mrf::{GridGeometry, Labeling};
use crate::raster;

/// A binary per-pixel mask (segmentation result or ground truth).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    geometry: GridGeometry,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(geometry: GridGeometry, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != geometry.pixel_count() {
            return Err(Error::DimensionMismatch { what: "mask", expected: geometry.pixel_count(), actual: bits.len() });
        }
        Ok(Self { geometry, bits })
    }

    pub fn from_fn(geometry: GridGeometry, f: impl Fn(usize, usize) -> bool) -> Self {
        let bits = (0..geometry.pixel_count())
            .map(|p| {
                let (x, y) = geometry.coords(p);
                f(x, y)
            })
            .collect();
        Self { geometry, bits }
    }

    pub fn from_labeling(geometry: GridGeometry, labeling: Labeling) -> Result<Self> {
        Self::new(geometry, labeling.into_bits())
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    #[inline]
    pub fn get(&self, p: usize) -> bool {
        self.bits[p]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let (geometry, bits) = raster::decode_binary(bytes)?;
        Self::new(geometry, bits)
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        raster::encode_binary_pgm(self.geometry, &self.bits)
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        raster::encode_binary_png(self.geometry, &self.bits)
    }
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl BoundingBox {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

/// User input: hard foreground/background pixels and an optional box outside
/// of which everything is background.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Seeds {
    pub fg: BTreeSet<usize>,
    pub bg: BTreeSet<usize>,
    pub bbox: Option<BoundingBox>,
}

impl Seeds {
    /// Builds seeds from pixel coordinates, rejecting anything off the grid.
    pub fn from_coords(
        geometry: GridGeometry,
        fg: &[[i64; 2]],
        bg: &[[i64; 2]],
        bbox: Option<[i64; 4]>,
    ) -> Result<Self> {
        let to_index = |&[x, y]: &[i64; 2]| {
            if geometry.contains(x, y) {
                Ok(geometry.index(x as usize, y as usize))
            } else {
                Err(Error::SeedConflict(format!("seed ({x}, {y}) lies outside the {geometry} image")))
            }
        };
        let fg = fg.iter().map(to_index).collect::<Result<_>>()?;
        let bg = bg.iter().map(to_index).collect::<Result<_>>()?;
        let bbox = match bbox {
            None => None,
            Some([x0, y0, x1, y1]) => {
                if !geometry.contains(x0, y0) || !geometry.contains(x1, y1) || x0 > x1 || y0 > y1 {
                    return Err(Error::SeedConflict(format!("box [{x0}, {y0}, {x1}, {y1}] is not inside the image")));
                }
                Some(BoundingBox { x0: x0 as usize, y0: y0 as usize, x1: x1 as usize, y1: y1 as usize })
            }
        };
        let seeds = Self { fg, bg, bbox };
        seeds.validate(geometry)?;
        Ok(seeds)
    }

    pub fn is_empty(&self) -> bool {
        self.fg.is_empty() && self.bg.is_empty() && self.bbox.is_none()
    }

    pub fn validate(&self, geometry: GridGeometry) -> Result<()> {
        let n = geometry.pixel_count();
        if let Some(&p) = self.fg.iter().chain(&self.bg).find(|&&p| p >= n) {
            return Err(Error::SeedConflict(format!("seed pixel {p} lies outside the {geometry} image")));
        }
        if let Some(&p) = self.fg.intersection(&self.bg).next() {
            let (x, y) = geometry.coords(p);
            return Err(Error::SeedConflict(format!("pixel ({x}, {y}) is both foreground and background")));
        }
        if let Some(b) = self.bbox {
            if b.x1 >= geometry.width() || b.y1 >= geometry.height() || b.x0 > b.x1 || b.y0 > b.y1 {
                return Err(Error::SeedConflict("box is not inside the image".into()));
            }
            if let Some(&p) = self.fg.iter().find(|&&p| {
                let (x, y) = geometry.coords(p);
                !b.contains(x, y)
            }) {
                let (x, y) = geometry.coords(p);
                return Err(Error::SeedConflict(format!("foreground seed ({x}, {y}) lies outside the box")));
            }
        }
        Ok(())
    }

    /// Seed union; a box in `other` replaces the current one.
    pub fn union(&self, other: &Seeds) -> Seeds {
        Seeds {
            fg: self.fg.union(&other.fg).copied().collect(),
            bg: self.bg.union(&other.bg).copied().collect(),
            bbox: other.bbox.or(self.bbox),
        }
    }

    /// All seed pixels as `(x, y)` coordinates.
    pub fn points(&self, geometry: GridGeometry) -> Vec<(f64, f64)> {
        self.fg
            .iter()
            .chain(&self.bg)
            .map(|&p| {
                let (x, y) = geometry.coords(p);
                (x as f64, y as f64)
            })
            .collect()
    }
}
