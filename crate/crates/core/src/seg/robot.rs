use crate::error::{Error, Result};
use crate::grid::{connected_components, squared_distance_transform};
use crate::mrf::GridGeometry;
use crate::partition::SuperpixelPartition;

use super::{Mask, Seeds};

/// One simulated correction: a disk of seeds inside the largest wrongly
/// labeled region, carrying the ground-truth label of that region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobotSeed {
    pub foreground: bool,
    pub center: usize,
    pub pixels: Vec<usize>,
}

impl RobotSeed {
    pub fn to_seeds(&self) -> Seeds {
        let mut seeds = Seeds::default();
        let target = if self.foreground { &mut seeds.fg } else { &mut seeds.bg };
        target.extend(self.pixels.iter().copied());
        seeds
    }
}

/// Places the next seed the way a careful user would: find the largest
/// 4-connected error region, pick its most interior pixel (ties go to the
/// first in raster order) and mark the pixels of that region within
/// `radius` of it. Returns [`Error::Converged`] when `mask == truth`.
pub fn robot_user(mask: &Mask, truth: &Mask, radius: usize) -> Result<RobotSeed> {
    let g = mask.geometry();
    if truth.geometry() != g {
        return Err(Error::GeometryMismatch { left: g.to_string(), right: truth.geometry().to_string() });
    }
    let wrong = |p: usize| mask.get(p) != truth.get(p);
    let (comp, count) = connected_components(g, wrong, |p, q| truth.get(p) == truth.get(q));
    if count == 0 {
        return Err(Error::Converged);
    }
    let mut sizes = vec![0usize; count];
    for &c in comp.iter().filter(|&&c| c != u32::MAX) {
        sizes[c as usize] += 1;
    }
    // first maximum wins, and components are numbered in raster order
    let largest = sizes.iter().enumerate().fold(0, |best, (c, &s)| if s > sizes[best] { c } else { best }) as u32;

    // distance to the nearest pixel outside the region, with a one-pixel frame
    // so that the image border also counts as outside
    let padded = GridGeometry::new(g.width() + 2, g.height() + 2)?;
    let outside: Vec<bool> = (0..padded.pixel_count())
        .map(|pp| {
            let (px, py) = padded.coords(pp);
            if px == 0 || py == 0 || px > g.width() || py > g.height() {
                return true;
            }
            comp[g.index(px - 1, py - 1)] != largest
        })
        .collect();
    let dt = squared_distance_transform(padded, &outside);
    let mut center = usize::MAX;
    let mut depth = -1.0;
    for p in (0..g.pixel_count()).filter(|&p| comp[p] == largest) {
        let (x, y) = g.coords(p);
        let d = dt[padded.index(x + 1, y + 1)];
        if d > depth {
            depth = d;
            center = p;
        }
    }

    let (cx, cy) = g.coords(center);
    let r2 = (radius * radius) as i64;
    let pixels = (0..g.pixel_count())
        .filter(|&p| {
            let (x, y) = g.coords(p);
            let (dx, dy) = (x as i64 - cx as i64, y as i64 - cy as i64);
            comp[p] == largest && dx * dx + dy * dy <= r2
        })
        .collect();
    Ok(RobotSeed { foreground: truth.get(center), center, pixels })
}

/// Ground truth relabeled so every superpixel carries its majority label
/// (ties go to background): the closest mask a superpixel-level solver can
/// represent. Feeding this to [`robot_user`] keeps the robot from seeding
/// errors inside mixed superpixels that no superpixel labeling can fix.
pub fn superpixel_majority(truth: &Mask, partition: &SuperpixelPartition) -> Result<Mask> {
    let g = truth.geometry();
    if partition.geometry() != g {
        return Err(Error::GeometryMismatch { left: g.to_string(), right: partition.geometry().to_string() });
    }
    let mut votes = vec![0i64; partition.count()];
    for p in 0..g.pixel_count() {
        votes[partition.label(p)] += if truth.get(p) { 1 } else { -1 };
    }
    Mask::new(g, (0..g.pixel_count()).map(|p| votes[partition.label(p)] > 0).collect())
}
