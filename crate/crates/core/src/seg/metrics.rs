use crate::error::{Error, Result};
use crate::grid::squared_distance_transform;
use crate::mrf::GridGeometry;

use super::Mask;

fn same_geometry(a: &Mask, b: &Mask) -> Result<()> {
    if a.geometry() != b.geometry() {
        return Err(Error::GeometryMismatch { left: a.geometry().to_string(), right: b.geometry().to_string() });
    }
    Ok(())
}

/// `|A ∩ B| / |A ∪ B|`; two empty masks overlap perfectly.
pub fn overlap_ratio(result: &Mask, truth: &Mask) -> Result<f64> {
    same_geometry(result, truth)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&a, &b) in result.as_slice().iter().zip(truth.as_slice()) {
        inter += (a && b) as usize;
        union += (a || b) as usize;
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

/// Mask pixels with a 4-neighbor outside the mask; the image border counts as
/// outside.
pub fn boundary_pixels(mask: &Mask) -> Vec<bool> {
    let g = mask.geometry();
    (0..g.pixel_count())
        .map(|p| {
            if !mask.get(p) {
                return false;
            }
            let (x, y) = g.coords(p);
            let on_border = x == 0 || y == 0 || x + 1 == g.width() || y + 1 == g.height();
            on_border || g.neighbors4(p).any(|q| !mask.get(q))
        })
        .collect()
}

fn mean_distance_to(from: &[bool], to: &[bool], geometry: GridGeometry) -> f64 {
    let dt = squared_distance_transform(geometry, to);
    let (sum, count) = from
        .iter()
        .zip(&dt)
        .filter(|(&b, _)| b)
        .fold((0.0, 0usize), |(s, c), (_, &d)| (s + d.sqrt(), c + 1));
    sum / count as f64
}

/// Symmetric mean distance between the two object boundaries, in pixels.
pub fn boundary_deviation(result: &Mask, truth: &Mask) -> Result<f64> {
    same_geometry(result, truth)?;
    let a = boundary_pixels(result);
    let b = boundary_pixels(truth);
    if !a.contains(&true) {
        return Err(Error::EmptyBoundary("result"));
    }
    if !b.contains(&true) {
        return Err(Error::EmptyBoundary("ground truth"));
    }
    let g = result.geometry();
    Ok(0.5 * (mean_distance_to(&a, &b, g) + mean_distance_to(&b, &a, g)))
}

/// Length of the Euclidean minimum spanning tree over the seed points.
pub fn user_effort(points: &[(f64, f64)]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptySeeds("seed points"));
    }
    let n = points.len();
    let dist = |i: usize, j: usize| (points[i].0 - points[j].0).hypot(points[i].1 - points[j].1);
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let i = (0..n)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .expect("a vertex remains");
        in_tree[i] = true;
        total += best[i];
        for j in 0..n {
            if !in_tree[j] {
                best[j] = best[j].min(dist(i, j));
            }
        }
    }
    Ok(total)
}
