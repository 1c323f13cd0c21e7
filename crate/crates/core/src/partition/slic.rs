//! Grid-seeded k-means over (r, g, b, x, y) with a compactness-weighted
//! spatial term, followed by a connectivity pass.

use super::SuperpixelPartition;
use crate::error::{Error, Result};
use crate::grid::connected_components;
use crate::raster::RgbImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicParams {
    pub target_count: usize,
    /// Spatial weight on the conventional 0..100 color scale.
    pub compactness: f64,
    pub iterations: usize,
}

impl SlicParams {
    pub fn new(target_count: usize) -> Self {
        Self { target_count, compactness: 10.0, iterations: 10 }
    }
}

// colors live in [0, 1]; compactness is quoted against a 0..100 range
const COLOR_SCALE: f64 = 100.0;

#[derive(Debug, Clone, Copy)]
struct Center {
    color: [f64; 3],
    x: f64,
    y: f64,
}

pub fn slic_superpixels(image: &RgbImage, params: &SlicParams) -> Result<SuperpixelPartition> {
    let geometry = image.geometry();
    let n = geometry.pixel_count();
    let target = params.target_count;
    if target > n {
        return Err(Error::TargetCountTooLarge { target, pixels: n });
    }
    if target == 0 {
        return Err(Error::MalformedPartition("target superpixel count must be positive".into()));
    }
    if target == 1 {
        return Ok(SuperpixelPartition::single(geometry));
    }
    let (w, h) = (geometry.width(), geometry.height());
    let (wf, hf) = (w as f64, h as f64);

    let nx = ((target as f64 * wf / hf).sqrt().round() as usize).clamp(1, w.min(target));
    let ny = ((target as f64 / nx as f64).round() as usize).clamp(1, h);
    let (step_x, step_y) = (wf / nx as f64, hf / ny as f64);
    let step = (step_x * step_y).sqrt();
    let spatial_weight = (params.compactness / COLOR_SCALE).powi(2) / (step * step);
    let (radius_x, radius_y) = (step_x.ceil() as i64, step_y.ceil() as i64);

    let mut centers: Vec<Center> = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let x = (i as f64 + 0.5) * step_x;
            let y = (j as f64 + 0.5) * step_y;
            let px = (x.floor() as usize).min(w - 1);
            let py = (y.floor() as usize).min(h - 1);
            centers.push(Center { color: image.pixel(geometry.index(px, py)), x, y });
        }
    }

    let mut labels: Vec<u32> = (0..n)
        .map(|p| {
            let (x, y) = geometry.coords(p);
            let i = ((x as f64 / step_x) as usize).min(nx - 1);
            let j = ((y as f64 / step_y) as usize).min(ny - 1);
            (j * nx + i) as u32
        })
        .collect();
    let mut dist = vec![f64::INFINITY; n];

    for _ in 0..params.iterations.max(1) {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        for (c, center) in centers.iter().enumerate() {
            let cx = center.x.floor() as i64;
            let cy = center.y.floor() as i64;
            let y0 = (cy - radius_y).max(0) as usize;
            let y1 = ((cy + radius_y).min(h as i64 - 1)) as usize;
            let x0 = (cx - radius_x).max(0) as usize;
            let x1 = ((cx + radius_x).min(w as i64 - 1)) as usize;
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let p = geometry.index(x, y);
                    let rgb = image.pixel(p);
                    let dc: f64 = (0..3).map(|k| (rgb[k] - center.color[k]).powi(2)).sum();
                    let dx = x as f64 + 0.5 - center.x;
                    let dy = y as f64 + 0.5 - center.y;
                    let d = dc + spatial_weight * (dx * dx + dy * dy);
                    if d < dist[p] {
                        dist[p] = d;
                        labels[p] = c as u32;
                    }
                }
            }
        }

        let mut sums = vec![[0.0f64; 6]; centers.len()];
        for (p, &c) in labels.iter().enumerate() {
            let (x, y) = geometry.coords(p);
            let rgb = image.pixel(p);
            let s = &mut sums[c as usize];
            s[0] += rgb[0];
            s[1] += rgb[1];
            s[2] += rgb[2];
            s[3] += x as f64 + 0.5;
            s[4] += y as f64 + 0.5;
            s[5] += 1.0;
        }
        for (center, s) in centers.iter_mut().zip(&sums) {
            if s[5] > 0.0 {
                *center = Center { color: [s[0] / s[5], s[1] / s[5], s[2] / s[5]], x: s[3] / s[5], y: s[4] / s[5] };
            }
        }
    }

    let merged = enforce_connectivity(image, &labels);
    SuperpixelPartition::from_labels(geometry, &merged)
}

/// Keeps the largest 4-connected piece of every label and merges each remaining
/// piece into the largest adjacent already-resolved superpixel.
fn enforce_connectivity(image: &RgbImage, labels: &[u32]) -> Vec<u32> {
    let geometry = image.geometry();
    let (comp, n_comp) = connected_components(geometry, |_| true, |p, q| labels[p] == labels[q]);

    let mut comp_size = vec![0usize; n_comp];
    let mut comp_label = vec![0u32; n_comp];
    for (p, &c) in comp.iter().enumerate() {
        comp_size[c as usize] += 1;
        comp_label[c as usize] = labels[p];
    }

    let n_labels = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut main_comp = vec![usize::MAX; n_labels];
    for c in 0..n_comp {
        let l = comp_label[c] as usize;
        if main_comp[l] == usize::MAX || comp_size[c] > comp_size[main_comp[l]] {
            main_comp[l] = c;
        }
    }

    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n_comp];
    for p in 0..geometry.pixel_count() {
        for q in geometry.neighbors4(p) {
            let (a, b) = (comp[p] as usize, comp[q] as usize);
            if a != b {
                neighbors[a].push(b);
            }
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
        list.dedup();
    }

    // final label per component; kept pieces resolve immediately
    let mut resolved: Vec<Option<u32>> = vec![None; n_comp];
    let mut label_size = vec![0usize; n_labels];
    for (l, &c) in main_comp.iter().enumerate() {
        if c != usize::MAX {
            resolved[c] = Some(l as u32);
            label_size[l] = comp_size[c];
        }
    }
    let mut pending: Vec<usize> = (0..n_comp).filter(|&c| resolved[c].is_none()).collect();
    while !pending.is_empty() {
        let mut still = Vec::new();
        for &c in &pending {
            let target = neighbors[c]
                .iter()
                .filter_map(|&d| resolved[d])
                .max_by(|&a, &b| label_size[a as usize].cmp(&label_size[b as usize]).then(b.cmp(&a)));
            match target {
                Some(l) => {
                    resolved[c] = Some(l);
                    label_size[l as usize] += comp_size[c];
                }
                None => still.push(c),
            }
        }
        // every unresolved cluster borders a resolved one, so this always shrinks
        debug_assert!(still.len() < pending.len());
        pending = still;
    }

    comp.iter().map(|&c| resolved[c as usize].expect("all components resolved")).collect()
}
