//! Grid utilities shared by the partition and segmentation code: 4-connected
//! component labeling and an exact Euclidean distance transform.

use std::collections::VecDeque;

use crate::mrf::GridGeometry;

/// 4-connected components of pixels for which `include` holds, where two
/// neighbors are joined when `same(p, q)`. Components are numbered in order of
/// their first pixel in raster order; excluded pixels get `u32::MAX`.
pub fn connected_components(
    geometry: GridGeometry,
    include: impl Fn(usize) -> bool,
    same: impl Fn(usize, usize) -> bool,
) -> (Vec<u32>, usize) {
    let n = geometry.pixel_count();
    let mut comp = vec![u32::MAX; n];
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if comp[start] != u32::MAX || !include(start) {
            continue;
        }
        comp[start] = count;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            for q in geometry.neighbors4(p) {
                if comp[q] == u32::MAX && include(q) && same(p, q) {
                    comp[q] = count;
                    queue.push_back(q);
                }
            }
        }
        count += 1;
    }
    (comp, count as usize)
}

/// Squared Euclidean distance from every pixel to the nearest pixel where
/// `target` is true (Felzenszwalb-Huttenlocher lower envelope, exact).
/// Pixels with no reachable target get `f64::INFINITY`.
pub fn squared_distance_transform(geometry: GridGeometry, target: &[bool]) -> Vec<f64> {
    let (w, h) = (geometry.width(), geometry.height());
    let mut grid: Vec<f64> = target.iter().map(|&t| if t { 0.0 } else { f64::INFINITY }).collect();
    let mut column = vec![0.0; h];
    let mut out = vec![0.0; w.max(h)];
    for x in 0..w {
        for y in 0..h {
            column[y] = grid[y * w + x];
        }
        transform_1d(&column, &mut out[..h]);
        for y in 0..h {
            grid[y * w + x] = out[y];
        }
    }
    let mut row = vec![0.0; w];
    for y in 0..h {
        row.copy_from_slice(&grid[y * w..(y + 1) * w]);
        transform_1d(&row, &mut out[..w]);
        grid[y * w..(y + 1) * w].copy_from_slice(&out[..w]);
    }
    grid
}

fn transform_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    // parabola vertices and the boundaries between them
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k: isize = -1;
    for q in 0..n {
        if f[q].is_infinite() {
            continue;
        }
        loop {
            if k < 0 {
                k = 0;
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
                break;
            }
            let vk = v[k as usize];
            let s = ((f[q] + (q * q) as f64) - (f[vk] + (vk * vk) as f64)) / (2.0 * (q as f64 - vk as f64));
            if s <= z[k as usize] {
                k -= 1;
                continue;
            }
            k += 1;
            v[k as usize] = q;
            z[k as usize] = s;
            z[k as usize + 1] = f64::INFINITY;
            break;
        }
    }
    if k < 0 {
        d.iter_mut().for_each(|x| *x = f64::INFINITY);
        return;
    }
    let mut j = 0usize;
    for (q, out) in d.iter_mut().enumerate() {
        while z[j + 1] < q as f64 {
            j += 1;
        }
        let diff = q as f64 - v[j] as f64;
        *out = diff * diff + f[v[j]];
    }
}
