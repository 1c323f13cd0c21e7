//! Synthetic benchmark scenes: an elliptical object on a shaded background
//! with uniform noise, plus robot-placed seeds.

use rand::Rng;
use spmrf::seg::{robot_user, Mask, Seeds};
use spmrf::{GridGeometry, RgbImage};

pub fn scene(rng: &mut impl Rng, width: usize, height: usize, noise: f64) -> (RgbImage, Mask) {
    let g = GridGeometry::new(width, height).expect("positive size");
    let (w, h) = (width as f64, height as f64);
    let (cx, cy) = (w * rng.gen_range(0.4..0.6), h * rng.gen_range(0.4..0.6));
    let (rx, ry) = (w * rng.gen_range(0.15..0.3), h * rng.gen_range(0.15..0.3));
    let fg: [f64; 3] = [rng.gen_range(0.6..0.9), rng.gen_range(0.1..0.4), rng.gen_range(0.1..0.4)];
    let bg: [f64; 3] = [rng.gen_range(0.1..0.4), rng.gen_range(0.3..0.6), rng.gen_range(0.6..0.9)];
    let inside = |x: usize, y: usize| {
        let (dx, dy) = ((x as f64 + 0.5 - cx) / rx, (y as f64 + 0.5 - cy) / ry);
        dx * dx + dy * dy <= 1.0
    };
    let truth = Mask::from_fn(g, inside);
    let image = RgbImage::from_fn(g, |x, y| {
        let base = if inside(x, y) { fg } else { bg.map(|c| c * (0.85 + 0.3 * y as f64 / h)) };
        std::array::from_fn(|c| (base[c] + rng.gen_range(-noise..=noise)).clamp(0.0, 1.0))
    });
    (image, truth)
}

/// One foreground and one background disk, placed by the robot user against
/// an all-background and an all-foreground mask.
pub fn robot_seeds(truth: &Mask, radius: usize) -> spmrf::Result<Seeds> {
    let g = truth.geometry();
    let none = Mask::new(g, vec![false; g.pixel_count()])?;
    let all = Mask::new(g, vec![true; g.pixel_count()])?;
    let fg = robot_user(&none, truth, radius)?;
    let bg = robot_user(&all, truth, radius)?;
    Ok(fg.to_seeds().union(&bg.to_seeds()))
}
