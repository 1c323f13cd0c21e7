use crate::error::{Error, Result};
use crate::raster::RgbImage;

use super::Seeds;

/// Color model for the data term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnaryParams {
    /// Histogram bins per RGB channel.
    pub bins: usize,
    /// Additive (Laplace) smoothing per bin.
    pub smoothing: f64,
    /// Scale of the soft unaries.
    pub lambda: f64,
}

impl Default for UnaryParams {
    fn default() -> Self {
        Self { bins: 16, smoothing: 1.0, lambda: 1.0 }
    }
}

/// Per-channel smoothed histograms; the color likelihood is their product.
struct ColorModel {
    bins: usize,
    log_prob: [Vec<f64>; 3],
}

impl ColorModel {
    fn fit(image: &RgbImage, samples: &[usize], params: &UnaryParams) -> Self {
        let bins = params.bins;
        let denom = samples.len() as f64 + params.smoothing * bins as f64;
        let log_prob = std::array::from_fn(|c| {
            let channel = image.channel(c);
            let mut counts = vec![0usize; bins];
            for &p in samples {
                counts[bin_of(channel[p], bins)] += 1;
            }
            counts.iter().map(|&n| ((n as f64 + params.smoothing) / denom).ln()).collect()
        });
        Self { bins, log_prob }
    }

    fn log_likelihood(&self, rgb: [f64; 3]) -> f64 {
        (0..3).map(|c| self.log_prob[c][bin_of(rgb[c], self.bins)]).sum()
    }
}

#[inline]
fn bin_of(v: f64, bins: usize) -> usize {
    ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1)
}

/// Magnitude used for hard constraints given the largest soft unary.
pub fn hard_constraint_magnitude(max_soft: f64) -> f64 {
    1e6 * (max_soft + 1.0)
}

/// Unary weight per pixel: label 1 is foreground, so negative values favor
/// foreground.
///
/// Soft pixels get `lambda * (-ln P_fg + ln P_bg)` from color histograms of
/// the foreground seeds and of the background seeds plus everything outside
/// the box. Seeds and pixels outside the box are pinned with
/// [`hard_constraint_magnitude`].
pub fn seed_unary(image: &RgbImage, seeds: &Seeds, params: &UnaryParams) -> Result<Vec<f64>> {
    let g = image.geometry();
    seeds.validate(g)?;
    if params.bins == 0 || params.smoothing.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !params.lambda.is_finite() {
        return Err(Error::NonFinite("unary parameters".into()));
    }
    let n = g.pixel_count();
    // Some(true): foreground, Some(false): background
    let mut hard: Vec<Option<bool>> = vec![None; n];
    if let Some(b) = seeds.bbox {
        for (p, slot) in hard.iter_mut().enumerate() {
            let (x, y) = g.coords(p);
            if !b.contains(x, y) {
                *slot = Some(false);
            }
        }
    }
    for &p in &seeds.bg {
        hard[p] = Some(false);
    }
    for &p in &seeds.fg {
        hard[p] = Some(true);
    }

    let mut soft = vec![0.0; n];
    let mut max_soft: f64 = 0.0;
    if hard.iter().any(Option::is_none) {
        let fg: Vec<usize> = seeds.fg.iter().copied().collect();
        let bg: Vec<usize> = (0..n).filter(|&p| hard[p] == Some(false)).collect();
        if fg.is_empty() {
            return Err(Error::EmptySeeds("foreground"));
        }
        if bg.is_empty() {
            return Err(Error::EmptySeeds("background"));
        }
        let fg_model = ColorModel::fit(image, &fg, params);
        let bg_model = ColorModel::fit(image, &bg, params);
        for p in (0..n).filter(|&p| hard[p].is_none()) {
            let rgb = image.pixel(p);
            let w = params.lambda * (bg_model.log_likelihood(rgb) - fg_model.log_likelihood(rgb));
            max_soft = max_soft.max(w.abs());
            soft[p] = w;
        }
    }
    let big = hard_constraint_magnitude(max_soft);
    Ok(hard
        .iter()
        .zip(soft)
        .map(|(h, w)| match h {
            Some(true) => -big,
            Some(false) => big,
            None => w,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mrf::GridGeometry;

    fn two_tone() -> RgbImage {
        let g = GridGeometry::new(8, 4).unwrap();
        RgbImage::from_fn(g, |x, _| if x < 4 { [0.9, 0.1, 0.1] } else { [0.1, 0.1, 0.9] })
    }

    #[test]
    fn bins_cover_unit_interval() {
        assert_eq!(bin_of(0.0, 16), 0);
        assert_eq!(bin_of(1.0, 16), 15);
        assert_eq!(bin_of(0.5, 16), 8);
        assert_eq!(bin_of(-3.0, 16), 0);
    }

    #[test]
    fn soft_unaries_match_histogram_oracle() {
        let img = two_tone();
        let g = img.geometry();
        let seeds = Seeds::from_coords(g, &[[0, 0]], &[[7, 0], [7, 1]], None).unwrap();
        let u = seed_unary(&img, &seeds, &UnaryParams::default()).unwrap();
        // fg: 1 red sample; bg: 2 blue samples; 16 bins, smoothing 1
        // red pixel: P_fg = (2/17)(2/17)(2/17), P_bg = (1/18)(3/18)(1/18)
        let red = -(3.0 * (2.0f64 / 17.0).ln()) + ((1.0f64 / 18.0).ln() * 2.0 + (3.0f64 / 18.0).ln());
        let blue = -((2.0f64 / 17.0).ln() + 2.0 * (1.0f64 / 17.0).ln()) + (3.0f64 / 18.0).ln() * 3.0;
        assert!((u[g.index(1, 1)] - red).abs() < 1e-12);
        assert!((u[g.index(5, 1)] - blue).abs() < 1e-12);
        assert!(red < 0.0 && blue > 0.0);
        let big = hard_constraint_magnitude(red.abs().max(blue.abs()));
        assert_eq!(u[0], -big);
        assert_eq!(u[g.index(7, 0)], big);
    }

    #[test]
    fn lambda_scales_soft_terms() {
        let img = two_tone();
        let g = img.geometry();
        let seeds = Seeds::from_coords(g, &[[0, 0]], &[[7, 0]], None).unwrap();
        let a = seed_unary(&img, &seeds, &UnaryParams::default()).unwrap();
        let b = seed_unary(&img, &seeds, &UnaryParams { lambda: 2.5, ..Default::default() }).unwrap();
        let p = g.index(2, 2);
        assert!((b[p] - 2.5 * a[p]).abs() < 1e-12);
    }

    #[test]
    fn box_exterior_is_background() {
        let img = two_tone();
        let g = img.geometry();
        let seeds = Seeds::from_coords(g, &[[1, 1]], &[], Some([0, 0, 3, 3])).unwrap();
        let u = seed_unary(&img, &seeds, &UnaryParams::default()).unwrap();
        let big = u[g.index(7, 3)];
        assert!(big >= 1e6);
        for p in 0..g.pixel_count() {
            let (x, _) = g.coords(p);
            if x >= 4 {
                assert_eq!(u[p], big);
            }
        }
    }

    #[test]
    fn every_pixel_pinned_needs_no_color_model() {
        let g = GridGeometry::new(2, 1).unwrap();
        let img = RgbImage::from_fn(g, |_, _| [0.5; 3]);
        let seeds = Seeds::from_coords(g, &[[0, 0], [1, 0]], &[], None).unwrap();
        assert_eq!(seed_unary(&img, &seeds, &UnaryParams::default()).unwrap(), vec![-1e6, -1e6]);
    }

    #[test]
    fn missing_seed_class_is_an_error() {
        let img = two_tone();
        let g = img.geometry();
        let only_fg = Seeds::from_coords(g, &[[0, 0]], &[], None).unwrap();
        assert!(matches!(seed_unary(&img, &only_fg, &UnaryParams::default()), Err(Error::EmptySeeds("background"))));
        let only_bg = Seeds::from_coords(g, &[], &[[0, 0]], None).unwrap();
        assert!(matches!(seed_unary(&img, &only_bg, &UnaryParams::default()), Err(Error::EmptySeeds("foreground"))));
        assert!(seed_unary(&img, &Seeds::default(), &UnaryParams::default()).is_err());
    }
}
