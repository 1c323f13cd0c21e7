use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::maxflow::{solve, SolveResult};
use crate::partition::SuperpixelPartition;
use crate::raster::RgbImage;
use crate::superpixelize::{lift, superpixelize_potts, PottsModel};

use super::{edge_pairwise_weights, seed_unary, EdgeMap, Mask, Seeds, UnaryParams};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SegmentParams {
    pub unary: UnaryParams,
}

impl SegmentParams {
    pub fn with_lambda(lambda: f64) -> Self {
        Self { unary: UnaryParams { lambda, ..Default::default() } }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    /// Color model and pixel energy.
    pub unary: Duration,
    /// Superpixel reduction; zero at pixel level.
    pub aggregation: Duration,
    /// Graph construction plus max-flow.
    pub solve: Duration,
    pub total: Duration,
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub mask: Mask,
    /// Minimizer of the energy actually solved (superpixel or pixel level).
    pub result: SolveResult,
    pub nodes: usize,
    pub timings: Timings,
}

/// Pixel-level Potts energy for the given seeds and edge map.
pub fn build_potts_model(image: &RgbImage, edges: &EdgeMap, seeds: &Seeds, params: &SegmentParams) -> Result<PottsModel> {
    let g = image.geometry();
    if edges.geometry() != g {
        return Err(Error::GeometryMismatch { left: g.to_string(), right: edges.geometry().to_string() });
    }
    let unary = seed_unary(image, seeds, &params.unary)?;
    Ok(PottsModel { geometry: g, unary, weights: edge_pairwise_weights(edges), constant: 0.0 })
}

/// Segments by solving the superpixel-level reduction and lifting the result.
pub fn segment_superpixel(
    image: &RgbImage,
    edges: &EdgeMap,
    seeds: &Seeds,
    partition: &SuperpixelPartition,
    params: &SegmentParams,
) -> Result<Segmentation> {
    let start = Instant::now();
    let model = build_potts_model(image, edges, seeds, params)?;
    let unary = start.elapsed();
    let t = Instant::now();
    let sp = superpixelize_potts(&model, partition)?;
    let aggregation = t.elapsed();
    let result = solve(&sp)?;
    let mask = Mask::from_labeling(image.geometry(), lift(&result.labeling, partition)?)?;
    let solve_time = result.stats.total();
    Ok(Segmentation {
        mask,
        result,
        nodes: partition.count(),
        timings: Timings { unary, aggregation, solve: solve_time, total: start.elapsed() },
    })
}

/// Segments by solving the pixel-level energy directly.
pub fn segment_pixel(image: &RgbImage, edges: &EdgeMap, seeds: &Seeds, params: &SegmentParams) -> Result<Segmentation> {
    let start = Instant::now();
    let model = build_potts_model(image, edges, seeds, params)?;
    let unary = start.elapsed();
    let result = solve(&model)?;
    let mask = Mask::new(image.geometry(), result.labeling.as_slice().to_vec())?;
    let solve_time = result.stats.total();
    Ok(Segmentation {
        mask,
        result,
        nodes: image.geometry().pixel_count(),
        timings: Timings { unary, aggregation: Duration::ZERO, solve: solve_time, total: start.elapsed() },
    })
}
