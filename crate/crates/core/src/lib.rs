//! Binary pixel MRFs, their exact reduction to superpixel-level MRFs, a
//! Boykov-Kolmogorov graph-cut solver and a seed-driven segmentation pipeline.
//!
//! ```
//! use spmrf::{build_grid_mrf, maxflow, superpixelize, GridGeometry, PairwiseWeights, SuperpixelPartition};
//!
//! let g = GridGeometry::new(4, 1).unwrap();
//! let mrf = build_grid_mrf(g, vec![-1.0, -1.0, 2.0, 2.0], |_| PairwiseWeights::potts(0.5)).unwrap();
//! let partition = SuperpixelPartition::from_labels(g, &[0, 0, 1, 1]).unwrap();
//! let (sp, _) = superpixelize(&mrf, &partition).unwrap();
//! let solved = maxflow::solve(&sp).unwrap();
//! assert_eq!(solved.labeling.as_slice(), &[true, false]);
//! assert_eq!(solved.energy, -1.5);
//! ```

pub mod error;
pub mod fixture;
pub mod grid;
pub mod maxflow;
pub mod mrf;
pub mod partition;
pub mod raster;
pub mod seg;
pub mod superpixelize;

pub use error::{Error, Result};
pub use mrf::{
    brute_force_minimize, build_grid_mrf, BinaryEnergy, GridGeometry, Labeling, NeighborPair, PairwiseWeights, PixelMrf,
};
pub use partition::{identity_partition, SuperpixelPartition};
pub use raster::RgbImage;
pub use superpixelize::{lift, restrict, superpixelize, superpixelize_potts, PottsModel, SuperpixelEdge, SuperpixelMrf};
