//! Binary pairwise MRFs on pixel grids.
//!
//! The energy of a labeling `f` is
//!
//! ```text
//! E(f) = constant + sum_p w_p f_p
//!      + sum_{(p,q)} (w00 !f_p !f_q + w01 !f_p f_q + w10 f_p !f_q + w11 f_p f_q)
//! ```
//!
//! where `w_p = w1_p - w0_p` and the dropped `sum_p w0_p` lives in `constant`.
//! Pairs are unordered and stored with `p < q` in raster order; `w01` is the
//! energy of `(f_p, f_q) = (0, 1)` in that orientation.

use std::fmt;

use crate::error::{Error, Result};

/// Absolute slack used when checking `w00 + w11 <= w01 + w10`.
pub const REGULARITY_TOLERANCE: f64 = 1e-12;

/// Largest node count accepted by [`brute_force_minimize`].
pub const BRUTE_FORCE_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridGeometry {
    width: usize,
    height: usize,
}

impl GridGeometry {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidGeometry { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn coords(&self, p: usize) -> (usize, usize) {
        (p % self.width, p / self.width)
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    /// 4-neighbors of `p`, in the order left, right, up, down.
    pub fn neighbors4(&self, p: usize) -> impl Iterator<Item = usize> {
        let (x, y) = self.coords(p);
        let w = self.width;
        let h = self.height;
        [
            (x > 0).then(|| p - 1),
            (x + 1 < w).then(|| p + 1),
            (y > 0).then(|| p - w),
            (y + 1 < h).then(|| p + w),
        ]
        .into_iter()
        .flatten()
    }

    /// All horizontal and vertical adjacencies, each once, sorted by `(p, q)`.
    pub fn grid_pairs(&self) -> Vec<NeighborPair> {
        let mut pairs = Vec::with_capacity(2 * self.pixel_count());
        for y in 0..self.height {
            for x in 0..self.width {
                let p = self.index(x, y);
                if x + 1 < self.width {
                    pairs.push(NeighborPair { p, q: p + 1 });
                }
                if y + 1 < self.height {
                    pairs.push(NeighborPair { p, q: p + self.width });
                }
            }
        }
        pairs
    }
}

impl fmt::Display for GridGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// An unordered neighbor pair in canonical orientation `p < q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NeighborPair {
    pub p: usize,
    pub q: usize,
}

impl NeighborPair {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p >= q {
            return Err(Error::InvalidPair { p, q, reason: "expected p < q" });
        }
        Ok(Self { p, q })
    }
}

/// The four entries of a pairwise potential table.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairwiseWeights {
    pub w00: f64,
    pub w01: f64,
    pub w10: f64,
    pub w11: f64,
}

impl PairwiseWeights {
    pub const ZERO: Self = Self { w00: 0.0, w01: 0.0, w10: 0.0, w11: 0.0 };

    pub fn new(w00: f64, w01: f64, w10: f64, w11: f64) -> Self {
        Self { w00, w01, w10, w11 }
    }

    /// `w |f_p - f_q|^2`, i.e. `w00 = w11 = 0` and `w01 = w10 = w`.
    pub fn potts(w: f64) -> Self {
        Self { w00: 0.0, w01: w, w10: w, w11: 0.0 }
    }

    #[inline]
    pub fn eval(&self, fp: bool, fq: bool) -> f64 {
        match (fp, fq) {
            (false, false) => self.w00,
            (false, true) => self.w01,
            (true, false) => self.w10,
            (true, true) => self.w11,
        }
    }

    /// The same table seen from the other endpoint.
    pub fn transposed(&self) -> Self {
        Self { w00: self.w00, w01: self.w10, w10: self.w01, w11: self.w11 }
    }

    /// `w00 + w11 - (w01 + w10)`; positive values violate regularity.
    pub fn regularity_excess(&self) -> f64 {
        (self.w00 + self.w11) - (self.w01 + self.w10)
    }

    pub fn is_regular(&self) -> bool {
        self.regularity_excess() <= REGULARITY_TOLERANCE
    }

    pub fn is_finite(&self) -> bool {
        self.w00.is_finite() && self.w01.is_finite() && self.w10.is_finite() && self.w11.is_finite()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            w00: self.w00 * factor,
            w01: self.w01 * factor,
            w10: self.w10 * factor,
            w11: self.w11 * factor,
        }
    }
}

impl std::ops::AddAssign for PairwiseWeights {
    fn add_assign(&mut self, rhs: Self) {
        self.w00 += rhs.w00;
        self.w01 += rhs.w01;
        self.w10 += rhs.w10;
        self.w11 += rhs.w11;
    }
}

/// A binary assignment, one bit per node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labeling(Vec<bool>);

impl Labeling {
    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }

    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|b| !b).collect())
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

/// Common view over pixel- and superpixel-level binary MRFs.
///
/// Energy is always accumulated in the same order (constant, unaries in node
/// order, pairwise terms in storage order) so that two instances holding the
/// same numbers evaluate to bit-identical energies.
pub trait BinaryEnergy {
    fn node_count(&self) -> usize;
    fn constant(&self) -> f64;
    fn unary(&self) -> &[f64];
    fn term_count(&self) -> usize;
    /// The `i`-th pairwise term as `(a, b, weights)` with `a < b`.
    fn term(&self, i: usize) -> (usize, usize, PairwiseWeights);

    fn energy_of(&self, labels: &[bool]) -> f64 {
        let mut e = self.constant();
        for (&w, &f) in self.unary().iter().zip(labels) {
            if f {
                e += w;
            }
        }
        for i in 0..self.term_count() {
            let (a, b, w) = self.term(i);
            e += w.eval(labels[a], labels[b]);
        }
        e
    }

    fn energy(&self, labeling: &Labeling) -> Result<f64> {
        if labeling.len() != self.node_count() {
            return Err(Error::DimensionMismatch {
                what: "labeling",
                expected: self.node_count(),
                actual: labeling.len(),
            });
        }
        Ok(self.energy_of(labeling.as_slice()))
    }

    /// Terms violating `w00 + w11 <= w01 + w10` beyond [`REGULARITY_TOLERANCE`].
    fn regularity_violations(&self) -> Vec<(usize, usize, f64)> {
        (0..self.term_count())
            .filter_map(|i| {
                let (a, b, w) = self.term(i);
                let excess = w.regularity_excess();
                (excess > REGULARITY_TOLERANCE).then_some((a, b, excess))
            })
            .collect()
    }

    fn is_submodular(&self) -> bool {
        (0..self.term_count()).all(|i| self.term(i).2.is_regular())
    }
}

/// A pixel-level binary MRF.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelMrf {
    geometry: GridGeometry,
    unary: Vec<f64>,
    pairs: Vec<(NeighborPair, PairwiseWeights)>,
    constant: f64,
}

impl PixelMrf {
    /// Validates and stores an instance. Pairs are sorted by `(p, q)`.
    pub fn new(
        geometry: GridGeometry,
        unary: Vec<f64>,
        mut pairs: Vec<(NeighborPair, PairwiseWeights)>,
        constant: f64,
    ) -> Result<Self> {
        let n = geometry.pixel_count();
        if unary.len() != n {
            return Err(Error::DimensionMismatch { what: "unary", expected: n, actual: unary.len() });
        }
        if let Some(p) = unary.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFinite(format!("unary of pixel {p}")));
        }
        if !constant.is_finite() {
            return Err(Error::NonFinite("constant".into()));
        }
        pairs.sort_by_key(|(pair, _)| *pair);
        for (i, (pair, w)) in pairs.iter().enumerate() {
            if pair.p >= pair.q {
                return Err(Error::InvalidPair { p: pair.p, q: pair.q, reason: "expected p < q" });
            }
            if pair.q >= n {
                return Err(Error::InvalidPair { p: pair.p, q: pair.q, reason: "pixel out of range" });
            }
            if !w.is_finite() {
                return Err(Error::NonFinite(format!("pair ({}, {})", pair.p, pair.q)));
            }
            if i > 0 && pairs[i - 1].0 == *pair {
                return Err(Error::DuplicatePair { p: pair.p, q: pair.q });
            }
        }
        Ok(Self { geometry, unary, pairs, constant })
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn pairs(&self) -> &[(NeighborPair, PairwiseWeights)] {
        &self.pairs
    }

    /// Multiplies every weight and the constant by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.geometry,
            self.unary.iter().map(|w| w * factor).collect(),
            self.pairs.iter().map(|(pair, w)| (*pair, w.scaled(factor))).collect(),
            self.constant * factor,
        )
    }
}

impl BinaryEnergy for PixelMrf {
    fn node_count(&self) -> usize {
        self.geometry.pixel_count()
    }

    fn constant(&self) -> f64 {
        self.constant
    }

    fn unary(&self) -> &[f64] {
        &self.unary
    }

    fn term_count(&self) -> usize {
        self.pairs.len()
    }

    #[inline]
    fn term(&self, i: usize) -> (usize, usize, PairwiseWeights) {
        let (pair, w) = self.pairs[i];
        (pair.p, pair.q, w)
    }
}

/// Builds an MRF over the 4-connected grid, querying `pair_weight` once per
/// adjacency.
pub fn build_grid_mrf(
    geometry: GridGeometry,
    unary: Vec<f64>,
    mut pair_weight: impl FnMut(NeighborPair) -> PairwiseWeights,
) -> Result<PixelMrf> {
    if unary.len() != geometry.pixel_count() {
        return Err(Error::DimensionMismatch {
            what: "unary",
            expected: geometry.pixel_count(),
            actual: unary.len(),
        });
    }
    let pairs = geometry.grid_pairs().into_iter().map(|pair| (pair, pair_weight(pair))).collect();
    PixelMrf::new(geometry, unary, pairs, 0.0)
}

/// Exhaustive minimization over all `2^n` labelings.
///
/// Ties go to the labeling with the smallest binary value when read in node
/// order with node 0 as the most significant bit.
pub fn brute_force_minimize<E: BinaryEnergy + ?Sized>(mrf: &E) -> Result<(Labeling, f64)> {
    let n = mrf.node_count();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { nodes: n, limit: BRUTE_FORCE_LIMIT });
    }
    let mut labels = vec![false; n];
    let mut best_code = 0u32;
    let mut best = f64::INFINITY;
    for code in 0u32..(1u32 << n) {
        for (p, bit) in labels.iter_mut().enumerate() {
            *bit = (code >> (n - 1 - p)) & 1 == 1;
        }
        let e = mrf.energy_of(&labels);
        if e < best {
            best = e;
            best_code = code;
        }
    }
    let bits = (0..n).map(|p| (best_code >> (n - 1 - p)) & 1 == 1).collect();
    Ok((Labeling::from_bits(bits), best))
}
