//! Exact reduction of a pixel-level binary MRF to a superpixel-level one.
//!
//! Substituting `f_p = x_{k(p)}` into the pixel energy and collecting terms
//! gives a `K`-node MRF:
//!
//! * `omega_k` sums the pixel unaries of superpixel `k`;
//! * a pair inside superpixel `k` can only take the labels `(0,0)` or `(1,1)`,
//!   so its `w00` collects into `omega00_k` and its `w11` into `omega11_k`;
//!   because `!x_k !x_k = 1 - x_k` these become the unary correction
//!   `hat_omega_k = omega_k - omega00_k + omega11_k` plus the constant
//!   `sum_k omega00_k`;
//! * a pair crossing from `k` to `l` adds its whole table to the edge `(k, l)`.
//!
//! Nothing is approximated: for every superpixel labeling `x`,
//! `E_sp(x) == E_pix(lift(x))` up to floating-point rounding.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mrf::{BinaryEnergy, GridGeometry, Labeling, NeighborPair, PairwiseWeights, PixelMrf};
use crate::partition::SuperpixelPartition;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperpixelEdge {
    pub k: usize,
    pub l: usize,
    pub weights: PairwiseWeights,
}

/// A `K`-node binary MRF. Edges are sorted by `(k, l)` with `k < l`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpixelMrf {
    unary: Vec<f64>,
    edges: Vec<SuperpixelEdge>,
    constant: f64,
}

impl SuperpixelMrf {
    pub fn new(unary: Vec<f64>, mut edges: Vec<SuperpixelEdge>, constant: f64) -> Result<Self> {
        let k = unary.len();
        if let Some(i) = unary.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFinite(format!("unary of superpixel {i}")));
        }
        if !constant.is_finite() {
            return Err(Error::NonFinite("constant".into()));
        }
        edges.sort_by_key(|e| (e.k, e.l));
        for (i, e) in edges.iter().enumerate() {
            if e.k >= e.l {
                return Err(Error::InvalidPair { p: e.k, q: e.l, reason: "expected k < l" });
            }
            if e.l >= k {
                return Err(Error::InvalidPair { p: e.k, q: e.l, reason: "superpixel out of range" });
            }
            if !e.weights.is_finite() {
                return Err(Error::NonFinite(format!("edge ({}, {})", e.k, e.l)));
            }
            if i > 0 && (edges[i - 1].k, edges[i - 1].l) == (e.k, e.l) {
                return Err(Error::DuplicatePair { p: e.k, q: e.l });
            }
        }
        Ok(Self { unary, edges, constant })
    }

    /// Number of superpixels `K`.
    pub fn count(&self) -> usize {
        self.unary.len()
    }

    pub fn edges(&self) -> &[SuperpixelEdge] {
        &self.edges
    }
}

impl BinaryEnergy for SuperpixelMrf {
    fn node_count(&self) -> usize {
        self.unary.len()
    }

    fn constant(&self) -> f64 {
        self.constant
    }

    fn unary(&self) -> &[f64] {
        &self.unary
    }

    fn term_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    fn term(&self, i: usize) -> (usize, usize, PairwiseWeights) {
        let e = &self.edges[i];
        (e.k, e.l, e.weights)
    }
}

/// Intermediate sums of the aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationReport {
    /// `omega_k`: summed pixel unaries.
    pub omega: Vec<f64>,
    /// `omega00_k`: summed `w00` of pairs inside superpixel `k`.
    pub omega00: Vec<f64>,
    /// `omega11_k`: summed `w11` of pairs inside superpixel `k`.
    pub omega11: Vec<f64>,
    /// Pixel pairs inside each superpixel.
    pub interior_pairs: Vec<usize>,
    /// Pixel pairs behind each superpixel edge, parallel to `SuperpixelMrf::edges`.
    pub crossing_pairs: Vec<usize>,
}

fn check_geometry(a: GridGeometry, b: GridGeometry) -> Result<()> {
    if a != b {
        return Err(Error::GeometryMismatch { left: a.to_string(), right: b.to_string() });
    }
    Ok(())
}

/// Accumulates crossing pairs into canonical `(k, l)` edges in one pass.
struct EdgeAccumulator {
    // per lower endpoint k: (l, edge slot)
    slots: Vec<Vec<(u32, u32)>>,
    edges: Vec<(usize, usize, PairwiseWeights, usize)>,
}

impl EdgeAccumulator {
    fn new(k: usize) -> Self {
        Self { slots: vec![Vec::new(); k], edges: Vec::new() }
    }

    #[inline]
    fn add(&mut self, k: usize, l: usize, w: PairwiseWeights) {
        let list = &mut self.slots[k];
        let slot = match list.iter().find(|(other, _)| *other as usize == l) {
            Some(&(_, slot)) => slot as usize,
            None => {
                let slot = self.edges.len();
                list.push((l as u32, slot as u32));
                self.edges.push((k, l, PairwiseWeights::ZERO, 0));
                slot
            }
        };
        let e = &mut self.edges[slot];
        e.2 += w;
        e.3 += 1;
    }

    fn finish(mut self) -> (Vec<SuperpixelEdge>, Vec<usize>) {
        self.edges.sort_by_key(|e| (e.0, e.1));
        self.edges
            .into_iter()
            .map(|(k, l, weights, count)| (SuperpixelEdge { k, l, weights }, count))
            .unzip()
    }
}

pub fn superpixelize(mrf: &PixelMrf, partition: &SuperpixelPartition) -> Result<(SuperpixelMrf, AggregationReport)> {
    check_geometry(mrf.geometry(), partition.geometry())?;
    let k_count = partition.count();

    let mut omega = vec![0.0; k_count];
    for (p, &w) in mrf.unary().iter().enumerate() {
        omega[partition.label(p)] += w;
    }

    let mut omega00 = vec![0.0; k_count];
    let mut omega11 = vec![0.0; k_count];
    let mut interior_pairs = vec![0usize; k_count];
    let mut acc = EdgeAccumulator::new(k_count);
    for (pair, w) in mrf.pairs() {
        let (kp, kq) = (partition.label(pair.p), partition.label(pair.q));
        if kp == kq {
            // w01 and w10 multiply x_k !x_k = 0
            omega00[kp] += w.w00;
            omega11[kp] += w.w11;
            interior_pairs[kp] += 1;
        } else if kp < kq {
            acc.add(kp, kq, *w);
        } else {
            acc.add(kq, kp, w.transposed());
        }
    }

    let unary = (0..k_count).map(|k| omega[k] - omega00[k] + omega11[k]).collect();
    let mut constant = mrf.constant();
    for &c in &omega00 {
        constant += c;
    }
    let (edges, crossing_pairs) = acc.finish();
    let sp = SuperpixelMrf::new(unary, edges, constant)?;
    Ok((sp, AggregationReport { omega, omega00, omega11, interior_pairs, crossing_pairs }))
}

/// A pixel-level Potts energy `sum_p w_p f_p + sum_pq w_pq |f_p - f_q|^2 + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct PottsModel {
    pub geometry: GridGeometry,
    pub unary: Vec<f64>,
    pub weights: Vec<(NeighborPair, f64)>,
    pub constant: f64,
}

impl PottsModel {
    /// The same energy in general four-weight form.
    pub fn to_general(&self) -> Result<PixelMrf> {
        PixelMrf::new(
            self.geometry,
            self.unary.clone(),
            self.weights.iter().map(|&(pair, w)| (pair, PairwiseWeights::potts(w))).collect(),
            self.constant,
        )
    }
}

impl BinaryEnergy for PottsModel {
    fn node_count(&self) -> usize {
        self.unary.len()
    }

    fn constant(&self) -> f64 {
        self.constant
    }

    fn unary(&self) -> &[f64] {
        &self.unary
    }

    fn term_count(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    fn term(&self, i: usize) -> (usize, usize, PairwiseWeights) {
        let (pair, w) = self.weights[i];
        (pair.p, pair.q, PairwiseWeights::potts(w))
    }
}

/// Potts fast path: `omega_k = sum w_p`, `omega_kl = sum of crossing w_pq`,
/// interior pairs vanish since `w00 = w11 = 0`.
pub fn superpixelize_potts(model: &PottsModel, partition: &SuperpixelPartition) -> Result<SuperpixelMrf> {
    check_geometry(model.geometry, partition.geometry())?;
    if model.unary.len() != model.geometry.pixel_count() {
        return Err(Error::DimensionMismatch {
            what: "unary",
            expected: model.geometry.pixel_count(),
            actual: model.unary.len(),
        });
    }
    let k_count = partition.count();
    let mut omega = vec![0.0; k_count];
    for (p, &w) in model.unary.iter().enumerate() {
        omega[partition.label(p)] += w;
    }

    let mut slots: Vec<Vec<(u32, u32)>> = vec![Vec::new(); k_count];
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for &(pair, w) in &model.weights {
        if !w.is_finite() {
            return Err(Error::NonFinite(format!("potts weight ({}, {})", pair.p, pair.q)));
        }
        let (kp, kq) = (partition.label(pair.p), partition.label(pair.q));
        if kp == kq {
            continue;
        }
        let (k, l) = (kp.min(kq), kp.max(kq));
        let slot = match slots[k].iter().find(|(other, _)| *other as usize == l) {
            Some(&(_, s)) => s as usize,
            None => {
                slots[k].push((l as u32, edges.len() as u32));
                edges.push((k, l, 0.0));
                edges.len() - 1
            }
        };
        edges[slot].2 += w;
    }
    let edges = edges
        .into_iter()
        .map(|(k, l, w)| SuperpixelEdge { k, l, weights: PairwiseWeights::potts(w) })
        .collect();
    SuperpixelMrf::new(omega, edges, model.constant)
}

/// `f_p = x_{k(p)}`.
pub fn lift(x: &Labeling, partition: &SuperpixelPartition) -> Result<Labeling> {
    if x.len() != partition.count() {
        return Err(Error::DimensionMismatch { what: "superpixel labeling", expected: partition.count(), actual: x.len() });
    }
    Ok(Labeling::from_bits(partition.labels().iter().map(|&k| x.get(k as usize)).collect()))
}

/// Inverse of [`lift`] on superpixel-constant pixel labelings; `None` when
/// some superpixel carries both labels.
pub fn restrict(f: &Labeling, partition: &SuperpixelPartition) -> Option<Labeling> {
    if f.len() != partition.geometry().pixel_count() {
        return None;
    }
    let mut x: Vec<Option<bool>> = vec![None; partition.count()];
    for (p, &k) in partition.labels().iter().enumerate() {
        let slot = &mut x[k as usize];
        match *slot {
            None => *slot = Some(f.get(p)),
            Some(v) if v != f.get(p) => return None,
            Some(_) => {}
        }
    }
    Some(Labeling::from_bits(x.into_iter().map(|v| v.unwrap_or(false)).collect()))
}

/// `E_sp(x)` including the constant.
pub fn sp_energy(sp: &SuperpixelMrf, x: &Labeling) -> Result<f64> {
    sp.energy(x)
}

/// Per-edge gap between the aggregated table and a direct sum of the pixel
/// tables of the crossing pairs, for each of the four label combinations.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeResidual {
    pub k: usize,
    pub l: usize,
    /// Indexed by `2 * x_k + x_l`.
    pub residuals: [f64; 4],
}

impl EdgeResidual {
    pub fn max(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Checks `V_kl(a, b) = sum over crossing {p, q} of V_pq` for every edge.
/// Pixel-level crossings with no matching superpixel edge, and superpixel
/// edges with no crossings, are reported too.
pub fn edge_residuals(mrf: &PixelMrf, partition: &SuperpixelPartition, sp: &SuperpixelMrf) -> Vec<EdgeResidual> {
    let mut direct: BTreeMap<(usize, usize), [f64; 4]> = BTreeMap::new();
    for (pair, w) in mrf.pairs() {
        let (kp, kq) = (partition.label(pair.p), partition.label(pair.q));
        if kp == kq {
            continue;
        }
        let (k, l) = (kp.min(kq), kp.max(kq));
        let sums = direct.entry((k, l)).or_insert([0.0; 4]);
        for (i, sum) in sums.iter_mut().enumerate() {
            let (xk, xl) = (i & 2 != 0, i & 1 != 0);
            // pixel p sits in whichever superpixel it belongs to
            let (fp, fq) = if kp == k { (xk, xl) } else { (xl, xk) };
            *sum += w.eval(fp, fq);
        }
    }
    let mut out = Vec::new();
    for e in sp.edges() {
        let sums = direct.remove(&(e.k, e.l)).unwrap_or([0.0; 4]);
        let mut residuals = [0.0; 4];
        for (i, r) in residuals.iter_mut().enumerate() {
            *r = (e.weights.eval(i & 2 != 0, i & 1 != 0) - sums[i]).abs();
        }
        out.push(EdgeResidual { k: e.k, l: e.l, residuals });
    }
    for ((k, l), sums) in direct {
        out.push(EdgeResidual { k, l, residuals: sums.map(f64::abs) });
    }
    out
}
