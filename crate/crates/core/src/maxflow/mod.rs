//! Exact minimization of submodular binary energies by s-t min-cut.
//!
//! Label convention: a node on the sink side of the cut takes label 1. Nodes
//! left unreachable from both terminals take label 0.

mod bk;

use std::fmt::Write as _;
use std::time::{Duration, Instant};

pub use bk::{max_flow, MaxFlow};

use crate::error::{Error, Result};
use crate::mrf::{BinaryEnergy, Labeling, REGULARITY_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub cap: f64,
    pub rev_cap: f64,
}

/// A capacitated graph with implicit source and sink terminals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowGraph {
    source_cap: Vec<f64>,
    sink_cap: Vec<f64>,
    arcs: Vec<FlowArc>,
}

impl FlowGraph {
    pub fn new(nodes: usize) -> Self {
        Self { source_cap: vec![0.0; nodes], sink_cap: vec![0.0; nodes], arcs: Vec::new() }
    }

    pub fn node_count(&self) -> usize {
        self.source_cap.len()
    }

    pub fn source_cap(&self) -> &[f64] {
        &self.source_cap
    }

    pub fn sink_cap(&self) -> &[f64] {
        &self.sink_cap
    }

    pub fn arcs(&self) -> &[FlowArc] {
        &self.arcs
    }

    /// Adds to the capacities of `source -> node` and `node -> sink`.
    ///
    /// # Panics
    /// On negative or non-finite capacities, or an out-of-range node.
    pub fn add_terminal(&mut self, node: usize, source: f64, sink: f64) {
        assert!(source >= 0.0 && sink >= 0.0 && source.is_finite() && sink.is_finite(), "invalid terminal capacity");
        self.source_cap[node] += source;
        self.sink_cap[node] += sink;
    }

    /// Adds the arc pair `from -> to` (capacity `cap`) and `to -> from`
    /// (capacity `rev_cap`).
    ///
    /// # Panics
    /// On negative or non-finite capacities, or out-of-range nodes.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64, rev_cap: f64) {
        assert!(cap >= 0.0 && rev_cap >= 0.0 && cap.is_finite() && rev_cap.is_finite(), "invalid arc capacity");
        assert!(from < self.node_count() && to < self.node_count() && from != to, "invalid arc endpoints");
        self.arcs.push(FlowArc { from, to, cap, rev_cap });
    }

    /// Capacity of the cut whose sink side is given, evaluated from the
    /// original capacities.
    pub fn cut_capacity(&self, sink_side: &[bool]) -> f64 {
        let mut total = 0.0;
        for (i, &t) in sink_side.iter().enumerate() {
            total += if t { self.source_cap[i] } else { self.sink_cap[i] };
        }
        for arc in &self.arcs {
            match (sink_side[arc.from], sink_side[arc.to]) {
                (false, true) => total += arc.cap,
                (true, false) => total += arc.rev_cap,
                _ => {}
            }
        }
        total
    }

    /// DIMACS max-flow problem text. Nodes are numbered from 1; the source is
    /// `n + 1` and the sink `n + 2`. Zero-capacity arcs are omitted.
    pub fn to_dimacs(&self) -> String {
        let n = self.node_count();
        let (s, t) = (n + 1, n + 2);
        let mut lines = Vec::new();
        for i in 0..n {
            if self.source_cap[i] > 0.0 {
                lines.push((s, i + 1, self.source_cap[i]));
            }
            if self.sink_cap[i] > 0.0 {
                lines.push((i + 1, t, self.sink_cap[i]));
            }
        }
        for arc in &self.arcs {
            if arc.cap > 0.0 {
                lines.push((arc.from + 1, arc.to + 1, arc.cap));
            }
            if arc.rev_cap > 0.0 {
                lines.push((arc.to + 1, arc.from + 1, arc.rev_cap));
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "p max {} {}", n + 2, lines.len());
        let _ = writeln!(out, "n {s} s");
        let _ = writeln!(out, "n {t} t");
        for (u, v, c) in lines {
            let _ = writeln!(out, "a {u} {v} {c}");
        }
        out
    }
}

/// Reparameterizes a submodular energy into an s-t graph. Returns the graph
/// and the offset such that `energy(x) = offset + cut(x)` for every labeling.
///
/// Each pairwise table is split as
/// `A + (C - A) x_a + (D - C) x_b + (B + C - A - D) !x_a x_b`
/// for `(A, B, C, D) = (w00, w01, w10, w11)`; the last term becomes the arc
/// `a -> b` and the linear parts fold into the unaries.
pub fn build_st_graph<E: BinaryEnergy + ?Sized>(energy: &E) -> Result<(FlowGraph, f64)> {
    let n = energy.node_count();
    let mut unary = energy.unary().to_vec();
    let mut offset = energy.constant();
    let mut graph = FlowGraph::new(n);
    for t in 0..energy.term_count() {
        let (a, b, w) = energy.term(t);
        let lambda = (w.w01 + w.w10) - (w.w00 + w.w11);
        if lambda < -REGULARITY_TOLERANCE {
            return Err(Error::NonSubmodular { k: a, l: b, excess: -lambda });
        }
        offset += w.w00;
        unary[a] += w.w10 - w.w00;
        unary[b] += w.w11 - w.w10;
        if lambda > 0.0 {
            graph.arcs.push(FlowArc { from: a, to: b, cap: lambda, rev_cap: 0.0 });
        }
    }
    for (i, &u) in unary.iter().enumerate() {
        if u > 0.0 {
            graph.source_cap[i] += u;
        } else if u < 0.0 {
            // u x = u + |u| !x
            offset += u;
            graph.sink_cap[i] += -u;
        }
    }
    Ok((graph, offset))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveStats {
    pub augmentations: usize,
    pub build_time: Duration,
    pub flow_time: Duration,
}

impl SolveStats {
    pub fn total(&self) -> Duration {
        self.build_time + self.flow_time
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub labeling: Labeling,
    /// Energy re-evaluated on `labeling`.
    pub energy: f64,
    pub flow: f64,
    pub offset: f64,
    pub stats: SolveStats,
}

/// Global minimum of a submodular energy.
pub fn solve<E: BinaryEnergy + ?Sized>(energy: &E) -> Result<SolveResult> {
    let t0 = Instant::now();
    let (graph, offset) = build_st_graph(energy)?;
    let build_time = t0.elapsed();
    let t1 = Instant::now();
    let result = max_flow(&graph);
    let flow_time = t1.elapsed();
    let labeling = Labeling::from_bits(result.sink_side);
    let value = energy.energy_of(labeling.as_slice());
    Ok(SolveResult {
        labeling,
        energy: value,
        flow: result.flow,
        offset,
        stats: SolveStats { augmentations: result.augmentations, build_time, flow_time },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mrf::{brute_force_minimize, build_grid_mrf, GridGeometry, NeighborPair, PairwiseWeights, PixelMrf};
    use crate::partition::identity_partition;
    use crate::superpixelize::superpixelize;
    use proptest::prelude::*;

    /// Minimum cut by enumerating every sink side.
    fn brute_min_cut(graph: &FlowGraph) -> f64 {
        let n = graph.node_count();
        (0u32..1 << n)
            .map(|code| {
                let side: Vec<bool> = (0..n).map(|i| (code >> i) & 1 == 1).collect();
                graph.cut_capacity(&side)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn chain_flow() {
        // source -> A (2), A -> B (1), B -> sink (2)
        let mut g = FlowGraph::new(2);
        g.add_terminal(0, 2.0, 0.0);
        g.add_terminal(1, 0.0, 2.0);
        g.add_edge(0, 1, 1.0, 0.0);
        let r = max_flow(&g);
        assert_eq!(r.flow, 1.0);
        assert_eq!(brute_min_cut(&g), 1.0);
        assert_eq!(g.cut_capacity(&r.sink_side), 1.0);
    }

    #[test]
    fn empty_graph_has_zero_flow() {
        let r = max_flow(&FlowGraph::new(0));
        assert_eq!(r.flow, 0.0);
        let r = max_flow(&FlowGraph::new(3));
        assert_eq!(r.flow, 0.0);
        assert_eq!(r.sink_side, vec![false; 3]);
    }

    #[test]
    fn independent_parallel_paths() {
        let mut g = FlowGraph::new(3);
        for i in 0..3 {
            g.add_terminal(i, 1.0, 1.0);
        }
        let r = max_flow(&g);
        assert_eq!(r.flow, 3.0);
        assert_eq!(brute_min_cut(&g), 3.0);
    }

    #[test]
    fn single_negative_unary() {
        let g = GridGeometry::new(1, 1).unwrap();
        let mrf = PixelMrf::new(g, vec![-5.0], vec![], 0.0).unwrap();
        let r = solve(&mrf).unwrap();
        assert_eq!(r.labeling, Labeling::from_bits(vec![true]));
        assert_eq!(r.energy, -5.0);
    }

    #[test]
    fn two_pixel_potts_matches_enumeration() {
        let g = GridGeometry::new(2, 1).unwrap();
        let mrf = build_grid_mrf(g, vec![1.0, -2.0], |_| PairwiseWeights::potts(3.0)).unwrap();
        let r = solve(&mrf).unwrap();
        let (f, e) = brute_force_minimize(&mrf).unwrap();
        // (0,0)=0, (0,1)=1, (1,0)=4, (1,1)=-1
        assert_eq!(e, -1.0);
        assert_eq!(r.energy, e);
        assert_eq!(r.labeling, f);
    }

    #[test]
    fn all_zero_instance_labels_everything_zero() {
        let g = GridGeometry::new(3, 3).unwrap();
        let pairs = g.grid_pairs().into_iter().map(|p| (p, PairwiseWeights::ZERO)).collect();
        let mrf = PixelMrf::new(g, vec![0.0; 9], pairs, 2.5).unwrap();
        let r = solve(&mrf).unwrap();
        assert_eq!(r.energy, 2.5);
        assert_eq!(r.labeling, Labeling::zeros(9));
    }

    #[test]
    fn positive_unaries_give_all_zero() {
        let g = GridGeometry::new(4, 2).unwrap();
        let mrf = build_grid_mrf(g, (1..=8).map(f64::from).collect(), |_| PairwiseWeights::potts(0.5)).unwrap();
        assert_eq!(solve(&mrf).unwrap().labeling, Labeling::zeros(8));
    }

    #[test]
    fn non_submodular_edge_reported() {
        let g = GridGeometry::new(2, 1).unwrap();
        let w = PairwiseWeights::new(1.0, 0.0, 0.0, 1.0);
        let mrf = PixelMrf::new(g, vec![0.0; 2], vec![(NeighborPair { p: 0, q: 1 }, w)], 0.0).unwrap();
        match solve(&mrf) {
            Err(Error::NonSubmodular { k: 0, l: 1, excess }) => assert_eq!(excess, 2.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn slightly_negative_lambda_is_clamped() {
        let g = GridGeometry::new(2, 1).unwrap();
        let w = PairwiseWeights::new(0.0, 0.0, 0.0, 1e-13);
        let mrf = PixelMrf::new(g, vec![1.0, 1.0], vec![(NeighborPair { p: 0, q: 1 }, w)], 0.0).unwrap();
        assert!(solve(&mrf).is_ok());
    }

    #[test]
    fn identity_superpixelization_solves_identically() {
        let g = GridGeometry::new(3, 3).unwrap();
        let mrf = build_grid_mrf(g, vec![1.0, -2.0, 0.5, -0.3, 2.0, -1.0, 0.1, 0.2, -0.7], |pair| {
            PairwiseWeights::new(0.1, 0.4 + pair.p as f64 * 0.1, 0.3, 0.2)
        })
        .unwrap();
        let (sp, _) = superpixelize(&mrf, &identity_partition(g)).unwrap();
        let (a, b) = (solve(&mrf).unwrap(), solve(&sp).unwrap());
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        assert_eq!(a.labeling, b.labeling);
    }

    #[test]
    fn dimacs_export() {
        let mut g = FlowGraph::new(2);
        g.add_terminal(0, 2.0, 0.0);
        g.add_terminal(1, 0.0, 2.5);
        g.add_edge(0, 1, 1.0, 0.0);
        assert_eq!(g.to_dimacs(), "p max 4 3\nn 3 s\nn 4 t\na 3 1 2\na 2 4 2.5\na 1 2 1\n");
    }

    fn arb_graph() -> impl Strategy<Value = FlowGraph> {
        (1usize..9).prop_flat_map(|n| {
            (
                prop::collection::vec((0.0..5.0f64, 0.0..5.0f64), n),
                prop::collection::vec((0..n, 0..n, 0.0..5.0f64, 0.0..5.0f64), 0..3 * n),
            )
                .prop_map(move |(terms, arcs)| {
                    let mut g = FlowGraph::new(n);
                    for (i, (s, t)) in terms.into_iter().enumerate() {
                        g.add_terminal(i, s, t);
                    }
                    for (a, b, c, r) in arcs {
                        if a != b {
                            g.add_edge(a, b, c, r);
                        }
                    }
                    g
                })
        })
    }

    proptest! {
        #[test]
        fn flow_equals_min_cut(g in arb_graph()) {
            let r = max_flow(&g);
            let best = brute_min_cut(&g);
            prop_assert!((r.flow - best).abs() <= 1e-9 * (1.0 + best), "flow {} vs cut {}", r.flow, best);
            let cut = g.cut_capacity(&r.sink_side);
            prop_assert!((cut - r.flow).abs() <= 1e-9 * (1.0 + best), "returned cut {} vs flow {}", cut, r.flow);
        }

        #[test]
        fn integer_capacities_are_exact(
            n in 2usize..10,
            seed in prop::collection::vec((0u8..6, 0u8..6, 0u8..6, 0u8..6), 30),
        ) {
            let mut g = FlowGraph::new(n);
            for (i, &(s, t, _, _)) in seed.iter().take(n).enumerate() {
                g.add_terminal(i, s as f64, t as f64);
            }
            for (k, &(a, b, c, r)) in seed.iter().enumerate() {
                let (a, b) = ((a as usize + k) % n, (b as usize + 2 * k + 1) % n);
                if a != b {
                    g.add_edge(a, b, c as f64, r as f64);
                }
            }
            let r = max_flow(&g);
            prop_assert_eq!(r.flow, brute_min_cut(&g));
            prop_assert_eq!(g.cut_capacity(&r.sink_side), r.flow);
        }
    }
}
