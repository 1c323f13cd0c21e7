//! Boykov-Kolmogorov max-flow: two search trees grown from the terminals,
//! augmentation along the path where they meet, and adoption of orphaned
//! subtrees instead of rebuilding the trees from scratch.

use std::collections::VecDeque;

use super::FlowGraph;

const NONE: u32 = u32::MAX;
const TERMINAL: u32 = u32::MAX - 1;
const ORPHAN: u32 = u32::MAX - 2;

#[derive(Debug, Clone)]
pub struct MaxFlow {
    pub flow: f64,
    /// `true` for nodes that can still reach the sink in the residual graph.
    pub sink_side: Vec<bool>,
    pub augmentations: usize,
}

struct Solver {
    // CSR arcs: node i owns first[i]..first[i+1]
    first: Vec<u32>,
    head: Vec<u32>,
    sister: Vec<u32>,
    r_cap: Vec<f64>,
    // > 0: residual from source, < 0: residual to sink
    tr_cap: Vec<f64>,

    parent: Vec<u32>,
    is_sink: Vec<bool>,
    timestamp: Vec<u64>,
    dist: Vec<u32>,
    in_active: Vec<bool>,
    active: VecDeque<u32>,
    orphans: VecDeque<u32>,
    time: u64,
    flow: f64,
    augmentations: usize,
}

impl Solver {
    fn new(graph: &FlowGraph) -> Self {
        let n = graph.node_count();
        let mut degree = vec![0u32; n + 1];
        for arc in graph.arcs() {
            degree[arc.from] += 1;
            degree[arc.to] += 1;
        }
        let mut first = vec![0u32; n + 1];
        for i in 0..n {
            first[i + 1] = first[i] + degree[i];
        }
        let m = first[n] as usize;
        let mut fill = first.clone();
        let mut head = vec![0u32; m];
        let mut sister = vec![0u32; m];
        let mut r_cap = vec![0.0; m];
        for arc in graph.arcs() {
            let a = fill[arc.from] as usize;
            fill[arc.from] += 1;
            let b = fill[arc.to] as usize;
            fill[arc.to] += 1;
            head[a] = arc.to as u32;
            head[b] = arc.from as u32;
            sister[a] = b as u32;
            sister[b] = a as u32;
            r_cap[a] = arc.cap;
            r_cap[b] = arc.rev_cap;
        }

        let mut flow = 0.0;
        let tr_cap: Vec<f64> = (0..n)
            .map(|i| {
                let (s, t) = (graph.source_cap()[i], graph.sink_cap()[i]);
                flow += s.min(t);
                s - t
            })
            .collect();

        let mut solver = Self {
            first,
            head,
            sister,
            r_cap,
            parent: vec![NONE; n],
            is_sink: vec![false; n],
            timestamp: vec![0; n],
            dist: vec![0; n],
            in_active: vec![false; n],
            active: VecDeque::new(),
            orphans: VecDeque::new(),
            time: 0,
            flow,
            augmentations: 0,
            tr_cap,
        };
        for i in 0..n {
            if solver.tr_cap[i] != 0.0 {
                solver.is_sink[i] = solver.tr_cap[i] < 0.0;
                solver.parent[i] = TERMINAL;
                solver.dist[i] = 1;
                solver.set_active(i);
            }
        }
        solver
    }

    #[inline]
    fn arcs(&self, i: usize) -> std::ops::Range<usize> {
        self.first[i] as usize..self.first[i + 1] as usize
    }

    #[inline]
    fn set_active(&mut self, i: usize) {
        if !self.in_active[i] {
            self.in_active[i] = true;
            self.active.push_back(i as u32);
        }
    }

    fn next_active(&mut self) -> Option<usize> {
        while let Some(i) = self.active.pop_front() {
            let i = i as usize;
            self.in_active[i] = false;
            if self.parent[i] != NONE {
                return Some(i);
            }
        }
        None
    }

    fn run(&mut self) {
        let mut current: Option<usize> = None;
        loop {
            let i = match current.filter(|&i| self.parent[i] != NONE) {
                Some(i) => i,
                None => match self.next_active() {
                    Some(i) => i,
                    None => break,
                },
            };
            current = None;

            let meeting = self.grow(i);
            self.time += 1;
            if let Some(arc) = meeting {
                // keep expanding from the same node next round
                current = Some(i);
                self.augment(arc);
                self.adopt_orphans();
            }
        }
    }

    /// Expands node `i`; returns an arc from the source tree into the sink
    /// tree if the trees touch.
    fn grow(&mut self, i: usize) -> Option<usize> {
        if !self.is_sink[i] {
            for a in self.arcs(i) {
                if self.r_cap[a] <= 0.0 {
                    continue;
                }
                let j = self.head[a] as usize;
                if self.parent[j] == NONE {
                    self.is_sink[j] = false;
                    self.parent[j] = self.sister[a];
                    self.timestamp[j] = self.timestamp[i];
                    self.dist[j] = self.dist[i] + 1;
                    self.set_active(j);
                } else if self.is_sink[j] {
                    return Some(a);
                } else if self.timestamp[j] <= self.timestamp[i] && self.dist[j] > self.dist[i] {
                    self.parent[j] = self.sister[a];
                    self.timestamp[j] = self.timestamp[i];
                    self.dist[j] = self.dist[i] + 1;
                }
            }
        } else {
            for a in self.arcs(i) {
                let back = self.sister[a] as usize;
                if self.r_cap[back] <= 0.0 {
                    continue;
                }
                let j = self.head[a] as usize;
                if self.parent[j] == NONE {
                    self.is_sink[j] = true;
                    self.parent[j] = back as u32;
                    self.timestamp[j] = self.timestamp[i];
                    self.dist[j] = self.dist[i] + 1;
                    self.set_active(j);
                } else if !self.is_sink[j] {
                    return Some(back);
                } else if self.timestamp[j] <= self.timestamp[i] && self.dist[j] > self.dist[i] {
                    self.parent[j] = back as u32;
                    self.timestamp[j] = self.timestamp[i];
                    self.dist[j] = self.dist[i] + 1;
                }
            }
        }
        None
    }

    fn make_orphan(&mut self, i: usize) {
        self.parent[i] = ORPHAN;
        self.orphans.push_back(i as u32);
    }

    fn augment(&mut self, middle: usize) {
        let mut bottleneck = self.r_cap[middle];

        // source half: parent arcs point child -> parent, flow runs along the sister
        let mut i = self.head[self.sister[middle] as usize] as usize;
        loop {
            let a = self.parent[i];
            if a == TERMINAL {
                break;
            }
            let a = a as usize;
            bottleneck = bottleneck.min(self.r_cap[self.sister[a] as usize]);
            i = self.head[a] as usize;
        }
        bottleneck = bottleneck.min(self.tr_cap[i]);

        let mut i = self.head[middle] as usize;
        loop {
            let a = self.parent[i];
            if a == TERMINAL {
                break;
            }
            let a = a as usize;
            bottleneck = bottleneck.min(self.r_cap[a]);
            i = self.head[a] as usize;
        }
        bottleneck = bottleneck.min(-self.tr_cap[i]);

        self.r_cap[self.sister[middle] as usize] += bottleneck;
        self.r_cap[middle] -= bottleneck;

        let mut i = self.head[self.sister[middle] as usize] as usize;
        loop {
            let a = self.parent[i];
            if a == TERMINAL {
                break;
            }
            let a = a as usize;
            let s = self.sister[a] as usize;
            self.r_cap[a] += bottleneck;
            self.r_cap[s] -= bottleneck;
            if self.r_cap[s] <= 0.0 {
                self.make_orphan(i);
            }
            i = self.head[a] as usize;
        }
        self.tr_cap[i] -= bottleneck;
        if self.tr_cap[i] <= 0.0 {
            self.make_orphan(i);
        }

        let mut i = self.head[middle] as usize;
        loop {
            let a = self.parent[i];
            if a == TERMINAL {
                break;
            }
            let a = a as usize;
            let s = self.sister[a] as usize;
            self.r_cap[s] += bottleneck;
            self.r_cap[a] -= bottleneck;
            if self.r_cap[a] <= 0.0 {
                self.make_orphan(i);
            }
            i = self.head[a] as usize;
        }
        self.tr_cap[i] += bottleneck;
        if self.tr_cap[i] >= 0.0 {
            self.make_orphan(i);
        }

        self.flow += bottleneck;
        self.augmentations += 1;
    }

    fn adopt_orphans(&mut self) {
        while let Some(i) = self.orphans.pop_front() {
            self.adopt(i as usize);
        }
    }

    /// Distance from `j` to its terminal through valid parents, or `None` if
    /// the chain ends in an orphan. Marks the visited chain with the current
    /// timestamp so later queries stop early.
    fn origin_distance(&mut self, start: usize) -> Option<u32> {
        let mut j = start;
        let mut d = 0u32;
        loop {
            if self.timestamp[j] == self.time {
                d += self.dist[j];
                break;
            }
            let a = self.parent[j];
            d += 1;
            if a == TERMINAL {
                self.timestamp[j] = self.time;
                self.dist[j] = 1;
                break;
            }
            if a == ORPHAN {
                return None;
            }
            j = self.head[a as usize] as usize;
        }
        let mut j = start;
        let mut dd = d;
        while self.timestamp[j] != self.time {
            self.timestamp[j] = self.time;
            self.dist[j] = dd;
            dd -= 1;
            j = self.head[self.parent[j] as usize] as usize;
        }
        Some(d)
    }

    fn adopt(&mut self, i: usize) {
        let sink = self.is_sink[i];
        let mut best: Option<(usize, u32)> = None;
        for a in self.arcs(i) {
            // the residual must point from the candidate parent toward i (source
            // tree) or from i toward the candidate (sink tree)
            let residual = if sink { self.r_cap[a] } else { self.r_cap[self.sister[a] as usize] };
            if residual <= 0.0 {
                continue;
            }
            let j = self.head[a] as usize;
            if self.is_sink[j] != sink || self.parent[j] == NONE {
                continue;
            }
            if let Some(d) = self.origin_distance(j) {
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((a, d));
                }
            }
        }

        if let Some((a, d)) = best {
            self.parent[i] = a as u32;
            self.timestamp[i] = self.time;
            self.dist[i] = d + 1;
            return;
        }

        self.parent[i] = NONE;
        for a in self.arcs(i) {
            let j = self.head[a] as usize;
            if self.is_sink[j] != sink {
                continue;
            }
            let pj = self.parent[j];
            if pj == NONE {
                continue;
            }
            let residual = if sink { self.r_cap[a] } else { self.r_cap[self.sister[a] as usize] };
            if residual > 0.0 {
                self.set_active(j);
            }
            if pj != TERMINAL && pj != ORPHAN && self.head[pj as usize] as usize == i {
                self.make_orphan(j);
            }
        }
    }

    /// Nodes that can reach the sink through positive residual capacity.
    fn sink_side(&self) -> Vec<bool> {
        let n = self.tr_cap.len();
        let mut reach = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&i| self.tr_cap[i] < 0.0).collect();
        for &i in &stack {
            reach[i] = true;
        }
        while let Some(i) = stack.pop() {
            for a in self.arcs(i) {
                let j = self.head[a] as usize;
                // residual j -> i lives on the sister arc
                if !reach[j] && self.r_cap[self.sister[a] as usize] > 0.0 {
                    reach[j] = true;
                    stack.push(j);
                }
            }
        }
        reach
    }
}

pub fn max_flow(graph: &FlowGraph) -> MaxFlow {
    let mut solver = Solver::new(graph);
    solver.run();
    MaxFlow { flow: solver.flow, sink_side: solver.sink_side(), augmentations: solver.augmentations }
}
