use crate::error::Result;
use crate::graph::DetectorGraph;
use crate::noise::Syndrome;

/// Edge of the decoding subgraph; endpoints are local node indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubEdge {
    pub id: usize,
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Graph induced on the currently unmatched flipped detectors.
///
/// Nodes are addressed locally by their position in the sorted flipped list;
/// public accessors take detector ids.
#[derive(Clone, Debug)]
pub struct DecodingSubgraph {
    nodes: Vec<usize>,
    active: Vec<bool>,
    edges: Vec<SubEdge>,
    /// Local node -> indices into `edges`.
    adj: Vec<Vec<usize>>,
    deg: Vec<usize>,
    dependents: Vec<usize>,
    hw: usize,
    live_edges: usize,
}

impl DecodingSubgraph {
    pub fn build(graph: &DetectorGraph, syndrome: &Syndrome) -> Result<Self> {
        syndrome.validate(graph)?;
        let nodes = syndrome.flipped.clone();
        let m = nodes.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut edges: Vec<SubEdge> = Vec::new();
        for (a, &det) in nodes.iter().enumerate() {
            for &e in graph.incident(det) {
                let edge = graph.edge(e);
                let other = edge.other(det);
                let Ok(b) = nodes.binary_search(&other) else { continue };
                if b <= a {
                    continue;
                }
                // Parallel edges collapse onto the lightest one.
                match adj[a].iter().copied().find(|&k| edges[k].b == b) {
                    Some(k) if (edge.weight, e) < (edges[k].weight, edges[k].id) => {
                        edges[k].id = e;
                        edges[k].weight = edge.weight;
                    }
                    Some(_) => {}
                    None => {
                        adj[a].push(edges.len());
                        adj[b].push(edges.len());
                        edges.push(SubEdge { id: e, a, b, weight: edge.weight });
                    }
                }
            }
        }
        // Scan order is by graph edge id.
        let mut order: Vec<usize> = (0..edges.len()).collect();
        order.sort_by_key(|&k| edges[k].id);
        let mut remap = vec![0; edges.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let edges: Vec<SubEdge> = order.iter().map(|&k| edges[k]).collect();
        for list in &mut adj {
            for k in list.iter_mut() {
                *k = remap[*k];
            }
            list.sort_unstable();
        }

        let deg = adj.iter().map(Vec::len).collect();
        let live_edges = edges.len();
        let mut sub = Self { nodes, active: vec![true; m], edges, adj, deg, dependents: vec![0; m], hw: m, live_edges };
        sub.recompute_dependents();
        Ok(sub)
    }

    fn recompute_dependents(&mut self) {
        for i in 0..self.nodes.len() {
            self.dependents[i] = if self.active[i] {
                self.neighbors(i).filter(|&k| self.deg[k] == 1).count()
            } else {
                0
            };
        }
    }

    /// Active neighbours of local node `i`.
    pub(crate) fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[i].iter().map(move |&k| {
            let e = &self.edges[k];
            if e.a == i {
                e.b
            } else {
                e.a
            }
        })
        .filter(move |&k| self.active[k])
    }

    fn local(&self, id: usize) -> Option<usize> {
        let i = self.nodes.binary_search(&id).ok()?;
        self.active[i].then_some(i)
    }

    #[inline]
    pub(crate) fn detector(&self, local: usize) -> usize {
        self.nodes[local]
    }

    pub fn hamming_weight(&self) -> usize {
        self.hw
    }

    pub fn num_edges(&self) -> usize {
        self.live_edges
    }

    pub fn is_empty(&self) -> bool {
        self.hw == 0
    }

    /// Unmatched flipped detectors, ascending.
    pub fn node_ids(&self) -> Vec<usize> {
        self.active_locals().map(|i| self.nodes[i]).collect()
    }

    pub(crate) fn active_locals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&i| self.active[i])
    }

    /// Edges whose endpoints are both unmatched, in graph edge-id order.
    pub fn active_edges(&self) -> impl Iterator<Item = &SubEdge> + '_ {
        self.edges.iter().filter(move |e| self.active[e.a] && self.active[e.b])
    }

    /// `(graph edge id, detector, detector)` for every live edge.
    pub fn edge_list(&self) -> Vec<(usize, usize, usize)> {
        self.active_edges().map(|e| (e.id, self.nodes[e.a], self.nodes[e.b])).collect()
    }

    pub fn degree(&self, id: usize) -> Option<usize> {
        self.local(id).map(|i| self.deg[i])
    }

    pub fn dependents(&self, id: usize) -> Option<usize> {
        self.local(id).map(|i| self.dependents[i])
    }

    #[inline]
    pub(crate) fn deg_local(&self, i: usize) -> usize {
        self.deg[i]
    }

    /// Unmatched detectors with no unmatched neighbour.
    pub fn singletons(&self) -> Vec<usize> {
        self.active_locals().filter(|&i| self.deg[i] == 0).map(|i| self.nodes[i]).collect()
    }

    pub fn singleton_count(&self) -> usize {
        self.active_locals().filter(|&i| self.deg[i] == 0).count()
    }

    /// Whether removing detectors `a` and `b` would leave some other node
    /// that currently has a neighbour with none.
    pub fn creates_singleton(&self, a: usize, b: usize) -> bool {
        match (self.local(a), self.local(b)) {
            (Some(i), Some(j)) => self.creates_singleton_local(i, j),
            _ => false,
        }
    }

    pub(crate) fn creates_singleton_local(&self, i: usize, j: usize) -> bool {
        let stranded = |k: usize| {
            if k == i || k == j || self.deg[k] == 0 {
                return false;
            }
            let lost = self.neighbors(k).filter(|&n| n == i || n == j).count();
            self.deg[k] == lost
        };
        self.neighbors(i).any(stranded) || self.neighbors(j).any(stranded)
    }

    /// Removes a matched pair and updates degrees and dependent counts.
    pub fn remove_pair(&mut self, a: usize, b: usize) {
        let (i, j) = (self.local(a).expect("a is unmatched"), self.local(b).expect("b is unmatched"));
        self.remove_local(i, j);
    }

    pub(crate) fn remove_local(&mut self, i: usize, j: usize) {
        debug_assert!(i != j && self.active[i] && self.active[j]);
        self.active[i] = false;
        self.active[j] = false;
        self.hw -= 2;
        for (node, partner) in [(i, j), (j, i)] {
            for idx in 0..self.adj[node].len() {
                let e = self.edges[self.adj[node][idx]];
                let other = if e.a == node { e.b } else { e.a };
                if self.active[other] {
                    self.deg[other] -= 1;
                    self.live_edges -= 1;
                } else if other == partner && node == i {
                    self.live_edges -= 1;
                }
            }
        }
        self.deg[i] = 0;
        self.deg[j] = 0;
        self.recompute_dependents();
    }

    /// Recomputes degrees and dependent counts from scratch and compares
    /// them to the maintained values.
    pub fn is_consistent(&self) -> bool {
        let live = self.active_edges().count();
        let singletons_ok = self.active_locals().all(|i| (self.deg[i] == 0) == (self.neighbors(i).count() == 0));
        live == self.live_edges
            && singletons_ok
            && self.active_locals().all(|i| {
                let deg = self.neighbors(i).count();
                let deps = self.neighbors(i).filter(|&k| self.neighbors(k).count() == 1).count();
                deg == self.deg[i] && deps == self.dependents[i]
            })
            && self.active.iter().filter(|&&a| a).count() == self.hw
    }
}
