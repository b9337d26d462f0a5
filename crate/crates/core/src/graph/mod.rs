//! Decoding graph for the Z stabilizers of a rotated surface code over
//! several syndrome-extraction rounds.
//!
//! Coordinates: data qubit `(i, j)` sits at column `i`, row `j` with
//! `0 <= i, j < d`. A plaquette is addressed by its lower-right corner
//! `(x, y)` with `0 <= x, y <= d` and covers the data qubits
//! `(x-1..=x, y-1..=y)` that exist. Bulk plaquettes alternate Z/X in a
//! checkerboard (`x + y` even is Z); weight-2 Z plaquettes sit on the left
//! and right sides, so data qubits in the first and last rows touch a single
//! Z check and carry the boundary edges.
//!
//! The logical observable is the parity of X errors on row 0. Any chain
//! from the top boundary to the bottom boundary crosses that row an odd
//! number of times.

mod io;
mod paths;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::GraphFile;
pub use paths::PathTable;

/// One parity-check outcome difference in one round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detector {
    pub id: usize,
    pub x: i32,
    pub y: i32,
    pub round: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// Data-qubit error between two checks of the same round.
    Space,
    /// Measurement error on one check, linking consecutive rounds.
    Time,
    /// Data-qubit error touching a single check.
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: usize,
    pub u: usize,
    /// Either a detector id or the graph's boundary id.
    pub v: usize,
    pub probability: f64,
    pub weight: f64,
    pub flips_observable: bool,
    pub kind: EdgeKind,
}

impl Edge {
    /// The endpoint opposite to `node`.
    #[inline]
    pub fn other(&self, node: usize) -> usize {
        if self.u == node {
            self.v
        } else {
            self.u
        }
    }
}

/// Log-likelihood weight of an independent error mechanism.
#[inline]
pub fn weight_of(probability: f64) -> f64 {
    -probability.ln()
}

/// The 3-D decoding graph. Immutable once built.
#[derive(Clone, Debug)]
pub struct DetectorGraph {
    distance: usize,
    rounds: usize,
    p: f64,
    nodes: Vec<Detector>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

/// Z-check plaquette corners of a distance-`d` rotated code, ordered by row
/// then column.
pub fn z_plaquettes(d: usize) -> Vec<(i32, i32)> {
    let d = d as i32;
    let mut out = Vec::with_capacity(((d * d - 1) / 2) as usize);
    for y in 1..d {
        for x in 0..=d {
            if (x + y) % 2 != 0 {
                continue;
            }
            // Bulk faces and left/right weight-2 faces; top/bottom faces are X.
            out.push((x, y));
        }
    }
    out
}

impl DetectorGraph {
    /// Builds the uniform-noise decoding graph: every space, time and
    /// boundary edge gets probability `p`.
    pub fn build(distance: usize, rounds: usize, p: f64) -> Result<Self> {
        if distance < 3 || distance.is_multiple_of(2) {
            return Err(Error::InvalidDistance(distance));
        }
        if rounds == 0 {
            return Err(Error::InvalidRounds(rounds));
        }
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::InvalidProbability(p));
        }

        let d = distance as i32;
        let plaquettes = z_plaquettes(distance);
        let per_round = plaquettes.len();
        let index_of = |x: i32, y: i32| plaquettes.binary_search_by(|&(px, py)| (py, px).cmp(&(y, x))).ok();

        let mut nodes = Vec::with_capacity(per_round * rounds);
        for r in 0..rounds {
            for (k, &(x, y)) in plaquettes.iter().enumerate() {
                nodes.push(Detector { id: r * per_round + k, x, y, round: r as u32 });
            }
        }
        let boundary = nodes.len();

        // Z checks touching each data qubit, in row-major data order.
        let mut qubit_checks = Vec::with_capacity(distance * distance);
        for j in 0..d {
            for i in 0..d {
                let mut checks: Vec<usize> = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
                    .into_iter()
                    .filter_map(|(x, y)| index_of(x, y))
                    .collect();
                checks.sort_unstable();
                debug_assert!(matches!(checks.len(), 1 | 2));
                qubit_checks.push((checks, j == 0));
            }
        }

        let w = weight_of(p);
        let mut edges = Vec::new();
        for r in 0..rounds {
            let offset = r * per_round;
            for (checks, on_cut) in &qubit_checks {
                let (u, v, kind) = match checks.as_slice() {
                    [a] => (offset + a, boundary, EdgeKind::Boundary),
                    [a, b] => (offset + a, offset + b, EdgeKind::Space),
                    _ => unreachable!("data qubit touches one or two Z checks"),
                };
                edges.push(Edge { id: edges.len(), u, v, probability: p, weight: w, flips_observable: *on_cut, kind });
            }
            if r + 1 < rounds {
                for k in 0..per_round {
                    edges.push(Edge {
                        id: edges.len(),
                        u: offset + k,
                        v: offset + per_round + k,
                        probability: p,
                        weight: w,
                        flips_observable: false,
                        kind: EdgeKind::Time,
                    });
                }
            }
        }

        Self::from_parts(distance, rounds, p, nodes, edges)
    }

    /// Assembles a graph from explicit nodes and edges, validating ids,
    /// weights and connectivity. Node ids must be `0..nodes.len()` in order;
    /// the boundary id is `nodes.len()`.
    pub fn from_parts(distance: usize, rounds: usize, p: f64, nodes: Vec<Detector>, edges: Vec<Edge>) -> Result<Self> {
        let n = nodes.len();
        for (k, node) in nodes.iter().enumerate() {
            if node.id != k {
                return Err(Error::InvalidGraph(format!("node at position {k} has id {}", node.id)));
            }
        }
        let mut adjacency = vec![Vec::new(); n + 1];
        for (k, e) in edges.iter().enumerate() {
            if e.id != k {
                return Err(Error::InvalidGraph(format!("edge at position {k} has id {}", e.id)));
            }
            if e.u >= n || e.v > n {
                return Err(Error::InvalidGraph(format!("edge {k} references an unknown node")));
            }
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!("edge {k} is a self loop")));
            }
            if !(e.probability > 0.0 && e.probability < 0.5) {
                return Err(Error::InvalidGraph(format!("edge {k} has probability {}", e.probability)));
            }
            if e.weight.is_nan() || e.weight <= 0.0 || (e.weight - weight_of(e.probability)).abs() > 1e-9 * e.weight {
                return Err(Error::InvalidGraph(format!("edge {k} weight does not equal -ln(p)")));
            }
            adjacency[e.u].push(k);
            adjacency[e.v].push(k);
        }
        let graph = Self { distance, rounds, p, nodes, edges, adjacency };
        if !graph.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(graph)
    }

    fn is_connected(&self) -> bool {
        let total = self.nodes.len() + 1;
        let mut seen = vec![false; total];
        let mut queue = VecDeque::from([self.boundary_id()]);
        seen[self.boundary_id()] = true;
        let mut count = 1;
        while let Some(node) = queue.pop_front() {
            for &e in &self.adjacency[node] {
                let next = self.edges[e].other(node);
                if !seen[next] {
                    seen[next] = true;
                    count += 1;
                    queue.push_back(next);
                }
            }
        }
        count == total
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Nominal physical error rate the graph was generated with.
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn num_detectors(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Virtual boundary node id; always `num_detectors()`.
    #[inline]
    pub fn boundary_id(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_boundary(&self, node: usize) -> bool {
        node == self.nodes.len()
    }

    pub fn nodes(&self) -> &[Detector] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// Incident edge ids of a detector or of the boundary.
    #[inline]
    pub fn incident(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    /// Id of an edge joining two detectors directly, if any.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency
            .get(a)?
            .iter()
            .copied()
            .filter(|&e| self.edges[e].other(a) == b)
            .min_by(|&x, &y| self.edges[x].weight.total_cmp(&self.edges[y].weight).then(x.cmp(&y)))
    }

    pub fn detectors_per_round(&self) -> usize {
        self.nodes.len() / self.rounds
    }
}
