use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::DetectorGraph;
use crate::error::{Error, Result};

const NO_EDGE: u32 = u32::MAX;

/// All-pairs shortest paths between detectors, plus detector-to-boundary
/// shortest paths.
///
/// Detector-to-detector routes never pass through the boundary node; a pair
/// joined "through the boundary" is two boundary matches and is handled as
/// such by the matching decoder.
#[derive(Clone, Debug)]
pub struct PathTable {
    n: usize,
    weight: Vec<f64>,
    hops: Vec<u16>,
    /// `pred[s * n + v]`: last edge on the route from `s` to `v` (`s < v`).
    pred: Vec<u32>,
    boundary_weight: Vec<f64>,
    boundary_hops: Vec<u16>,
    /// First edge on the route from a detector towards the boundary.
    boundary_next: Vec<u32>,
    quantization: Option<Quantization>,
}

/// Four-bucket coarse path weights for 8-bit table storage.
#[derive(Clone, Debug)]
pub struct Quantization {
    /// Upper bounds of buckets 0, 1 and 2 (quartiles of the off-diagonal weights).
    pub thresholds: [f64; 3],
    buckets: Vec<u8>,
}

impl Quantization {
    pub fn bucket_of(&self, w: f64) -> u8 {
        self.thresholds.iter().take_while(|&&t| w > t).count() as u8
    }
}

#[derive(Copy, Clone, PartialEq)]
struct Item {
    dist: f64,
    node: usize,
}

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, node)
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source Dijkstra. `through_boundary` controls whether the boundary
/// node may be entered. Returns (dist, hops, parent edge).
fn dijkstra(graph: &DetectorGraph, source: usize, through_boundary: bool) -> (Vec<f64>, Vec<u16>, Vec<u32>) {
    let total = graph.num_detectors() + 1;
    let mut dist = vec![f64::INFINITY; total];
    let mut hops = vec![u16::MAX; total];
    let mut parent = vec![NO_EDGE; total];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    hops[source] = 0;
    heap.push(Item { dist: 0.0, node: source });
    while let Some(Item { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        if node != source && graph.is_boundary(node) && !through_boundary {
            continue;
        }
        for &e in graph.incident(node) {
            let edge = graph.edge(e);
            let next = edge.other(node);
            let nd = d + edge.weight;
            let nh = hops[node].saturating_add(1);
            if nd < dist[next] || (nd == dist[next] && nh < hops[next]) {
                dist[next] = nd;
                hops[next] = nh;
                parent[next] = e as u32;
                heap.push(Item { dist: nd, node: next });
            }
        }
    }
    (dist, hops, parent)
}

impl PathTable {
    pub fn build(graph: &DetectorGraph) -> Self {
        Self::build_with(graph, false)
    }

    /// Builds the table, optionally with the four-bucket quantization used
    /// for singleton-path comparisons.
    pub fn build_with(graph: &DetectorGraph, quantize: bool) -> Self {
        let n = graph.num_detectors();
        let mut weight = vec![0.0; n * n];
        let mut hops = vec![0u16; n * n];
        let mut pred = vec![NO_EDGE; n * n];

        for s in 0..n {
            let (dist, h, parent) = dijkstra(graph, s, false);
            let row = s * n;
            weight[row + s..row + n].copy_from_slice(&dist[s..n]);
            hops[row + s..row + n].copy_from_slice(&h[s..n]);
            // Routes from s may pass through lower-numbered nodes.
            pred[row..row + n].copy_from_slice(&parent[..n]);
        }
        for i in 0..n {
            for j in 0..i {
                weight[i * n + j] = weight[j * n + i];
                hops[i * n + j] = hops[j * n + i];
            }
        }

        let (bdist, bhops, bparent) = dijkstra(graph, graph.boundary_id(), true);
        let mut table = Self {
            n,
            weight,
            hops,
            pred,
            boundary_weight: bdist[..n].to_vec(),
            boundary_hops: bhops[..n].to_vec(),
            boundary_next: bparent[..n].to_vec(),
            quantization: None,
        };
        if quantize {
            table.quantize();
        }
        table
    }

    /// Enables the four-bucket quantization; bucket bounds are the
    /// quartiles of the observed off-diagonal detector-pair weights.
    pub fn quantize(&mut self) {
        let n = self.n;
        let mut sample: Vec<f64> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| self.weight[i * n + j])
            .filter(|w| w.is_finite())
            .collect();
        if sample.is_empty() {
            sample.push(0.0);
        }
        sample.sort_by(f64::total_cmp);
        let q = |f: f64| sample[((sample.len() - 1) as f64 * f).round() as usize];
        let mut quant = Quantization { thresholds: [q(0.25), q(0.5), q(0.75)], buckets: Vec::new() };
        quant.buckets = self.weight.iter().map(|&w| quant.bucket_of(w)).collect();
        self.quantization = Some(quant);
    }

    pub fn quantization(&self) -> Option<&Quantization> {
        self.quantization.as_ref()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weight[i * self.n + j]
    }

    #[inline]
    pub fn hops(&self, i: usize, j: usize) -> u16 {
        self.hops[i * self.n + j]
    }

    #[inline]
    pub fn boundary_weight(&self, i: usize) -> f64 {
        self.boundary_weight[i]
    }

    #[inline]
    pub fn boundary_hops(&self, i: usize) -> u16 {
        self.boundary_hops[i]
    }

    /// Weight used when ranking singleton paths: the bucket index when
    /// quantization is enabled, the exact weight otherwise.
    #[inline]
    pub fn ranking_weight(&self, i: usize, j: usize) -> f64 {
        match &self.quantization {
            Some(q) => q.buckets[i * self.n + j] as f64,
            None => self.weight(i, j),
        }
    }

    /// Edge ids of the stored shortest route from `i` to `j`, ordered from `i`.
    pub fn reconstruct_path(&self, graph: &DetectorGraph, i: usize, j: usize) -> Result<Vec<usize>> {
        if i >= self.n {
            return Err(Error::UnknownNode(i));
        }
        if j >= self.n {
            return Err(Error::UnknownNode(j));
        }
        if i == j {
            return Err(Error::SameEndpoints(i));
        }
        let (s, t) = if i < j { (i, j) } else { (j, i) };
        let row = s * self.n;
        let mut path = Vec::with_capacity(self.hops(s, t) as usize);
        let mut node = t;
        while node != s {
            let e = self.pred[row + node];
            if e == NO_EDGE || path.len() > self.n {
                return Err(Error::Unreachable(i, j));
            }
            path.push(e as usize);
            node = graph.edge(e as usize).other(node);
        }
        // Walked back from t to s.
        if i < j {
            path.reverse();
        }
        Ok(path)
    }

    /// Edge ids of the stored shortest route from detector `i` to the boundary.
    pub fn reconstruct_boundary_path(&self, graph: &DetectorGraph, i: usize) -> Result<Vec<usize>> {
        if i >= self.n {
            return Err(Error::UnknownNode(i));
        }
        let mut path = Vec::with_capacity(self.boundary_hops[i] as usize);
        let mut node = i;
        while !graph.is_boundary(node) {
            let e = self.boundary_next[node];
            if e == NO_EDGE || path.len() > self.n {
                return Err(Error::Unreachable(i, graph.boundary_id()));
            }
            path.push(e as usize);
            node = graph.edge(e as usize).other(node);
        }
        Ok(path)
    }
}
