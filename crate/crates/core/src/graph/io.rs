//! JSON import/export of decoding graphs. The boundary is written as node
//! id `-1`.

use serde::{Deserialize, Serialize};

use super::{Detector, DetectorGraph, Edge, EdgeKind};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub distance: usize,
    pub rounds: usize,
    pub p: f64,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: i64,
    pub x: i32,
    pub y: i32,
    pub round: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: usize,
    pub u: i64,
    pub v: i64,
    pub prob: f64,
    pub weight: f64,
    pub obs: bool,
}

impl From<&DetectorGraph> for GraphFile {
    fn from(g: &DetectorGraph) -> Self {
        let file_id = |node: usize| if g.is_boundary(node) { -1 } else { node as i64 };
        GraphFile {
            distance: g.distance(),
            rounds: g.rounds(),
            p: g.p(),
            nodes: g.nodes().iter().map(|d| NodeRecord { id: d.id as i64, x: d.x, y: d.y, round: d.round }).collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    id: e.id,
                    u: file_id(e.u),
                    v: file_id(e.v),
                    prob: e.probability,
                    weight: e.weight,
                    obs: e.flips_observable,
                })
                .collect(),
        }
    }
}

impl TryFrom<GraphFile> for DetectorGraph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        let n = file.nodes.len();
        let mut nodes = Vec::with_capacity(n);
        for r in &file.nodes {
            if r.id < 0 {
                return Err(Error::InvalidGraph("the boundary (-1) must not be listed as a node".into()));
            }
            nodes.push(Detector { id: r.id as usize, x: r.x, y: r.y, round: r.round });
        }
        let resolve = |id: i64| -> Result<usize> {
            match id {
                -1 => Ok(n),
                id if id >= 0 && (id as usize) < n => Ok(id as usize),
                _ => Err(Error::InvalidGraph(format!("edge endpoint {id} is not a node"))),
            }
        };
        let mut edges = Vec::with_capacity(file.edges.len());
        for r in &file.edges {
            let (mut u, mut v) = (resolve(r.u)?, resolve(r.v)?);
            if u == n && v == n {
                return Err(Error::InvalidGraph(format!("edge {} joins the boundary to itself", r.id)));
            }
            if u > v {
                std::mem::swap(&mut u, &mut v);
            }
            let kind = if v == n {
                EdgeKind::Boundary
            } else if nodes[u].x == nodes[v].x && nodes[u].y == nodes[v].y {
                EdgeKind::Time
            } else {
                EdgeKind::Space
            };
            edges.push(Edge { id: r.id, u, v, probability: r.prob, weight: r.weight, flips_observable: r.obs, kind });
        }
        DetectorGraph::from_parts(file.distance, file.rounds, file.p, nodes, edges)
    }
}

impl DetectorGraph {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphFile::from(self)).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::InvalidGraph(e.to_string()))?;
        file.try_into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = DetectorGraph::build(5, 3, 2e-3).unwrap();
        let back = DetectorGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back.nodes(), g.nodes());
        assert_eq!(back.edges(), g.edges());
    }

    #[test]
    fn boundary_is_minus_one() {
        let g = DetectorGraph::build(3, 1, 0.01).unwrap();
        let file = GraphFile::from(&g);
        assert!(file.edges.iter().any(|e| e.v == -1));
        assert!(file.edges.iter().all(|e| e.u >= 0));
    }

    #[test]
    fn rejects_boundary_loop_and_bad_weight() {
        let g = DetectorGraph::build(3, 1, 0.01).unwrap();
        let mut file = GraphFile::from(&g);
        file.edges[0].u = -1;
        file.edges[0].v = -1;
        assert!(DetectorGraph::try_from(file).is_err());

        let mut file = GraphFile::from(&g);
        file.edges[0].weight = 1.0;
        assert!(DetectorGraph::try_from(file).is_err());
    }
}
