use thiserror::Error;

/// Errors raised by graph construction, sampling and decoding.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("code distance must be an odd integer >= 3, got {0}")]
    InvalidDistance(usize),
    #[error("number of rounds must be >= 1, got {0}")]
    InvalidRounds(usize),
    #[error("probability must lie in (0, 0.5), got {0}")]
    InvalidProbability(f64),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("node {0} is not a detector of this graph")]
    UnknownNode(usize),
    #[error("edge {0} is not an edge of this graph")]
    UnknownEdge(usize),
    #[error("path endpoints must differ (got {0} twice)")]
    SameEndpoints(usize),
    #[error("no path between {0} and {1}; path table is corrupt")]
    Unreachable(usize, usize),
    #[error("cannot inject {k} errors into a graph with {edges} edges")]
    TooManyErrors { k: usize, edges: usize },
    #[error("syndrome Hamming weight {hw} exceeds the decoder cap of {cap}")]
    HammingWeightCap { hw: usize, cap: usize },
    #[error("odd number of flipped detectors ({0}) with boundary matching disabled")]
    NoPerfectMatching(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
