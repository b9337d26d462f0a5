//! Surface-code decoding toolkit built around a locality-aware adaptive
//! predecoder ("Promatch") placed in front of an exact brute-force MWPM main
//! decoder.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] builds the rotated-surface-code decoding graph and its
//!   all-pairs [`PathTable`].
//! * [`noise`] injects errors on graph edges and derives syndromes.
//! * [`predecoder`] implements the four-step prematching algorithm and the
//!   cycle-count latency model.
//! * [`matching`] is the exhaustive low-Hamming-weight MWPM decoder.
//! * [`oracle`] holds reference decoders (full-syndrome MWPM, a greedy
//!   baseline) and chain-length statistics.
//! * [`harness`] runs memory experiments and rare-event LER estimation.

pub mod error;
pub mod graph;
pub mod harness;
pub mod matching;
pub mod noise;
pub mod oracle;
pub mod predecoder;

pub use error::{Error, Result};
pub use graph::{DetectorGraph, PathTable};
pub use matching::{brute_force_mwpm, DecodeOutcome, MainDecoder, MatchConfig, MatchingSet};
pub use noise::{ErrorSet, Syndrome};
pub use predecoder::{promatch, PredecodeResult, Prematch, PromatchConfig, Step, TimingModel};

/// Largest syndrome Hamming weight the real-time main decoder handles
/// without predecoding.
pub const LOW_HW_LIMIT: usize = 10;
