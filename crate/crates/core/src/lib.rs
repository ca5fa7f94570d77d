//! Correlated dense associative memory: a continuous-state attractor network
//! whose recall mixes auto-association with hetero-association along a
//! memory graph, plus the harness that reproduces its experiments.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod ingest;
pub mod rng;
pub mod stats;

pub use dynamics::{
    energy, init_state, overlap, pearson, run, softmax_beta, update_step, Dynamics, LoadScale,
    ModelParams, NetworkState, PatternMatrix, SimulationTrace, StopRule, Termination,
};
pub use error::{CdamError, Result};
pub use graph::{normalize, Coupling, MemoryGraph, NormalizedAdjacency};
pub use ingest::{random_patterns, AutomatonSpec};
pub use stats::{one_way_anova, Anova};
