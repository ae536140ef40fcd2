//! Fault and rank estimation from peer score graphs.
//!
//! Agents score their neighbors on a discrete scale; scores depend on the
//! hidden states of both endpoints through a model [`Model`]. The crate
//! estimates the model parameters (exactly for small networks, or through
//! node-based and fully relaxed likelihoods), classifies agents from their
//! one-hop neighborhood, and runs the fully relaxed estimator in a
//! decentralized way over a time-varying communication graph.

pub mod checks;
pub mod classifier;
pub mod distributed;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod graph;
pub mod math;
pub mod models;
pub mod rng;

pub use classifier::{
    map_classify, map_label, misclassification_rate, soft_classify, ClassifierOutput,
};
pub use error::{Error, Result};
pub use estimators::{
    estimate, EstimatorKind, EstimatorProblem, Objective, Solution, SolverConfig, StepRule,
};
pub use graph::{
    aggregate_counts, generate_scores, sample_topology, CommSchedule, NeighborCounts,
    ScheduleFamily, ScoreGraph, Topology, TopologyFamily,
};
pub use models::{Distance, FeasibleSet, Model, Params};
