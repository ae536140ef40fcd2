//! Fixtures shared by the benchmarks.

use scorenet::graph::{
    aggregate_counts, generate_scores, sample_topology, NeighborCounts, TopologyFamily,
};
use scorenet::models::{reliability_model, Model, Params};

/// Reliability-model instance with `n` agents and about `5 n` edges.
pub fn reliability_instance(n: usize, seed: u64) -> (Model, Params, NeighborCounts) {
    let model = reliability_model(4).expect("valid model");
    let params = Params::gamma_only(0.2);
    let topo =
        sample_topology(n, 5 * n, &TopologyFamily::CyclicPlusRandom, seed).expect("valid topology");
    let (graph, _) = generate_scores(&topo, &model, &params, seed).expect("valid scores");
    (model, params, aggregate_counts(&graph))
}
