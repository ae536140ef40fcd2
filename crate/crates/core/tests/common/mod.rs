//! Reference implementations used as test oracles. They follow the
//! definitions literally (plain products and sums, explicit enumeration) and
//! share no code with the library beyond the model tensor and prior.

#![allow(dead_code)]

use rand::Rng;
use scorenet::graph::{generate_scores, sample_topology, ScoreGraph, TopologyFamily};
use scorenet::models::{
    categorical_model, preparata_model, reliability_model, social_ranking_model, Distance, Model,
    Params,
};
use scorenet::rng::SimRng;

pub fn all_models() -> Vec<Model> {
    vec![
        preparata_model(),
        reliability_model(2).unwrap(),
        reliability_model(4).unwrap(),
        social_ranking_model(3, 3, Distance::Absolute).unwrap(),
        social_ranking_model(2, 4, Distance::Absolute).unwrap(),
        social_ranking_model(
            3,
            2,
            Distance::Table(vec![0.0, 1.0, 3.0, 2.0, 0.0, 1.0, 1.5, 1.0, 0.0]),
        )
        .unwrap(),
        categorical_model(2, 3).unwrap(),
        categorical_model(3, 2).unwrap(),
    ]
}

/// Random point of the feasible set, `margin` away from interval ends.
pub fn random_params(model: &Model, rng: &mut SimRng, margin: f64) -> Params {
    Params::from_flat(model, &model.feasible_set().sample(rng, margin))
}

/// Random instance: topology with `n_edges` edges and scores drawn from the
/// model at random interior parameters.
pub fn random_instance(
    model: &Model,
    n_agents: usize,
    n_edges: usize,
    rng: &mut SimRng,
) -> (ScoreGraph, Vec<usize>, Params) {
    let params = random_params(model, rng, 0.1);
    let topo = sample_topology(
        n_agents,
        n_edges,
        &TopologyFamily::CyclicPlusRandom,
        rng.gen(),
    )
    .unwrap();
    let (graph, states) = generate_scores(&topo, model, &params, rng.gen()).unwrap();
    (graph, states, params)
}

fn prob(model: &Model, params: &Params) -> (impl Fn(usize, usize, usize) -> f64, Vec<f64>) {
    let t = model.tensor(&params.theta).unwrap();
    let prior = model.prior(&params.gamma).unwrap();
    (move |h, l, m| t.p(h, l, m), prior)
}

/// Calls `f` on every vector in `{0..c}^len`.
pub fn for_each_assignment(len: usize, c: usize, mut f: impl FnMut(&[usize])) {
    let mut x = vec![0usize; len];
    loop {
        f(&x);
        let mut k = 0;
        loop {
            if k == len {
                return;
            }
            x[k] += 1;
            if x[k] < c {
                break;
            }
            x[k] = 0;
            k += 1;
        }
    }
}

/// Posterior of agent `i` given the scores on edges incident to it, by
/// enumerating the joint states of `i` and its neighbors.
pub fn brute_force_posterior(
    graph: &ScoreGraph,
    model: &Model,
    params: &Params,
    i: usize,
) -> Vec<f64> {
    let (p, prior) = prob(model, params);
    let c = model.num_states();
    let mut nodes = vec![i];
    let incident: Vec<(usize, usize, usize)> = graph
        .triples()
        .filter(|&(a, b, _)| a == i || b == i)
        .collect();
    for &(a, b, _) in &incident {
        for v in [a, b] {
            if !nodes.contains(&v) {
                nodes.push(v);
            }
        }
    }
    let pos = |v: usize| nodes.iter().position(|&x| x == v).unwrap();
    let mut post = vec![0.0; c];
    for_each_assignment(nodes.len(), c, |x| {
        let mut w: f64 = x.iter().map(|&s| prior[s]).product();
        for &(a, b, h) in &incident {
            w *= p(h, x[pos(a)], x[pos(b)]);
        }
        post[x[0]] += w;
    });
    let z: f64 = post.iter().sum();
    post.iter().map(|v| v / z).collect()
}

/// Exact log-likelihood by a plain sum of products over all joint states.
pub fn naive_exact_loglik(graph: &ScoreGraph, model: &Model, params: &Params) -> f64 {
    let (p, prior) = prob(model, params);
    let triples: Vec<_> = graph.triples().collect();
    let mut total = 0.0;
    for_each_assignment(graph.n_agents(), model.num_states(), |x| {
        let mut w: f64 = x.iter().map(|&s| prior[s]).product();
        for &(a, b, h) in &triples {
            w *= p(h, x[a], x[b]);
        }
        total += w;
    });
    total.ln()
}

/// `sum_i log P(scores received by i)`, one edge factor at a time.
pub fn naive_nr(graph: &ScoreGraph, model: &Model, params: &Params) -> f64 {
    let (p, prior) = prob(model, params);
    let c = model.num_states();
    (0..graph.n_agents())
        .map(|i| {
            let incoming: Vec<usize> = graph
                .triples()
                .filter(|&(_, b, _)| b == i)
                .map(|(_, _, h)| h)
                .collect();
            let total: f64 = (0..c)
                .map(|l| {
                    prior[l]
                        * incoming
                            .iter()
                            .map(|&h| (0..c).map(|m| p(h, m, l) * prior[m]).sum::<f64>())
                            .product::<f64>()
                })
                .sum();
            total.ln()
        })
        .sum()
}

/// Log of the fully relaxed likelihood as a product over edges.
pub fn edge_product_fr(graph: &ScoreGraph, model: &Model, params: &Params) -> f64 {
    let (p, prior) = prob(model, params);
    let c = model.num_states();
    graph
        .triples()
        .map(|(_, _, h)| {
            let mut s = 0.0;
            for l in 0..c {
                for m in 0..c {
                    s += p(h, l, m) * prior[l] * prior[m];
                }
            }
            s.ln()
        })
        .sum()
}

/// Per-edge binary fully relaxed log-likelihood of the Preparata model.
pub fn binary_fr_loglik(phi2: f64, gamma: f64) -> f64 {
    let term = |w: f64, q: f64| if w == 0.0 { 0.0 } else { w * q.ln() };
    term(1.0 - phi2, 0.5 * gamma + (1.0 - gamma) * (1.0 - gamma))
        + term(phi2, 1.5 * gamma - gamma * gamma)
}

/// Derivative of [`binary_fr_loglik`] in `gamma`, written out by hand.
pub fn binary_fr_loglik_slope(phi2: f64, gamma: f64) -> f64 {
    let q1 = 0.5 * gamma + (1.0 - gamma) * (1.0 - gamma);
    let q2 = 1.5 * gamma - gamma * gamma;
    let d1 = 0.5 - 2.0 * (1.0 - gamma);
    let d2 = 1.5 - 2.0 * gamma;
    let term = |w: f64, d: f64, q: f64| if w == 0.0 { 0.0 } else { w * d / q };
    term(1.0 - phi2, d1, q1) + term(phi2, d2, q2)
}

/// Maximizer of the binary fully relaxed log-likelihood on `[0, 3/4]`,
/// where it is unimodal, by bisection on the sign of its slope. Bisection
/// keeps full precision where the curve is too flat for comparisons of
/// function values.
pub fn binary_fr_argmax(phi2: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 0.75f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_fr_loglik_slope(phi2, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Central finite differences of `f` at `z`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, z: &[f64], h: f64) -> Vec<f64> {
    (0..z.len())
        .map(|k| {
            let mut zp = z.to_vec();
            let mut zm = z.to_vec();
            zp[k] += h;
            zm[k] -= h;
            (f(&zp) - f(&zm)) / (2.0 * h)
        })
        .collect()
}

/// Five-point central difference of `f` along `d`.
pub fn directional_diff(f: impl Fn(&[f64]) -> f64, z: &[f64], d: &[f64], h: f64) -> f64 {
    let at = |s: f64| -> f64 {
        let p: Vec<f64> = z.iter().zip(d).map(|(a, b)| a + s * h * b).collect();
        f(&p)
    };
    (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * h)
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let den = a
        .iter()
        .chain(b)
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(1e-12);
    num / den
}

/// Strong connectivity via petgraph's strongly connected components.
pub fn scc_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut g = petgraph::graph::DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for &(a, b) in edges {
        g.add_edge(nodes[a], nodes[b], ());
    }
    petgraph::algo::kosaraju_scc(&g).len() == 1
}
