//! Score graphs, neighbor-count aggregation and communication schedules.
//!
//! Agent ids and score indices are 0-based throughout the API. The text
//! formats in [`io`] use 1-based ids and indices.

use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::models::{Model, Params};
use crate::rng::{self, tag, SimRng};

pub mod io;

/// Directed evaluation topology: `(i, j)` means agent `i` scores agent `j`.
///
/// Edges are kept sorted, so two topologies with the same edge set compare
/// equal regardless of construction order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    n_agents: usize,
    edges: Vec<(usize, usize)>,
}

impl Topology {
    pub fn new(n_agents: usize, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        if n_agents < 2 {
            return Err(Error::InvalidGraph(format!(
                "need at least 2 agents, got {n_agents}"
            )));
        }
        for &(i, j) in &edges {
            if i >= n_agents || j >= n_agents {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) references an agent outside 0..{n_agents}"
                )));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop on agent {i}")));
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let topology = Self { n_agents, edges };
        if let Some(i) = topology.in_degrees().iter().position(|&d| d == 0) {
            return Err(Error::InvalidGraph(format!(
                "agent {i} has no incoming edge"
            )));
        }
        Ok(topology)
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_agents];
        for &(_, j) in &self.edges {
            deg[j] += 1;
        }
        deg
    }

    /// Position of edge `(i, j)` in [`Self::edges`].
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.binary_search(&(i, j)).ok()
    }

    /// Score-graph neighbors of `i` (in or out), sorted.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == i {
                    Some(b)
                } else if b == i {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologyFamily {
    /// Directed cycle `0 -> 1 -> ... -> N-1 -> 0` plus uniformly random
    /// distinct extra edges.
    CyclicPlusRandom,
    /// All ordered pairs; requires `edge_count == N^2 - N`.
    Complete,
    /// Caller-provided edge list; requires `edge_count == edges.len()`.
    Custom(Vec<(usize, usize)>),
}

pub fn max_edges(n_agents: usize) -> usize {
    n_agents * n_agents.saturating_sub(1)
}

pub fn sample_topology(
    n_agents: usize,
    edge_count: usize,
    family: &TopologyFamily,
    seed: u64,
) -> Result<Topology> {
    if n_agents < 2 {
        return Err(Error::InvalidGraph(format!(
            "need at least 2 agents, got {n_agents}"
        )));
    }
    let (min, max) = (n_agents, max_edges(n_agents));
    if edge_count < min || edge_count > max {
        return Err(Error::EdgeCountOutOfRange {
            target: edge_count,
            min,
            max,
            n_agents,
        });
    }
    match family {
        TopologyFamily::CyclicPlusRandom => {
            let mut edges: Vec<(usize, usize)> =
                (0..n_agents).map(|i| (i, (i + 1) % n_agents)).collect();
            let extra = edge_count - n_agents;
            if extra > 0 {
                let mut pool: Vec<(usize, usize)> = (0..n_agents)
                    .flat_map(|i| (0..n_agents).map(move |j| (i, j)))
                    .filter(|&(i, j)| i != j && j != (i + 1) % n_agents)
                    .collect();
                let mut rng = rng::stream(seed, &[tag::TOPOLOGY]);
                let (chosen, _) = pool.partial_shuffle(&mut rng, extra);
                edges.extend_from_slice(chosen);
            }
            Topology::new(n_agents, edges)
        }
        TopologyFamily::Complete => {
            if edge_count != max {
                return Err(Error::InvalidGraph(format!(
                    "complete topology on {n_agents} agents has {max} edges, requested {edge_count}"
                )));
            }
            let edges = (0..n_agents)
                .flat_map(|i| (0..n_agents).map(move |j| (i, j)))
                .filter(|&(i, j)| i != j)
                .collect();
            Topology::new(n_agents, edges)
        }
        TopologyFamily::Custom(edges) => {
            if edges.len() != edge_count {
                return Err(Error::InvalidGraph(format!(
                    "custom edge list has {} edges, requested {edge_count}",
                    edges.len()
                )));
            }
            Topology::new(n_agents, edges.clone())
        }
    }
}

/// A topology whose every edge carries a score index in `0..score_levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreGraph {
    topology: Topology,
    score_levels: usize,
    scores: Vec<usize>,
}

impl ScoreGraph {
    /// `scores[k]` is the score index of `topology.edges()[k]`.
    pub fn new(topology: Topology, score_levels: usize, scores: Vec<usize>) -> Result<Self> {
        if score_levels < 2 {
            return Err(Error::InvalidGraph(format!(
                "score alphabet needs at least 2 values, got {score_levels}"
            )));
        }
        if scores.len() != topology.n_edges() {
            return Err(Error::LengthMismatch {
                left: scores.len(),
                right: topology.n_edges(),
            });
        }
        if let Some(&h) = scores.iter().find(|&&h| h >= score_levels) {
            return Err(Error::InvalidGraph(format!(
                "score index {h} outside 0..{score_levels}"
            )));
        }
        Ok(Self {
            topology,
            score_levels,
            scores,
        })
    }

    /// Build from `(i, j, h)` triples in any order.
    pub fn from_triples(
        n_agents: usize,
        score_levels: usize,
        triples: &[(usize, usize, usize)],
    ) -> Result<Self> {
        let topology = Topology::new(n_agents, triples.iter().map(|t| (t.0, t.1)).collect())?;
        let mut scores = vec![0; topology.n_edges()];
        for &(i, j, h) in triples {
            let k = topology
                .edge_index(i, j)
                .expect("edge present by construction");
            scores[k] = h;
        }
        Self::new(topology, score_levels, scores)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn n_agents(&self) -> usize {
        self.topology.n_agents
    }

    pub fn n_edges(&self) -> usize {
        self.topology.n_edges()
    }

    pub fn score_levels(&self) -> usize {
        self.score_levels
    }

    pub fn scores(&self) -> &[usize] {
        &self.scores
    }

    /// Iterate `(evaluator, target, score index)`.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.topology
            .edges
            .iter()
            .zip(&self.scores)
            .map(|(&(i, j), &h)| (i, j, h))
    }

    pub fn score(&self, i: usize, j: usize) -> Option<usize> {
        self.topology.edge_index(i, j).map(|k| self.scores[k])
    }
}

pub(crate) fn sample_index<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last = k;
            acc += p;
            if u < acc {
                return k;
            }
        }
    }
    last
}

/// Draw i.i.d. states from the prior, then one score per edge conditioned on
/// the endpoint states. Returns the scored graph and the true states.
pub fn generate_scores(
    topology: &Topology,
    model: &Model,
    truth: &Params,
    seed: u64,
) -> Result<(ScoreGraph, Vec<usize>)> {
    let tensor = model.tensor(&truth.theta)?;
    let prior = model.prior(&truth.gamma)?;
    let n = topology.n_agents();
    let states: Vec<usize> = (0..n)
        .map(|i| sample_index(&mut rng::stream(seed, &[tag::STATES, i as u64]), &prior))
        .collect();
    let mut score_rngs: Vec<SimRng> = (0..n)
        .map(|i| rng::stream(seed, &[tag::SCORES, i as u64]))
        .collect();
    let mut row = vec![0.0; model.num_scores()];
    let scores = topology
        .edges()
        .iter()
        .map(|&(i, j)| {
            for (h, p) in row.iter_mut().enumerate() {
                *p = tensor.p(h, states[i], states[j]);
            }
            sample_index(&mut score_rngs[j], &row)
        })
        .collect();
    let graph = ScoreGraph::new(topology.clone(), model.num_scores(), scores)?;
    Ok((graph, states))
}

/// Per-agent score histograms consumed by the classifier and estimators.
///
/// For agent `i`:
/// * `received(i)[h]`: in-edges `(j, i)` with score `h`;
/// * `mutual(i, h, k)`: neighbors `j` with both edges present, `y_ij = h`
///   (given) and `y_ji = k` (received);
/// * `in_only(i)[h]`: in-neighbors `j` without the reverse edge, `y_ji = h`;
/// * `out_only(i)[h]`: out-neighbors `j` without the reverse edge, `y_ij = h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborCounts {
    n_agents: usize,
    score_levels: usize,
    received: Vec<u64>,
    mutual: Vec<u64>,
    in_only: Vec<u64>,
    out_only: Vec<u64>,
}

impl NeighborCounts {
    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn score_levels(&self) -> usize {
        self.score_levels
    }

    pub fn received(&self, i: usize) -> &[u64] {
        let r = self.score_levels;
        &self.received[i * r..(i + 1) * r]
    }

    pub fn mutual(&self, i: usize, given: usize, received: usize) -> u64 {
        let r = self.score_levels;
        self.mutual[(i * r + given) * r + received]
    }

    pub fn in_only(&self, i: usize) -> &[u64] {
        let r = self.score_levels;
        &self.in_only[i * r..(i + 1) * r]
    }

    pub fn out_only(&self, i: usize) -> &[u64] {
        let r = self.score_levels;
        &self.out_only[i * r..(i + 1) * r]
    }

    pub fn in_degree(&self, i: usize) -> u64 {
        self.received(i).iter().sum()
    }

    /// `n^(h)`: number of edges carrying score `h`.
    pub fn totals(&self) -> Vec<u64> {
        let r = self.score_levels;
        let mut out = vec![0; r];
        for row in self.received.chunks(r) {
            for (o, &c) in out.iter_mut().zip(row) {
                *o += c;
            }
        }
        out
    }

    pub fn n_edges(&self) -> u64 {
        self.received.iter().sum()
    }

    /// Empirical score frequencies `n^(h) / n`.
    pub fn phi(&self) -> Vec<f64> {
        let n = self.n_edges() as f64;
        self.totals().into_iter().map(|c| c as f64 / n).collect()
    }
}

pub fn aggregate_counts(graph: &ScoreGraph) -> NeighborCounts {
    let n = graph.n_agents();
    let r = graph.score_levels();
    let mut counts = NeighborCounts {
        n_agents: n,
        score_levels: r,
        received: vec![0; n * r],
        mutual: vec![0; n * r * r],
        in_only: vec![0; n * r],
        out_only: vec![0; n * r],
    };
    for (j, i, h) in graph.triples() {
        counts.received[i * r + h] += 1;
        match graph.score(i, j) {
            Some(given) => counts.mutual[(i * r + given) * r + h] += 1,
            None => {
                counts.in_only[i * r + h] += 1;
                counts.out_only[j * r + h] += 1;
            }
        }
    }
    counts
}

/// True when every node reaches and is reached from node 0.
pub fn is_strongly_connected(n_agents: usize, edges: &[(usize, usize)]) -> bool {
    if n_agents <= 1 {
        return true;
    }
    let mut fwd = vec![Vec::new(); n_agents];
    let mut bwd = vec![Vec::new(); n_agents];
    for &(a, b) in edges {
        fwd[a].push(b);
        bwd[b].push(a);
    }
    let reaches_all = |adj: &[Vec<usize>]| {
        let mut seen = vec![false; n_agents];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == n_agents
    };
    reaches_all(&fwd) && reaches_all(&bwd)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleFamily {
    StaticComplete,
    StaticCycle,
    /// The edges of a directed cycle over a seeded permutation, split across
    /// `Q` frames.
    PeriodicEdgePartition,
}

/// Cyclic sequence of communication frames. Self-loops are implicit: they
/// are never stored but always count toward out-degrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommSchedule {
    n_agents: usize,
    period: usize,
    frames: Vec<Vec<(usize, usize)>>,
}

impl CommSchedule {
    /// Validates that the union of every `period` consecutive frames is
    /// strongly connected.
    pub fn new(n_agents: usize, period: usize, frames: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidSchedule("period Q must be >= 1".into()));
        }
        if frames.is_empty() {
            return Err(Error::InvalidSchedule("no frames".into()));
        }
        let mut clean = Vec::with_capacity(frames.len());
        for frame in frames {
            let mut seen = HashSet::new();
            let mut edges = Vec::with_capacity(frame.len());
            for (a, b) in frame {
                if a >= n_agents || b >= n_agents {
                    return Err(Error::InvalidSchedule(format!(
                        "edge ({a}, {b}) outside 0..{n_agents}"
                    )));
                }
                if a != b && seen.insert((a, b)) {
                    edges.push((a, b));
                }
            }
            edges.sort_unstable();
            clean.push(edges);
        }
        let schedule = Self {
            n_agents,
            period,
            frames: clean,
        };
        if let Some(t) = schedule.first_disconnected_window() {
            return Err(Error::InvalidSchedule(format!(
                "union of frames {}..{} is not strongly connected",
                t * period,
                (t + 1) * period - 1
            )));
        }
        Ok(schedule)
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn frames(&self) -> &[Vec<(usize, usize)>] {
        &self.frames
    }

    pub fn frame(&self, t: usize) -> &[(usize, usize)] {
        &self.frames[t % self.frames.len()]
    }

    /// Union of frames `t*Q .. (t+1)*Q - 1`.
    pub fn window_union(&self, t: usize) -> Vec<(usize, usize)> {
        let mut all: Vec<(usize, usize)> = (t * self.period..(t + 1) * self.period)
            .flat_map(|s| self.frame(s).iter().copied())
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// Window starts repeat with period `frames.len()`, so checking that
    /// many windows covers every `t`.
    fn first_disconnected_window(&self) -> Option<usize> {
        (0..self.frames.len())
            .find(|&t| !is_strongly_connected(self.n_agents, &self.window_union(t)))
    }

    /// `d_j(t)`, counting the implicit self-loop.
    pub fn out_degrees(&self, t: usize) -> Vec<usize> {
        let mut deg = vec![1; self.n_agents];
        for &(a, _) in self.frame(t) {
            deg[a] += 1;
        }
        deg
    }
}

pub fn make_comm_schedule(
    n_agents: usize,
    family: ScheduleFamily,
    period: usize,
    seed: u64,
) -> Result<CommSchedule> {
    if n_agents < 2 {
        return Err(Error::InvalidSchedule(format!(
            "need at least 2 agents, got {n_agents}"
        )));
    }
    let cycle = |order: &[usize]| -> Vec<(usize, usize)> {
        (0..order.len())
            .map(|k| (order[k], order[(k + 1) % order.len()]))
            .collect()
    };
    match family {
        ScheduleFamily::StaticComplete => {
            let edges = (0..n_agents)
                .flat_map(|i| (0..n_agents).map(move |j| (i, j)))
                .filter(|&(i, j)| i != j)
                .collect();
            CommSchedule::new(n_agents, period, vec![edges])
        }
        ScheduleFamily::StaticCycle => {
            let order: Vec<usize> = (0..n_agents).collect();
            CommSchedule::new(n_agents, period, vec![cycle(&order)])
        }
        ScheduleFamily::PeriodicEdgePartition => {
            if period > n_agents {
                return Err(Error::InvalidSchedule(format!(
                    "cannot split a {n_agents}-edge cycle into {period} non-empty frames"
                )));
            }
            let mut rng = rng::stream(seed, &[tag::SCHEDULE]);
            let mut order: Vec<usize> = (0..n_agents).collect();
            order[1..].shuffle(&mut rng);
            let mut edges = cycle(&order);
            edges.shuffle(&mut rng);
            let mut frames = vec![Vec::new(); period];
            for (k, e) in edges.into_iter().enumerate() {
                frames[k % period].push(e);
            }
            CommSchedule::new(n_agents, period, frames)
        }
    }
}
