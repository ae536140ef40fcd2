//! Synchronous simulation of the decentralized fully relaxed estimator.
//!
//! Every agent keeps push-sum masses `(xi_i, eta_i)` whose ratio tracks the
//! network-wide score frequencies `phi`, and a local iterate `z_i` that takes
//! projected-gradient steps on `phi_i^T g(z)`. Frame edges `(a, b)` mean `a`
//! sends to `b`; every agent also keeps a share of its own mass.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{default_start, fr_weighted_gradient};
use crate::graph::{CommSchedule, NeighborCounts};
use crate::math::dist2;
use crate::models::{Model, Params, FEASIBILITY_TOL};
use crate::rng::{self, tag};

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    /// Push-sum numerators, one per score level.
    pub xi: Vec<f64>,
    /// Push-sum weight.
    pub eta: f64,
    /// Local parameter iterate, flattened as in [`Params::flatten`].
    pub z: Vec<f64>,
}

impl AgentState {
    pub fn phi(&self) -> Vec<f64> {
        self.xi.iter().map(|x| x / self.eta).collect()
    }
}

/// Initial masses `xi_i = n_i^(h)`, `eta_i = n_i` with the given iterates.
pub fn init_agents(counts: &NeighborCounts, starts: Vec<Vec<f64>>) -> Result<Vec<AgentState>> {
    if starts.len() != counts.n_agents() {
        return Err(Error::LengthMismatch {
            left: starts.len(),
            right: counts.n_agents(),
        });
    }
    Ok(starts
        .into_iter()
        .enumerate()
        .map(|(i, z)| AgentState {
            xi: counts.received(i).iter().map(|&c| c as f64).collect(),
            eta: counts.in_degree(i) as f64,
            z,
        })
        .collect())
}

/// One synchronous push-sum round over `frame`. Reads only the pre-round
/// masses, so the update does not depend on agent order.
pub fn push_sum_round(agents: &mut [AgentState], frame: &[(usize, usize)]) -> Result<()> {
    let n = agents.len();
    let mut deg = vec![1usize; n];
    for &(a, b) in frame {
        if a >= n || b >= n {
            return Err(Error::InvalidSchedule(format!(
                "edge ({a}, {b}) outside 0..{n}"
            )));
        }
        deg[a] += 1;
    }
    if let Some(i) = agents.iter().position(|a| a.eta.is_nan() || a.eta <= 0.0) {
        return Err(Error::InvalidInput(format!(
            "push-sum weight of agent {i} is not positive"
        )));
    }
    let shares: Vec<(Vec<f64>, f64)> = agents
        .iter()
        .zip(&deg)
        .map(|(a, &d)| {
            let d = d as f64;
            (a.xi.iter().map(|x| x / d).collect(), a.eta / d)
        })
        .collect();
    for (a, (xi, eta)) in agents.iter_mut().zip(&shares) {
        a.xi.clone_from(xi);
        a.eta = *eta;
    }
    for &(src, dst) in frame {
        let (xi, eta) = &shares[src];
        let a = &mut agents[dst];
        for (x, s) in a.xi.iter_mut().zip(xi) {
            *x += s;
        }
        a.eta += eta;
    }
    Ok(())
}

/// `P[z - alpha * phi^T grad g(z)]`.
pub fn local_gradient_step(model: &Model, z: &[f64], phi: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if phi.len() != model.num_scores() {
        return Err(Error::LengthMismatch {
            left: phi.len(),
            right: model.num_scores(),
        });
    }
    if phi.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite {
            what: "local score frequencies",
            iter: 0,
        });
    }
    let params = Params::from_flat(model, z);
    let grad = fr_weighted_gradient(phi, model, &params)?;
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            what: "local gradient",
            iter: 0,
        });
    }
    let mut next: Vec<f64> = z.iter().zip(&grad).map(|(x, g)| x - alpha * g).collect();
    model.feasible_set().project(&mut next);
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RoundOrder {
    /// `z_i(t+1)` uses `phi_i(t)`; consensus then advances to `t+1`.
    GradientFirst,
    /// Consensus first, so the gradient step uses `phi_i(t+1)`.
    ConsensusFirst,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    /// [`default_start`] for every agent.
    Default,
    Common(Params),
    PerAgent(Vec<Params>),
    /// Independent uniform draws from the feasible set.
    Random {
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistributedConfig {
    pub alpha: f64,
    pub rounds: usize,
    pub order: RoundOrder,
    /// Keep every `record_every`-th round in the trajectory (0: final only).
    pub record_every: usize,
}

impl DistributedConfig {
    pub fn new(alpha: f64, rounds: usize) -> Self {
        Self {
            alpha,
            rounds,
            order: RoundOrder::GradientFirst,
            record_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub t: usize,
    pub agent: usize,
    pub phi: Vec<f64>,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributedRun {
    pub agents: Vec<AgentState>,
    /// Network-wide score frequencies `n^(h) / n`.
    pub phi: Vec<f64>,
    /// `max_i |phi - phi_i(t)|_inf` for `t = 0..=rounds`.
    pub consensus_error: Vec<f64>,
    /// Largest relative drift of the total push-sum mass over all rounds.
    pub mass_drift: f64,
    pub trajectory: Vec<TrajectoryPoint>,
}

impl DistributedRun {
    pub fn final_params(&self, model: &Model, agent: usize) -> Params {
        Params::from_flat(model, &self.agents[agent].z)
    }

    /// `max_{i,j} |z_i - z_j|_2`.
    pub fn spread(&self) -> f64 {
        let mut best: f64 = 0.0;
        for a in &self.agents {
            for b in &self.agents {
                best = best.max(dist2(&a.z, &b.z));
            }
        }
        best
    }

    /// CSV `t,agent,phi_1..phi_R,<theta...>,<gamma...>` with 1-based agents.
    pub fn write_trajectory_csv<W: Write>(&self, w: W, model: &Model) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string(), "agent".to_string()];
        header.extend((1..=model.num_scores()).map(|h| format!("phi_{h}")));
        header.extend(model.param_names());
        wtr.write_record(&header)?;
        for p in &self.trajectory {
            let mut rec = vec![p.t.to_string(), (p.agent + 1).to_string()];
            rec.extend(p.phi.iter().chain(&p.z).map(f64::to_string));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata<'a> {
    pub model: &'a str,
    pub n_agents: usize,
    pub n_edges: u64,
    pub period: usize,
    pub n_frames: usize,
    pub config: DistributedConfig,
    pub final_spread: f64,
    pub mass_drift: f64,
}

pub fn write_run_metadata<W: Write>(w: W, meta: &RunMetadata<'_>) -> Result<()> {
    serde_json::to_writer_pretty(w, meta)?;
    Ok(())
}

fn starts(model: &Model, n: usize, start: &Start) -> Result<Vec<Vec<f64>>> {
    let set = model.feasible_set();
    let check = |p: &Params| -> Result<Vec<f64>> {
        let z = p.flatten();
        if z.len() != set.dim() || !set.contains(&z, FEASIBILITY_TOL) {
            return Err(Error::Infeasible(format!("start point {p:?}")));
        }
        Ok(z)
    };
    match start {
        Start::Default => Ok(vec![default_start(model).flatten(); n]),
        Start::Common(p) => Ok(vec![check(p)?; n]),
        Start::PerAgent(ps) => {
            if ps.len() != n {
                return Err(Error::LengthMismatch {
                    left: ps.len(),
                    right: n,
                });
            }
            ps.iter().map(check).collect()
        }
        Start::Random { seed } => Ok((0..n)
            .map(|i| {
                let mut r = rng::stream(*seed, &[tag::START, i as u64]);
                set.sample(&mut r, 0.0)
            })
            .collect()),
    }
}

pub fn run_distributed(
    counts: &NeighborCounts,
    model: &Model,
    schedule: &CommSchedule,
    config: &DistributedConfig,
    start: &Start,
) -> Result<DistributedRun> {
    let n = counts.n_agents();
    if schedule.n_agents() != n {
        return Err(Error::LengthMismatch {
            left: schedule.n_agents(),
            right: n,
        });
    }
    if counts.score_levels() != model.num_scores() {
        return Err(Error::LengthMismatch {
            left: counts.score_levels(),
            right: model.num_scores(),
        });
    }
    if !(config.alpha >= 0.0 && config.alpha.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "stepsize must be non-negative, got {}",
            config.alpha
        )));
    }
    let mut agents = init_agents(counts, starts(model, n, start)?)?;
    let totals: Vec<f64> = counts.totals().iter().map(|&c| c as f64).collect();
    let mass = counts.n_edges() as f64;
    let phi = counts.phi();

    let consensus_error = |agents: &[AgentState]| {
        agents
            .iter()
            .map(|a| crate::math::dist_inf(&a.phi(), &phi))
            .fold(0.0, f64::max)
    };
    let record = |agents: &[AgentState], t: usize, out: &mut Vec<TrajectoryPoint>| {
        out.extend(agents.iter().enumerate().map(|(i, a)| TrajectoryPoint {
            t,
            agent: i,
            phi: a.phi(),
            z: a.z.clone(),
        }));
    };
    let mut errors = Vec::with_capacity(config.rounds + 1);
    errors.push(consensus_error(&agents));
    let mut trajectory = Vec::new();
    if config.record_every > 0 {
        record(&agents, 0, &mut trajectory);
    }
    let mut mass_drift: f64 = 0.0;

    let step_all = |agents: &mut [AgentState], t: usize| -> Result<()> {
        for a in agents.iter_mut() {
            a.z =
                local_gradient_step(model, &a.z, &a.phi(), config.alpha).map_err(|e| match e {
                    Error::NonFinite { what, .. } => Error::NonFinite { what, iter: t },
                    other => other,
                })?;
        }
        Ok(())
    };
    for t in 0..config.rounds {
        match config.order {
            RoundOrder::GradientFirst => {
                step_all(&mut agents, t)?;
                push_sum_round(&mut agents, schedule.frame(t))?;
            }
            RoundOrder::ConsensusFirst => {
                push_sum_round(&mut agents, schedule.frame(t))?;
                step_all(&mut agents, t)?;
            }
        }
        for (h, &total) in totals.iter().enumerate() {
            let s: f64 = agents.iter().map(|a| a.xi[h]).sum();
            if total > 0.0 {
                mass_drift = mass_drift.max((s - total).abs() / total);
            }
        }
        let s: f64 = agents.iter().map(|a| a.eta).sum();
        mass_drift = mass_drift.max((s - mass).abs() / mass);
        errors.push(consensus_error(&agents));
        let last = t + 1 == config.rounds;
        if config.record_every > 0 && ((t + 1) % config.record_every == 0 || last) {
            record(&agents, t + 1, &mut trajectory);
        }
    }
    if config.record_every == 0 {
        record(&agents, config.rounds, &mut trajectory);
    }
    Ok(DistributedRun {
        agents,
        phi,
        consensus_error: errors,
        mass_drift,
        trajectory,
    })
}
