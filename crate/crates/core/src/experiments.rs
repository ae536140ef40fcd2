//! Monte Carlo sweeps over the number of scored edges.
//!
//! Each trial samples a topology with `n` edges, draws states and scores
//! from the true model, runs the configured estimators and classifies every
//! agent with each estimate and with the true parameters (the oracle).
//! Trial `k` at sweep point `n` depends only on `(seed, n, k)`; trials run in
//! parallel and are reduced in index order, so results are reproducible bit
//! for bit.

pub mod config;
pub mod output;

use std::time::Instant;

use rayon::prelude::*;

use crate::classifier::{map_classify, misclassification_rate, soft_classify, ClassifierOutput};
use crate::distributed::{run_distributed, DistributedConfig, Start};
use crate::error::{Error, Result};
use crate::estimators::{estimate, fr_lipschitz_bound, EstimatorProblem, Objective};
use crate::graph::{
    aggregate_counts, generate_scores, make_comm_schedule, sample_topology, NeighborCounts,
    ScoreGraph, TopologyFamily,
};
use crate::models::{Model, Params};
use crate::rng::{derive_seed, tag};

pub use config::{EstimatorId, ExperimentConfig};

pub const ORACLE: &str = "oracle";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub n_edges: usize,
    pub trials: usize,
    /// `[estimator][param]`, in config and model order.
    pub rmse: Vec<Vec<f64>>,
    pub oracle_rate: f64,
    /// Mean misclassification rate per estimator.
    pub estimator_rates: Vec<f64>,
    /// Largest final spread of the distributed iterates, if that estimator ran.
    pub max_spread: Option<f64>,
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub estimators: Vec<EstimatorId>,
    pub params: Vec<String>,
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseRow {
    pub n: usize,
    pub estimator: String,
    pub param: String,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MisclassRow {
    pub n: usize,
    pub classifier: String,
    pub rate: f64,
}

impl SweepResult {
    pub fn rmse_rows(&self) -> Vec<RmseRow> {
        let mut rows = Vec::new();
        for p in &self.points {
            for (e, per_param) in self.estimators.iter().zip(&p.rmse) {
                for (name, &rmse) in self.params.iter().zip(per_param) {
                    rows.push(RmseRow {
                        n: p.n_edges,
                        estimator: e.label().into(),
                        param: name.clone(),
                        rmse,
                    });
                }
            }
        }
        rows
    }

    pub fn misclass_rows(&self) -> Vec<MisclassRow> {
        let mut rows = Vec::new();
        for p in &self.points {
            rows.push(MisclassRow {
                n: p.n_edges,
                classifier: ORACLE.into(),
                rate: p.oracle_rate,
            });
            for (e, &rate) in self.estimators.iter().zip(&p.estimator_rates) {
                rows.push(MisclassRow {
                    n: p.n_edges,
                    classifier: e.label().into(),
                    rate,
                });
            }
        }
        rows
    }

    /// RMSE column of one estimator and parameter along the sweep.
    pub fn rmse_curve(&self, estimator: EstimatorId, param: &str) -> Option<Vec<f64>> {
        let e = self.estimators.iter().position(|&x| x == estimator)?;
        let k = self.params.iter().position(|x| x == param)?;
        Some(self.points.iter().map(|p| p.rmse[e][k]).collect())
    }

    pub fn rate_curve(&self, estimator: EstimatorId) -> Option<Vec<f64>> {
        let e = self.estimators.iter().position(|&x| x == estimator)?;
        Some(self.points.iter().map(|p| p.estimator_rates[e]).collect())
    }
}

/// Seed of trial `k` at sweep point `n`.
pub fn trial_seed(master: u64, n_edges: usize, trial: usize) -> u64 {
    derive_seed(master, &[tag::TRIAL, n_edges as u64, trial as u64])
}

/// Sampled data of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph: ScoreGraph,
    pub counts: NeighborCounts,
    pub states: Vec<usize>,
}

pub fn sample_instance(config: &ExperimentConfig, n_edges: usize, seed: u64) -> Result<Instance> {
    let topo = sample_topology(
        config.n_agents,
        n_edges,
        &TopologyFamily::CyclicPlusRandom,
        seed,
    )?;
    let (graph, states) = generate_scores(&topo, &config.model, &config.truth, seed)?;
    let counts = aggregate_counts(&graph);
    Ok(Instance {
        graph,
        counts,
        states,
    })
}

/// Estimate with one estimator. The distributed estimator reports agent 1's
/// final iterate and the final spread across agents.
pub fn run_estimator(
    config: &ExperimentConfig,
    id: EstimatorId,
    instance: &Instance,
    distributed_alpha: f64,
    seed: u64,
) -> Result<(Params, Option<f64>)> {
    let model = config.model.clone();
    let problem = |objective| EstimatorProblem::new(model.clone(), objective);
    match id {
        EstimatorId::NodeRelaxed => Ok((
            estimate(
                &problem(Objective::NodeRelaxed(instance.counts.clone())),
                &config.solver,
            )?,
            None,
        )),
        EstimatorId::FullyRelaxed => Ok((
            estimate(
                &problem(Objective::FullyRelaxed(instance.counts.phi())),
                &config.solver,
            )?,
            None,
        )),
        EstimatorId::Exact => Ok((
            estimate(
                &problem(Objective::Exact(instance.graph.clone())),
                &config.solver,
            )?,
            None,
        )),
        EstimatorId::FullyRelaxedDistributed => {
            let schedule =
                make_comm_schedule(config.n_agents, config.schedule, config.period, seed)?;
            let run = run_distributed(
                &instance.counts,
                &config.model,
                &schedule,
                &DistributedConfig::new(distributed_alpha, config.rounds),
                &Start::Default,
            )?;
            let mut params = run.final_params(&config.model, 0);
            config.model.canonicalize(&mut params);
            Ok((params, Some(run.spread())))
        }
    }
}

/// Map an estimate of a symmetric model onto the same side of `gamma = 1/2`
/// as the truth, so that state labels are comparable.
fn orient(model: &Model, truth: &Params, mut est: Params) -> Params {
    if model.has_label_swap_symmetry() && (truth.gamma[0] > 0.5) != (est.gamma[0] > 0.5) {
        est.gamma[0] = 1.0 - est.gamma[0];
    }
    est
}

/// Per-component absolute error; `gamma` of a symmetric model is compared
/// against both representatives.
pub fn param_errors(model: &Model, truth: &Params, est: &Params) -> Vec<f64> {
    let mut err: Vec<f64> = est
        .flatten()
        .iter()
        .zip(truth.flatten())
        .map(|(a, b)| (a - b).abs())
        .collect();
    if model.has_label_swap_symmetry() {
        let k = model.theta_dim();
        let (g, t) = (est.gamma[0], truth.gamma[0]);
        err[k] = (g - t).abs().min((g - (1.0 - t)).abs());
    }
    err
}

struct TrialOutcome {
    sq_err: Vec<Vec<f64>>,
    oracle_rate: f64,
    rates: Vec<f64>,
    spread: Option<f64>,
}

fn classify_rate(
    counts: &NeighborCounts,
    model: &Model,
    params: &Params,
    truth: &[usize],
) -> Result<f64> {
    let out = soft_classify(counts, model, params)?;
    misclassification_rate(&map_classify(&out), truth)
}

fn run_trial(
    config: &ExperimentConfig,
    n_edges: usize,
    trial: usize,
    alpha: f64,
) -> Result<TrialOutcome> {
    let seed = trial_seed(config.seed, n_edges, trial);
    let inst = sample_instance(config, n_edges, seed)?;
    let oracle_rate = classify_rate(&inst.counts, &config.model, &config.truth, &inst.states)?;
    let mut sq_err = Vec::with_capacity(config.estimators.len());
    let mut rates = Vec::with_capacity(config.estimators.len());
    let mut spread: Option<f64> = None;
    for &id in &config.estimators {
        let (est, s) = run_estimator(config, id, &inst, alpha, seed)?;
        if let Some(s) = s {
            spread = Some(spread.map_or(s, |x| x.max(s)));
        }
        sq_err.push(
            param_errors(&config.model, &config.truth, &est)
                .into_iter()
                .map(|e| e * e)
                .collect(),
        );
        let oriented = orient(&config.model, &config.truth, est);
        rates.push(classify_rate(
            &inst.counts,
            &config.model,
            &oriented,
            &inst.states,
        )?);
    }
    Ok(TrialOutcome {
        sq_err,
        oracle_rate,
        rates,
        spread,
    })
}

/// Stepsize the distributed estimator uses for this config.
pub fn distributed_stepsize(config: &ExperimentConfig) -> Result<f64> {
    if !config
        .estimators
        .contains(&EstimatorId::FullyRelaxedDistributed)
    {
        return Ok(0.0);
    }
    match config.distributed_alpha {
        Some(a) => Ok(a),
        None => Ok(1.0 / fr_lipschitz_bound(&config.model, 100, config.seed)?),
    }
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let alpha = distributed_stepsize(config)?;
    let n_est = config.estimators.len();
    let dim = config.model.feasible_set().dim();
    let mut points = Vec::with_capacity(config.sweep.len());
    for &n_edges in &config.sweep {
        let started = Instant::now();
        let outcomes: Vec<TrialOutcome> = (0..config.trials)
            .into_par_iter()
            .map(|k| run_trial(config, n_edges, k, alpha))
            .collect::<Result<_>>()?;
        let trials = outcomes.len() as f64;
        let mut sum_sq = vec![vec![0.0; dim]; n_est];
        let mut sum_rates = vec![0.0; n_est];
        let mut oracle = 0.0;
        let mut max_spread: Option<f64> = None;
        for o in &outcomes {
            for (acc, e) in sum_sq.iter_mut().zip(&o.sq_err) {
                for (a, x) in acc.iter_mut().zip(e) {
                    *a += x;
                }
            }
            for (a, r) in sum_rates.iter_mut().zip(&o.rates) {
                *a += r;
            }
            oracle += o.oracle_rate;
            if let Some(s) = o.spread {
                max_spread = Some(max_spread.map_or(s, |m| m.max(s)));
            }
        }
        points.push(SweepPoint {
            n_edges,
            trials: config.trials,
            rmse: sum_sq
                .into_iter()
                .map(|v| v.into_iter().map(|s| (s / trials).sqrt()).collect())
                .collect(),
            oracle_rate: oracle / trials,
            estimator_rates: sum_rates.into_iter().map(|s| s / trials).collect(),
            max_spread,
            wall_clock_s: started.elapsed().as_secs_f64(),
        });
    }
    Ok(SweepResult {
        estimators: config.estimators.clone(),
        params: config.model.param_names(),
        points,
    })
}

/// [`run_sweep`] restricted to the three-community, three-level social
/// ranking setting.
pub fn run_social_ranking_suite(config: &ExperimentConfig) -> Result<SweepResult> {
    match config.model {
        Model::SocialRanking {
            states: 3,
            levels: 3,
            ..
        } => run_sweep(config),
        ref other => Err(Error::Config(format!(
            "social suite needs the social-ranking model with C = R = 3, got {}",
            other.name()
        ))),
    }
}

/// One sampled instance with every configured estimate and the soft
/// classifier output for the truth and for each estimate.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub instance: Instance,
    pub oracle: ClassifierOutput,
    pub estimates: Vec<(EstimatorId, Params, ClassifierOutput)>,
}

pub fn run_single(config: &ExperimentConfig, n_edges: usize) -> Result<SingleRun> {
    config.validate()?;
    let max = crate::graph::max_edges(config.n_agents);
    if n_edges < config.n_agents || n_edges > max {
        return Err(Error::Config(format!(
            "edge count {n_edges} outside [{}, {max}]",
            config.n_agents
        )));
    }
    let alpha = distributed_stepsize(config)?;
    let seed = trial_seed(config.seed, n_edges, 0);
    let instance = sample_instance(config, n_edges, seed)?;
    let oracle = soft_classify(&instance.counts, &config.model, &config.truth)?;
    let mut estimates = Vec::new();
    for &id in &config.estimators {
        let (est, _) = run_estimator(config, id, &instance, alpha, seed)?;
        let out = soft_classify(&instance.counts, &config.model, &est)?;
        estimates.push((id, est, out));
    }
    Ok(SingleRun {
        instance,
        oracle,
        estimates,
    })
}
