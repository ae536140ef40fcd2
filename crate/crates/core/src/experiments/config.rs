//! TOML experiment configuration.
//!
//! ```toml
//! model = "reliability"      # preparata | reliability | social-ranking | categorical
//! R = 5
//! gamma = 0.3
//! N = 50
//! sweep = [50, 500, 2450]
//! trials = 100
//! estimators = ["NR", "FR"]  # NR | FR | FR-distributed | exact | oracle
//! seed = 1
//! solver.alpha = 0.01        # fixed centralized stepsize; backtracking if absent
//! solver.T = 2000            # rounds of the distributed estimator
//! solver.tol = 1e-9
//! comm.family = "partition"  # complete | cycle | partition
//! comm.Q = 3
//! ```
//!
//! `C` and `theta` are needed for social ranking and categorical models;
//! `distance` optionally gives a row-major `C x C` table for social ranking.
//! `full_scale = true` switches to `N = 300`, 1000 trials and the default
//! sweep for that `N`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{SolverConfig, StepRule, EXACT_MAX_AGENTS};
use crate::graph::{max_edges, ScheduleFamily};
use crate::models::{
    categorical_model, preparata_model, reliability_model, social_ranking_model, Block, Distance,
    Model, Params,
};

pub const DESK_AGENTS: usize = 50;
pub const DESK_TRIALS: usize = 100;
pub const FULL_AGENTS: usize = 300;
pub const FULL_TRIALS: usize = 1000;
pub const DEFAULT_ROUNDS: usize = 2000;
pub const DEFAULT_PERIOD: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EstimatorId {
    #[serde(rename = "NR")]
    NodeRelaxed,
    #[serde(rename = "FR")]
    FullyRelaxed,
    #[serde(rename = "FR-distributed")]
    FullyRelaxedDistributed,
    #[serde(rename = "exact")]
    Exact,
}

impl EstimatorId {
    pub fn label(self) -> &'static str {
        match self {
            EstimatorId::NodeRelaxed => "NR",
            EstimatorId::FullyRelaxed => "FR",
            EstimatorId::FullyRelaxedDistributed => "FR-distributed",
            EstimatorId::Exact => "exact",
        }
    }

    pub fn parse(s: &str) -> Result<Option<Self>> {
        Ok(Some(match s {
            "NR" => EstimatorId::NodeRelaxed,
            "FR" => EstimatorId::FullyRelaxed,
            "FR-distributed" => EstimatorId::FullyRelaxedDistributed,
            "exact" => EstimatorId::Exact,
            // the oracle classifier is always reported
            "oracle" => return Ok(None),
            other => return Err(Error::Config(format!("unknown estimator {other:?}"))),
        }))
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: Model,
    pub truth: Params,
    pub n_agents: usize,
    pub sweep: Vec<usize>,
    pub trials: usize,
    pub estimators: Vec<EstimatorId>,
    pub seed: u64,
    pub solver: SolverConfig,
    /// Stepsize of the distributed estimator; Lipschitz heuristic if absent.
    pub distributed_alpha: Option<f64>,
    pub rounds: usize,
    pub schedule: ScheduleFamily,
    pub period: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    #[default]
    Empty,
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::Empty => Vec::new(),
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    alpha: Option<f64>,
    #[serde(rename = "T")]
    rounds: Option<usize>,
    tol: Option<f64>,
    max_iters: Option<usize>,
    distributed_alpha: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComm {
    family: Option<String>,
    #[serde(rename = "Q")]
    period: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: String,
    #[serde(rename = "C")]
    states: Option<usize>,
    #[serde(rename = "R")]
    levels: Option<usize>,
    distance: Option<Vec<f64>>,
    #[serde(default)]
    theta: OneOrMany,
    #[serde(default)]
    gamma: OneOrMany,
    #[serde(rename = "N")]
    n_agents: Option<usize>,
    sweep: Option<Vec<usize>>,
    trials: Option<usize>,
    estimators: Option<Vec<String>>,
    seed: Option<u64>,
    #[serde(default)]
    full_scale: bool,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    comm: RawComm,
}

/// `[N, 10 N, N^2 - N]`, clipped to the feasible range.
pub fn default_sweep(n_agents: usize) -> Vec<usize> {
    let mut s = vec![
        n_agents,
        (10 * n_agents).min(max_edges(n_agents)),
        max_edges(n_agents),
    ];
    s.dedup();
    s
}

fn build_model(raw: &RawConfig) -> Result<Model> {
    let need = |v: Option<usize>, key: &str| {
        v.ok_or_else(|| Error::Config(format!("model {:?} needs `{key}`", raw.model)))
    };
    let model = match raw.model.as_str() {
        "preparata" => preparata_model(),
        "reliability" => reliability_model(need(raw.levels, "R")?)?,
        "social-ranking" => {
            let distance = match &raw.distance {
                Some(t) => Distance::Table(t.clone()),
                None => Distance::Absolute,
            };
            social_ranking_model(need(raw.states, "C")?, need(raw.levels, "R")?, distance)?
        }
        "categorical" => categorical_model(need(raw.states, "C")?, need(raw.levels, "R")?)?,
        other => return Err(Error::Config(format!("unknown model {other:?}"))),
    };
    if raw.distance.is_some() && !matches!(model, Model::SocialRanking { .. }) {
        return Err(Error::Config(
            "`distance` only applies to social-ranking".into(),
        ));
    }
    Ok(model)
}

fn parse_schedule(name: &str) -> Result<ScheduleFamily> {
    match name {
        "complete" => Ok(ScheduleFamily::StaticComplete),
        "cycle" => Ok(ScheduleFamily::StaticCycle),
        "partition" => Ok(ScheduleFamily::PeriodicEdgePartition),
        other => Err(Error::Config(format!("unknown comm.family {other:?}"))),
    }
}

pub fn schedule_name(family: ScheduleFamily) -> &'static str {
    match family {
        ScheduleFamily::StaticComplete => "complete",
        ScheduleFamily::StaticCycle => "cycle",
        ScheduleFamily::PeriodicEdgePartition => "partition",
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let model = build_model(&raw)?;
        let truth = Params::new(raw.theta.into_vec(), raw.gamma.into_vec());
        let mut estimators = Vec::new();
        for s in raw
            .estimators
            .unwrap_or_else(|| vec!["NR".into(), "FR".into()])
        {
            if let Some(id) = EstimatorId::parse(&s)? {
                if !estimators.contains(&id) {
                    estimators.push(id);
                }
            }
        }
        let solver = SolverConfig {
            step: match raw.solver.alpha {
                Some(a) => StepRule::Fixed(a),
                None => StepRule::Backtracking,
            },
            max_iters: raw
                .solver
                .max_iters
                .unwrap_or(SolverConfig::default().max_iters),
            tol: raw.solver.tol.unwrap_or(SolverConfig::default().tol),
        };
        let mut config = Self {
            model,
            truth,
            n_agents: raw.n_agents.unwrap_or(DESK_AGENTS),
            sweep: Vec::new(),
            trials: raw.trials.unwrap_or(DESK_TRIALS),
            estimators,
            seed: raw.seed.unwrap_or(0),
            solver,
            distributed_alpha: raw.solver.distributed_alpha,
            rounds: raw.solver.rounds.unwrap_or(DEFAULT_ROUNDS),
            schedule: parse_schedule(raw.comm.family.as_deref().unwrap_or("partition"))?,
            period: raw.comm.period.unwrap_or(DEFAULT_PERIOD),
        };
        config.sweep = raw.sweep.unwrap_or_else(|| default_sweep(config.n_agents));
        if raw.full_scale {
            config.set_full_scale();
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Full-scale run: `N = 300`, 1000 trials, default sweep.
    pub fn set_full_scale(&mut self) {
        self.n_agents = FULL_AGENTS;
        self.trials = FULL_TRIALS;
        self.sweep = default_sweep(FULL_AGENTS);
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.n_agents < 2 {
            return Err(Error::Config(format!(
                "N must be >= 2, got {}",
                self.n_agents
            )));
        }
        let (lo, hi) = (self.n_agents, max_edges(self.n_agents));
        if let Some(&n) = self.sweep.iter().find(|&&n| n < lo || n > hi) {
            return Err(Error::Config(format!(
                "sweep value {n} outside [{lo}, {hi}]"
            )));
        }
        if self.truth.theta.len() != self.model.theta_dim()
            || self.truth.gamma.len() != self.model.gamma_dim()
        {
            return Err(Error::Config(format!(
                "model {} needs {} theta and {} gamma values, got {} and {}",
                self.model.name(),
                self.model.theta_dim(),
                self.model.gamma_dim(),
                self.truth.theta.len(),
                self.truth.gamma.len()
            )));
        }
        if !self.model.is_feasible(&self.truth) {
            return Err(Error::Config(format!(
                "true parameters {:?} are infeasible",
                self.truth
            )));
        }
        if self.estimators.contains(&EstimatorId::Exact) {
            if self.n_agents > EXACT_MAX_AGENTS {
                return Err(Error::Config(format!(
                    "exact estimator needs N <= {EXACT_MAX_AGENTS}"
                )));
            }
            let intervals = self
                .model
                .feasible_set()
                .blocks()
                .iter()
                .all(|b| matches!(b, Block::Interval { .. }));
            if !intervals {
                return Err(Error::Config(format!(
                    "exact estimator is not available for the {} model",
                    self.model.name()
                )));
            }
        }
        if let StepRule::Fixed(a) = self.solver.step {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Config(format!(
                    "solver.alpha must be positive, got {a}"
                )));
            }
        }
        if self
            .distributed_alpha
            .is_some_and(|a| !(a > 0.0 && a.is_finite()))
        {
            return Err(Error::Config(
                "solver.distributed_alpha must be positive".into(),
            ));
        }
        if self.period == 0 {
            return Err(Error::Config("comm.Q must be >= 1".into()));
        }
        Ok(())
    }
}
