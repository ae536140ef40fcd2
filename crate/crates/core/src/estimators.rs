//! Likelihood objectives and the projected-gradient solver.
//!
//! Three objectives over the feasible set of a [`Model`]:
//!
//! * exact log-likelihood, by enumerating all `C^N` joint states (small `N`
//!   only);
//! * node-based relaxed log-likelihood `sum_i g(theta, gamma; n_i)`, which
//!   treats the incoming-score blocks of different agents as independent;
//! * fully relaxed cost `phi^T g(theta, gamma)`, which treats every edge as
//!   independent and depends on the data only through the score
//!   frequencies `phi`.
//!
//! The solver always minimizes. Maximization problems are mapped to
//! `-objective / n`, so costs of all three kinds live on a per-edge scale.

use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{NeighborCounts, ScoreGraph};
use crate::math::{dist2, dist_inf, log_sum_exp, weighted_log, LogSumExp};
use crate::models::{Block, Model, Params, FEASIBILITY_TOL};
use crate::rng::{self, tag};

pub const EXACT_MAX_AGENTS: usize = 12;

/// Points per dimension of the exact estimator's coarse grid.
pub const EXACT_GRID_POINTS: usize = 21;

const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    Exact,
    NodeRelaxed,
    FullyRelaxed,
}

impl EstimatorKind {
    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::Exact => "exact",
            EstimatorKind::NodeRelaxed => "NR",
            EstimatorKind::FullyRelaxed => "FR",
        }
    }
}

/// Data an objective is evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    Exact(ScoreGraph),
    NodeRelaxed(NeighborCounts),
    /// Score frequencies on the `R`-simplex.
    FullyRelaxed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorProblem {
    pub model: Model,
    pub objective: Objective,
}

// ---------------------------------------------------------------------------
// Exact likelihood

pub fn exact_loglikelihood(graph: &ScoreGraph, model: &Model, params: &Params) -> Result<f64> {
    let n = graph.n_agents();
    if n > EXACT_MAX_AGENTS {
        return Err(Error::TooManyAgents {
            n_agents: n,
            max: EXACT_MAX_AGENTS,
        });
    }
    check_levels(graph.score_levels(), model)?;
    let tensor = model.tensor(&params.theta)?;
    let log_prior: Vec<f64> = model.prior(&params.gamma)?.iter().map(|p| p.ln()).collect();
    let c = model.num_states();
    let triples: Vec<(usize, usize, usize)> = graph.triples().collect();

    let mut states = vec![0usize; n];
    let mut acc = LogSumExp::default();
    loop {
        let mut term: f64 = states.iter().map(|&l| log_prior[l]).sum();
        if term > f64::NEG_INFINITY {
            for &(i, j, h) in &triples {
                term += tensor.log_p(h, states[i], states[j]);
            }
        }
        acc.push(term);
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(acc.value());
            }
            states[pos] += 1;
            if states[pos] < c {
                break;
            }
            states[pos] = 0;
            pos += 1;
        }
    }
}

fn check_levels(levels: usize, model: &Model) -> Result<()> {
    if levels != model.num_scores() {
        return Err(Error::InvalidInput(format!(
            "data uses {levels} score levels, model has {}",
            model.num_scores()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Node-based relaxation

/// `log sum_m p_{h|m,l} p_m` indexed `[h][l]`, i.e. the log-probability that
/// a random evaluator gives score `h` to a target in state `l`.
fn log_received(model: &Model, params: &Params) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let tensor = model.tensor(&params.theta)?;
    let log_prior: Vec<f64> = model.prior(&params.gamma)?.iter().map(|p| p.ln()).collect();
    let (c, r) = (model.num_states(), model.num_scores());
    let mut terms = vec![0.0; c];
    let table = (0..r)
        .map(|h| {
            (0..c)
                .map(|l| {
                    for (m, t) in terms.iter_mut().enumerate() {
                        *t = tensor.log_p(h, m, l) + log_prior[m];
                    }
                    log_sum_exp(&terms)
                })
                .collect()
        })
        .collect();
    Ok((table, log_prior))
}

/// `sum_i g(theta, gamma; n_i)` (to be maximized).
pub fn nr_objective(counts: &NeighborCounts, model: &Model, params: &Params) -> Result<f64> {
    check_levels(counts.score_levels(), model)?;
    let (log_a, log_prior) = log_received(model, params)?;
    let c = model.num_states();
    let mut s = vec![0.0; c];
    let mut total = 0.0;
    for i in 0..counts.n_agents() {
        let n_i = counts.received(i);
        for (l, sl) in s.iter_mut().enumerate() {
            *sl = log_prior[l]
                + n_i
                    .iter()
                    .enumerate()
                    .map(|(h, &cnt)| weighted_log(cnt as f64, log_a[h][l]))
                    .sum::<f64>();
        }
        total += log_sum_exp(&s);
    }
    Ok(total)
}

/// Gradient of [`nr_objective`] with respect to the flattened parameters.
pub fn nr_gradient(counts: &NeighborCounts, model: &Model, params: &Params) -> Result<Vec<f64>> {
    check_levels(counts.score_levels(), model)?;
    let tensor = model.tensor(&params.theta)?;
    let prior = model.prior(&params.gamma)?;
    let grads = model.gradients(params)?;
    let (log_a, log_prior) = log_received(model, params)?;
    let (c, r) = (model.num_states(), model.num_scores());

    let mut d_prior = vec![0.0; c];
    // weight[h][l] = sum_i n_ih * w_il, with w_il the posterior weight of l.
    let mut weight = vec![vec![0.0; c]; r];
    let mut b = vec![0.0; c];
    let mut s = vec![0.0; c];
    for i in 0..counts.n_agents() {
        let n_i = counts.received(i);
        for l in 0..c {
            b[l] = n_i
                .iter()
                .enumerate()
                .map(|(h, &cnt)| weighted_log(cnt as f64, log_a[h][l]))
                .sum();
            s[l] = log_prior[l] + b[l];
        }
        let g_i = log_sum_exp(&s);
        if !g_i.is_finite() {
            return Err(Error::NonFinite {
                what: "node-relaxed objective",
                iter: 0,
            });
        }
        for l in 0..c {
            if b[l] > f64::NEG_INFINITY {
                d_prior[l] += (b[l] - g_i).exp();
            }
            let w = (s[l] - g_i).exp();
            if w > 0.0 {
                for h in 0..r {
                    weight[h][l] += n_i[h] as f64 * w;
                }
            }
        }
    }
    let mut d_tensor = vec![0.0; tensor.as_slice().len()];
    for h in 0..r {
        for l in 0..c {
            if weight[h][l] == 0.0 {
                continue;
            }
            let d_a = weight[h][l] / log_a[h][l].exp();
            for m in 0..c {
                // a[h][l] = sum_m p_{h|m,l} p_m
                d_tensor[tensor.index(h, m, l)] += d_a * prior[m];
                d_prior[m] += d_a * tensor.p(h, m, l);
            }
        }
    }
    Ok(grads.pullback(&d_tensor, &d_prior))
}

// ---------------------------------------------------------------------------
// Full relaxation

/// `log P(Y = r_h)` for a single edge under the model.
fn log_score_marginals(model: &Model, params: &Params) -> Result<Vec<f64>> {
    let tensor = model.tensor(&params.theta)?;
    let log_prior: Vec<f64> = model.prior(&params.gamma)?.iter().map(|p| p.ln()).collect();
    let (c, r) = (model.num_states(), model.num_scores());
    let mut terms = Vec::with_capacity(c * c);
    Ok((0..r)
        .map(|h| {
            terms.clear();
            for l in 0..c {
                for m in 0..c {
                    terms.push(tensor.log_p(h, l, m) + log_prior[l] + log_prior[m]);
                }
            }
            log_sum_exp(&terms)
        })
        .collect())
}

/// Per-score costs `g_(h) = -log sum_{l,m} p_{h|l,m} p_l p_m`.
pub fn fr_costs(model: &Model, params: &Params) -> Result<Vec<f64>> {
    Ok(log_score_marginals(model, params)?
        .into_iter()
        .map(|x| -x)
        .collect())
}

fn check_phi(phi: &[f64], model: &Model) -> Result<()> {
    check_levels(phi.len(), model)?;
    let sum: f64 = phi.iter().sum();
    if phi.iter().any(|&x| x.is_nan() || x < -1e-9) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "score frequencies {phi:?} are not on the simplex"
        )));
    }
    Ok(())
}

/// `phi^T g(theta, gamma)` (to be minimized).
pub fn fr_objective(phi: &[f64], model: &Model, params: &Params) -> Result<f64> {
    check_phi(phi, model)?;
    let costs = fr_costs(model, params)?;
    Ok(phi
        .iter()
        .zip(&costs)
        .map(|(&f, &g)| if f == 0.0 { 0.0 } else { f * g })
        .sum())
}

/// `sum_h weights_h grad g_(h)`, skipping zero weights.
pub(crate) fn fr_weighted_gradient(
    weights: &[f64],
    model: &Model,
    params: &Params,
) -> Result<Vec<f64>> {
    let tensor = model.tensor(&params.theta)?;
    let log_prior: Vec<f64> = model.prior(&params.gamma)?.iter().map(|p| p.ln()).collect();
    let grads = model.gradients(params)?;
    let log_marg = log_score_marginals(model, params)?;
    let (c, r) = (model.num_states(), model.num_scores());
    let mut d_tensor = vec![0.0; tensor.as_slice().len()];
    let mut d_prior = vec![0.0; c];
    for h in 0..r {
        let w = weights[h];
        if w == 0.0 {
            continue;
        }
        let lp = log_marg[h];
        for l in 0..c {
            for m in 0..c {
                // d(-log P_h) / d p_{h|l,m} = -p_l p_m / P_h
                d_tensor[tensor.index(h, l, m)] -= w * (log_prior[l] + log_prior[m] - lp).exp();
                // d(-log P_h) / d p_l through both endpoint priors
                let coupled = (tensor.log_p(h, l, m) + log_prior[m] - lp).exp()
                    + (tensor.log_p(h, m, l) + log_prior[m] - lp).exp();
                d_prior[l] -= w * coupled;
            }
        }
    }
    Ok(grads.pullback(&d_tensor, &d_prior))
}

/// Jacobian of the per-score costs: row `h` is `grad g_(h)`.
pub fn fr_cost_jacobian(model: &Model, params: &Params) -> Result<Vec<Vec<f64>>> {
    let r = model.num_scores();
    (0..r)
        .map(|h| {
            let mut e = vec![0.0; r];
            e[h] = 1.0;
            fr_weighted_gradient(&e, model, params)
        })
        .collect()
}

/// Gradient of [`fr_objective`].
pub fn fr_gradient(phi: &[f64], model: &Model, params: &Params) -> Result<Vec<f64>> {
    check_phi(phi, model)?;
    fr_weighted_gradient(phi, model, params)
}

/// Fully relaxed estimate of the fault probability for binary scores and
/// states, as a function of the frequency of score 1.
pub fn fr_binary_closed_form(phi2: f64) -> f64 {
    let phi2 = phi2.clamp(0.0, 1.0);
    if phi2 >= 9.0 / 16.0 {
        0.75
    } else {
        0.25 * (3.0 - (9.0 - 16.0 * phi2).sqrt())
    }
}

// ---------------------------------------------------------------------------
// Problem evaluation

impl EstimatorProblem {
    pub fn new(model: Model, objective: Objective) -> Self {
        Self { model, objective }
    }

    pub fn kind(&self) -> EstimatorKind {
        match self.objective {
            Objective::Exact(_) => EstimatorKind::Exact,
            Objective::NodeRelaxed(_) => EstimatorKind::NodeRelaxed,
            Objective::FullyRelaxed(_) => EstimatorKind::FullyRelaxed,
        }
    }

    /// The objective in its natural form: log-likelihood for exact and NR,
    /// `phi^T g` for FR.
    pub fn objective_value(&self, params: &Params) -> Result<f64> {
        match &self.objective {
            Objective::Exact(g) => exact_loglikelihood(g, &self.model, params),
            Objective::NodeRelaxed(c) => nr_objective(c, &self.model, params),
            Objective::FullyRelaxed(phi) => fr_objective(phi, &self.model, params),
        }
    }

    fn edge_scale(&self) -> f64 {
        match &self.objective {
            Objective::Exact(g) => g.n_edges() as f64,
            Objective::NodeRelaxed(c) => c.n_edges() as f64,
            Objective::FullyRelaxed(_) => 1.0,
        }
    }

    fn sign(&self) -> f64 {
        match self.objective {
            Objective::FullyRelaxed(_) => 1.0,
            _ => -1.0,
        }
    }

    /// Minimization form of the objective at a flattened point.
    pub fn cost(&self, z: &[f64]) -> Result<f64> {
        let p = Params::from_flat(&self.model, z);
        Ok(self.sign() * self.objective_value(&p)? / self.edge_scale())
    }

    /// Gradient of [`Self::cost`]. Analytic for NR and FR, central finite
    /// differences for the exact likelihood.
    pub fn cost_gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        let p = Params::from_flat(&self.model, z);
        let scale = self.sign() / self.edge_scale();
        let raw = match &self.objective {
            Objective::NodeRelaxed(c) => nr_gradient(c, &self.model, &p)?,
            Objective::FullyRelaxed(phi) => fr_gradient(phi, &self.model, &p)?,
            Objective::Exact(_) => return self.fd_cost_gradient(z),
        };
        Ok(raw.into_iter().map(|g| g * scale).collect())
    }

    fn fd_cost_gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        let set = self.model.feasible_set();
        let mut grad = vec![0.0; z.len()];
        for (k, b) in set.blocks().iter().enumerate() {
            let Block::Interval { lo, hi } = *b else {
                return Err(Error::InvalidInput(
                    "finite differences need interval-only feasible sets".into(),
                ));
            };
            let up = (z[k] + FD_STEP).min(hi);
            let down = (z[k] - FD_STEP).max(lo);
            let mut zp = z.to_vec();
            zp[k] = up;
            let mut zm = z.to_vec();
            zm[k] = down;
            grad[k] = (self.cost(&zp)? - self.cost(&zm)?) / (up - down);
        }
        Ok(grad)
    }

    pub fn default_start(&self) -> Params {
        default_start(&self.model)
    }
}

/// Start point used by [`estimate`]: the feasible-set centroid, except that
/// symmetric models start off the `gamma = 1/2` mirror axis where the
/// gradient in `gamma` vanishes identically.
pub fn default_start(model: &Model) -> Params {
    let mut p = Params::from_flat(model, &model.feasible_set().centroid());
    if model.has_label_swap_symmetry() {
        p.gamma[0] = 0.25;
    }
    p
}

// ---------------------------------------------------------------------------
// Solver

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// Constant stepsize.
    Fixed(f64),
    /// Constant stepsize `1 / L`, with `L` from [`lipschitz_estimate`].
    Lipschitz,
    /// Sufficient-decrease backtracking along the projection arc. The trial
    /// step doubles after every accepted iteration.
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub step: StepRule,
    pub max_iters: usize,
    /// Stop when the sup-norm of the iterate change drops below this.
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step: StepRule::Backtracking,
            max_iters: 100_000,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub cost: f64,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub params: Params,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Last stepsize used.
    pub step: f64,
    /// Cost being minimized, one row per iterate including the start.
    pub trace: Vec<TraceRow>,
}

impl Solution {
    /// CSV `iter,objective,<theta...>,<gamma...>`.
    pub fn write_trace_csv<W: Write>(&self, w: W, model: &Model) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["iter".to_string(), "objective".to_string()];
        header.extend(model.param_names());
        wtr.write_record(&header)?;
        for row in &self.trace {
            let mut rec = vec![row.iter.to_string(), row.cost.to_string()];
            rec.extend(row.z.iter().map(f64::to_string));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

const MAX_STEP: f64 = 1e8;
const MIN_STEP: f64 = 1e-16;

pub fn projected_gradient_solve(
    problem: &EstimatorProblem,
    start: &Params,
    config: &SolverConfig,
) -> Result<Solution> {
    let set = problem.model.feasible_set();
    if !problem.model.is_feasible(start) {
        return Err(Error::Infeasible(format!("start point {start:?}")));
    }
    let mut z = start.flatten();
    let mut cost = problem.cost(&z)?;
    if !cost.is_finite() {
        return Err(Error::NonFinite {
            what: "objective",
            iter: 0,
        });
    }
    let (mut alpha, backtrack) = match config.step {
        StepRule::Fixed(a) => (a, false),
        StepRule::Lipschitz => (1.0 / lipschitz_estimate(problem, 100, 0)?, false),
        StepRule::Backtracking => (1.0, true),
    };
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "stepsize must be positive, got {alpha}"
        )));
    }
    let mut trace = vec![TraceRow {
        iter: 0,
        cost,
        z: z.clone(),
    }];
    let check_grad = |g: &[f64], iter: usize| -> Result<()> {
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "gradient",
                iter,
            });
        }
        Ok(())
    };
    let mut grad = problem.cost_gradient(&z)?;
    check_grad(&grad, 0)?;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iters {
        iterations += 1;
        let step_to = |alpha: f64, grad: &[f64]| {
            let mut next: Vec<f64> = z.iter().zip(grad).map(|(x, g)| x - alpha * g).collect();
            set.project(&mut next);
            next
        };
        let (next, next_cost, next_grad) = if backtrack {
            alpha = (2.0 * alpha).min(MAX_STEP);
            loop {
                let next = step_to(alpha, &grad);
                let c = problem.cost(&next)?;
                if c.is_finite() {
                    let lin: f64 = grad
                        .iter()
                        .zip(next.iter().zip(&z))
                        .map(|(g, (a, b))| g * (a - b))
                        .sum();
                    let moved = dist2(&next, &z);
                    // Near the optimum, cost differences drop below rounding
                    // error; the gradient-variation test still resolves the
                    // local curvature there.
                    let decrease =
                        c <= cost + lin + moved * moved / (2.0 * alpha) + 1e-15 * cost.abs();
                    if decrease {
                        let g = problem.cost_gradient(&next)?;
                        if g.iter().all(|x| x.is_finite())
                            && dist2(&g, &grad) * alpha <= moved * (1.0 + 1e-12)
                        {
                            break (next, c, g);
                        }
                    }
                }
                alpha *= 0.5;
                if alpha < MIN_STEP {
                    break (z.clone(), cost, grad.clone());
                }
            }
        } else {
            let next = step_to(alpha, &grad);
            let c = problem.cost(&next)?;
            if !c.is_finite() {
                return Err(Error::NonFinite {
                    what: "objective",
                    iter: iterations,
                });
            }
            let g = problem.cost_gradient(&next)?;
            (next, c, g)
        };
        check_grad(&next_grad, iterations)?;
        grad = next_grad;
        let moved = dist_inf(&next, &z);
        z = next;
        cost = next_cost;
        trace.push(TraceRow {
            iter: iterations,
            cost,
            z: z.clone(),
        });
        if moved < config.tol {
            converged = true;
            break;
        }
    }
    Ok(Solution {
        params: Params::from_flat(&problem.model, &z),
        cost,
        iterations,
        converged,
        step: alpha,
        trace,
    })
}

/// Margin kept from the ends of the prior's interval when sampling for
/// [`lipschitz_estimate`]; relaxed costs can be singular there.
const LIPSCHITZ_PRIOR_MARGIN: f64 = 0.05;

/// Sample points for [`lipschitz_estimate`]: the corners of the sampled box
/// when the feasible set is a low-dimensional box, then uniform draws. The
/// `theta` box is covered in full since its ends are regular points of every
/// model, while prior coordinates stay [`LIPSCHITZ_PRIOR_MARGIN`] away from
/// their ends.
fn lipschitz_samples<R: Rng>(model: &Model, samples: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let set = model.feasible_set();
    let blocks = set.blocks();
    let theta_blocks = model.theta_blocks().len();
    let ranges: Option<Vec<(f64, f64)>> = blocks
        .iter()
        .enumerate()
        .map(|(k, b)| match *b {
            Block::Interval { lo, hi } if k < theta_blocks => Some((lo, hi)),
            Block::Interval { lo, hi } => {
                let w = LIPSCHITZ_PRIOR_MARGIN * (hi - lo);
                Some((lo + w, hi - w))
            }
            Block::Simplex { .. } => None,
        })
        .collect();
    let mut out = Vec::with_capacity(samples);
    if let Some(ranges) = &ranges {
        if ranges.len() <= 4 {
            for mask in 0..1usize << ranges.len() {
                out.push(
                    ranges
                        .iter()
                        .enumerate()
                        .map(|(k, &(lo, hi))| if mask >> k & 1 == 1 { hi } else { lo })
                        .collect(),
                );
            }
        }
    }
    while out.len() < samples {
        let mut z = set.sample(rng, LIPSCHITZ_PRIOR_MARGIN);
        if let Some(ranges) = &ranges {
            for (x, &(lo, hi)) in z.iter_mut().zip(ranges).take(theta_blocks) {
                *x = rng.gen_range(lo..=hi);
            }
        }
        out.push(z);
    }
    out
}

/// Largest observed gradient variation `|grad f(z + d) - grad f(z)| / |d|`
/// over `samples` points of the feasible set, each paired with a small
/// random perturbation.
pub fn lipschitz_estimate(problem: &EstimatorProblem, samples: usize, seed: u64) -> Result<f64> {
    let set = problem.model.feasible_set();
    let mut rng = rng::stream(seed, &[tag::LIPSCHITZ]);
    let mut best: f64 = 0.0;
    let mut finite = 0;
    for z in lipschitz_samples(&problem.model, samples, &mut rng) {
        let mut zp: Vec<f64> = z
            .iter()
            .map(|&x| x + 1e-4 * (rng.gen::<f64>() - 0.5))
            .collect();
        set.project(&mut zp);
        let d = dist2(&z, &zp);
        if d == 0.0 {
            continue;
        }
        let (Ok(g0), Ok(g1)) = (problem.cost_gradient(&z), problem.cost_gradient(&zp)) else {
            continue;
        };
        if g0.iter().chain(&g1).any(|g| !g.is_finite()) {
            continue;
        }
        finite += 1;
        best = best.max(dist2(&g0, &g1) / d);
    }
    if finite == 0 {
        return Err(Error::NonFinite {
            what: "gradient sample",
            iter: 0,
        });
    }
    Ok(best.max(1e-12))
}

/// Lipschitz bound valid for `phi^T g` with any `phi` on the simplex: the
/// largest estimate among the individual per-score costs.
pub fn fr_lipschitz_bound(model: &Model, samples: usize, seed: u64) -> Result<f64> {
    let r = model.num_scores();
    let mut best: f64 = 0.0;
    for h in 0..r {
        let mut e = vec![0.0; r];
        e[h] = 1.0;
        let p = EstimatorProblem::new(model.clone(), Objective::FullyRelaxed(e));
        best = best.max(lipschitz_estimate(&p, samples, seed)?);
    }
    Ok(best)
}

/// Projected-gradient stationarity residual `|z - P(z - alpha grad f(z))|`.
pub fn stationarity_residual(
    problem: &EstimatorProblem,
    params: &Params,
    alpha: f64,
) -> Result<f64> {
    let z = params.flatten();
    let grad = problem.cost_gradient(&z)?;
    let mut next: Vec<f64> = z.iter().zip(&grad).map(|(x, g)| x - alpha * g).collect();
    problem.model.feasible_set().project(&mut next);
    Ok(dist2(&z, &next))
}

/// Solve the problem from its default start (coarse grid first for the
/// exact likelihood) and return the canonical estimate.
pub fn estimate(problem: &EstimatorProblem, config: &SolverConfig) -> Result<Params> {
    let start = match problem.objective {
        Objective::Exact(_) => grid_start(problem)?,
        _ => problem.default_start(),
    };
    let mut params = projected_gradient_solve(problem, &start, config)?.params;
    problem.model.canonicalize(&mut params);
    debug_assert!(problem
        .model
        .feasible_set()
        .contains(&params.flatten(), FEASIBILITY_TOL));
    Ok(params)
}

fn grid_start(problem: &EstimatorProblem) -> Result<Params> {
    let set = problem.model.feasible_set();
    let axes: Vec<Vec<f64>> = set
        .blocks()
        .iter()
        .map(|b| match *b {
            Block::Interval { lo, hi } => Ok((0..EXACT_GRID_POINTS)
                .map(|k| lo + (hi - lo) * k as f64 / (EXACT_GRID_POINTS - 1) as f64)
                .collect()),
            Block::Simplex { .. } => Err(Error::InvalidInput(
                "exact estimation supports interval-parametrized models only".into(),
            )),
        })
        .collect::<Result<_>>()?;
    let mut idx = vec![0usize; axes.len()];
    let mut best: Option<(f64, Vec<f64>)> = None;
    loop {
        let z: Vec<f64> = idx.iter().zip(&axes).map(|(&k, a)| a[k]).collect();
        if let Ok(c) = problem.cost(&z) {
            if c.is_finite() && best.as_ref().is_none_or(|(bc, _)| c < *bc) {
                best = Some((c, z));
            }
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                let (_, z) = best.ok_or(Error::NonFinite {
                    what: "objective on every grid point",
                    iter: 0,
                })?;
                return Ok(Params::from_flat(&problem.model, &z));
            }
            idx[pos] += 1;
            if idx[pos] < axes[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
