//! Parametrized score/state models.
//!
//! A model supplies the score tensor `p_{h|l,m}(theta)` (probability that an
//! evaluator in state `l` gives score `h` to a target in state `m`), the
//! state prior `p_l(gamma)`, their Jacobians, and the feasible set of
//! `(theta, gamma)` as a product of intervals and simplices.

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{binomial, project_simplex};

/// Box for the social-ranking dispersion parameter.
pub const THETA_MIN: f64 = 0.05;
pub const THETA_MAX: f64 = 10.0;

/// Feasibility tolerance for user-supplied points.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Parameter-hyperparameter pair. Flattened as `[theta..., gamma...]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub theta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Params {
    pub fn new(theta: Vec<f64>, gamma: Vec<f64>) -> Self {
        Self { theta, gamma }
    }

    /// Hyperparameter only (models without `theta`).
    pub fn gamma_only(gamma: f64) -> Self {
        Self::new(Vec::new(), vec![gamma])
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.theta.iter().chain(&self.gamma).copied().collect()
    }

    pub fn from_flat(model: &Model, z: &[f64]) -> Self {
        let (t, g) = z.split_at(model.theta_dim());
        Self::new(t.to_vec(), g.to_vec())
    }
}

/// Dense `R x C x C` table indexed `(h, l, m)`, with its logarithm.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    scores: usize,
    states: usize,
    prob: Vec<f64>,
    log_prob: Vec<f64>,
}

impl Tensor {
    fn from_prob(scores: usize, states: usize, prob: Vec<f64>) -> Self {
        let log_prob = prob.iter().map(|p| p.ln()).collect();
        Self {
            scores,
            states,
            prob,
            log_prob,
        }
    }

    #[inline]
    pub fn index(&self, h: usize, l: usize, m: usize) -> usize {
        (h * self.states + l) * self.states + m
    }

    #[inline]
    pub fn p(&self, h: usize, l: usize, m: usize) -> f64 {
        self.prob[self.index(h, l, m)]
    }

    #[inline]
    pub fn log_p(&self, h: usize, l: usize, m: usize) -> f64 {
        self.log_prob[self.index(h, l, m)]
    }

    pub fn num_scores(&self) -> usize {
        self.scores
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.prob
    }
}

/// Semi-distance between state values used by the social-ranking model.
#[derive(Debug, Clone, PartialEq)]
pub enum Distance {
    /// `|c_l - c_m| = |l - m|`.
    Absolute,
    /// Row-major `C x C` table of `d(c_l, c_m)`.
    Table(Vec<f64>),
}

impl Distance {
    fn eval(&self, states: usize, l: usize, m: usize) -> f64 {
        match self {
            Distance::Absolute => (l as f64 - m as f64).abs(),
            Distance::Table(t) => t[l * states + m],
        }
    }

    fn validate(&self, states: usize) -> Result<()> {
        let Distance::Table(t) = self else {
            return Ok(());
        };
        if t.len() != states * states {
            return Err(Error::InvalidModel(format!(
                "distance table has {} entries, expected {}",
                t.len(),
                states * states
            )));
        }
        for l in 0..states {
            for m in 0..states {
                let d = t[l * states + m];
                let ok = d.is_finite() && if l == m { d == 0.0 } else { d > 0.0 };
                if !ok {
                    return Err(Error::InvalidModel(format!(
                        "d({l}, {m}) = {d} is not a semi-distance value"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `d(l, m) == d(C-1-l, C-1-m)` for all pairs.
    fn reversal_invariant(&self, states: usize) -> bool {
        (0..states).all(|l| {
            (0..states).all(|m| {
                self.eval(states, l, m) == self.eval(states, states - 1 - l, states - 1 - m)
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    /// Binary states and scores; healthy evaluators report the target's
    /// state, faulty ones answer uniformly at random.
    Preparata,
    /// Binary states, `R` linearly graded scores.
    Reliability { levels: usize },
    /// Distance-based score model with dispersion `theta` and a
    /// `Binomial(C-1, gamma)` prior on the community index.
    SocialRanking {
        states: usize,
        levels: usize,
        distance: Distance,
    },
    /// Free probability masses for every tensor row and the prior.
    Categorical { states: usize, levels: usize },
}

pub fn preparata_model() -> Model {
    Model::Preparata
}

pub fn reliability_model(levels: usize) -> Result<Model> {
    if levels < 2 {
        return Err(Error::InvalidModel(format!(
            "reliability model needs R >= 2, got {levels}"
        )));
    }
    Ok(Model::Reliability { levels })
}

pub fn social_ranking_model(states: usize, levels: usize, distance: Distance) -> Result<Model> {
    if states < 2 || levels < 2 {
        return Err(Error::InvalidModel(format!(
            "social ranking needs C, R >= 2, got C={states}, R={levels}"
        )));
    }
    distance.validate(states)?;
    Ok(Model::SocialRanking {
        states,
        levels,
        distance,
    })
}

pub fn categorical_model(states: usize, levels: usize) -> Result<Model> {
    if states < 2 || levels < 2 {
        return Err(Error::InvalidModel(format!(
            "categorical model needs C, R >= 2, got C={states}, R={levels}"
        )));
    }
    Ok(Model::Categorical { states, levels })
}

/// One factor of the feasible set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Block {
    Interval { lo: f64, hi: f64 },
    Simplex { dim: usize },
}

impl Block {
    pub fn dim(&self) -> usize {
        match *self {
            Block::Interval { .. } => 1,
            Block::Simplex { dim } => dim,
        }
    }
}

/// Product of intervals and simplices over the flattened parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    blocks: Vec<Block>,
}

impl FeasibleSet {
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(Block::dim).sum()
    }

    fn chunks<'a>(&'a self, z: &'a [f64]) -> impl Iterator<Item = (Block, &'a [f64])> + 'a {
        let mut offset = 0;
        self.blocks.iter().map(move |&b| {
            let s = &z[offset..offset + b.dim()];
            offset += b.dim();
            (b, s)
        })
    }

    /// Euclidean projection, in place.
    pub fn project(&self, z: &mut [f64]) {
        let mut offset = 0;
        for b in &self.blocks {
            let s = &mut z[offset..offset + b.dim()];
            match *b {
                Block::Interval { lo, hi } => s[0] = s[0].clamp(lo, hi),
                Block::Simplex { .. } => project_simplex(s),
            }
            offset += b.dim();
        }
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        z.len() == self.dim()
            && z.iter().all(|x| x.is_finite())
            && self.chunks(z).all(|(b, s)| match b {
                Block::Interval { lo, hi } => s[0] >= lo - tol && s[0] <= hi + tol,
                Block::Simplex { .. } => {
                    s.iter().all(|&x| x >= -tol) && (s.iter().sum::<f64>() - 1.0).abs() <= tol
                }
            })
    }

    pub fn centroid(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| match *b {
                Block::Interval { lo, hi } => vec![0.5 * (lo + hi)],
                Block::Simplex { dim } => vec![1.0 / dim as f64; dim],
            })
            .collect()
    }

    /// Random point whose interval coordinates avoid a `margin` fraction of
    /// each end and whose simplex blocks are mixed with the uniform point
    /// with weight `margin`.
    pub fn sample<R: Rng>(&self, rng: &mut R, margin: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for b in &self.blocks {
            match *b {
                Block::Interval { lo, hi } => {
                    let w = hi - lo;
                    out.push(rng.gen_range(lo + margin * w..=hi - margin * w));
                }
                Block::Simplex { dim } => {
                    // Uniform on the simplex via normalized exponentials.
                    let e: Vec<f64> = (0..dim)
                        .map(|_| -rng.gen::<f64>().max(1e-300).ln())
                        .collect();
                    let s: f64 = e.iter().sum();
                    out.extend(
                        e.iter()
                            .map(|x| (1.0 - margin) * x / s + margin / dim as f64),
                    );
                }
            }
        }
        out
    }
}

/// Jacobians of the tensor and prior with respect to each component of
/// `theta` and `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGradients {
    /// `tensor[k]` is `d p_{h|l,m} / d theta_k`, laid out like [`Tensor`].
    pub tensor: Vec<Vec<f64>>,
    /// `prior[k][l]` is `d p_l / d gamma_k`.
    pub prior: Vec<Vec<f64>>,
}

impl ModelGradients {
    /// Chain rule: given `dF/dp_{h|l,m}` and `dF/dp_l`, return `dF/dz` for
    /// the flattened parameters.
    pub fn pullback(&self, d_tensor: &[f64], d_prior: &[f64]) -> Vec<f64> {
        let dot = |a: &[f64], b: &[f64]| -> f64 {
            a.iter()
                .zip(b)
                .filter(|(x, _)| **x != 0.0)
                .map(|(x, y)| x * y)
                .sum()
        };
        self.tensor
            .iter()
            .map(|j| dot(j, d_tensor))
            .chain(self.prior.iter().map(|j| dot(j, d_prior)))
            .collect()
    }
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Preparata => "preparata",
            Model::Reliability { .. } => "reliability",
            Model::SocialRanking { .. } => "social-ranking",
            Model::Categorical { .. } => "categorical",
        }
    }

    pub fn num_states(&self) -> usize {
        match *self {
            Model::Preparata | Model::Reliability { .. } => 2,
            Model::SocialRanking { states, .. } | Model::Categorical { states, .. } => states,
        }
    }

    pub fn num_scores(&self) -> usize {
        match *self {
            Model::Preparata => 2,
            Model::Reliability { levels }
            | Model::SocialRanking { levels, .. }
            | Model::Categorical { levels, .. } => levels,
        }
    }

    /// `c_l` for each state index.
    pub fn state_values(&self) -> Vec<f64> {
        match self {
            Model::Preparata | Model::Reliability { .. } => vec![0.0, 1.0],
            _ => (1..=self.num_states()).map(|l| l as f64).collect(),
        }
    }

    /// `r_h` for each score index.
    pub fn score_values(&self) -> Vec<f64> {
        match self {
            Model::Preparata => vec![0.0, 1.0],
            Model::Reliability { levels } => (0..*levels).map(|h| h as f64).collect(),
            _ => (1..=self.num_scores()).map(|h| h as f64).collect(),
        }
    }

    pub fn theta_dim(&self) -> usize {
        match *self {
            Model::Preparata | Model::Reliability { .. } => 0,
            Model::SocialRanking { .. } => 1,
            Model::Categorical { states, levels } => levels * states * states,
        }
    }

    pub fn gamma_dim(&self) -> usize {
        match *self {
            Model::Categorical { states, .. } => states,
            _ => 1,
        }
    }

    pub fn theta_names(&self) -> Vec<String> {
        match self.theta_dim() {
            0 => Vec::new(),
            1 => vec!["theta".into()],
            d => (1..=d).map(|k| format!("theta{k}")).collect(),
        }
    }

    pub fn gamma_names(&self) -> Vec<String> {
        match self.gamma_dim() {
            1 => vec!["gamma".into()],
            d => (1..=d).map(|k| format!("gamma{k}")).collect(),
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut v = self.theta_names();
        v.extend(self.gamma_names());
        v
    }

    pub(crate) fn theta_blocks(&self) -> Vec<Block> {
        match *self {
            Model::Preparata | Model::Reliability { .. } => Vec::new(),
            Model::SocialRanking { .. } => vec![Block::Interval {
                lo: THETA_MIN,
                hi: THETA_MAX,
            }],
            Model::Categorical { states, levels } => {
                vec![Block::Simplex { dim: levels }; states * states]
            }
        }
    }

    fn gamma_blocks(&self) -> Vec<Block> {
        match *self {
            Model::Categorical { states, .. } => vec![Block::Simplex { dim: states }],
            _ => vec![Block::Interval { lo: 0.0, hi: 1.0 }],
        }
    }

    pub fn feasible_set(&self) -> FeasibleSet {
        let mut blocks = self.theta_blocks();
        blocks.extend(self.gamma_blocks());
        FeasibleSet { blocks }
    }

    pub fn is_feasible(&self, params: &Params) -> bool {
        params.theta.len() == self.theta_dim()
            && self
                .feasible_set()
                .contains(&params.flatten(), FEASIBILITY_TOL)
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if let Model::SocialRanking { .. } = self {
            if let Some(&t) = theta.first() {
                if t <= 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "dispersion theta must be positive, got {t}"
                    )));
                }
            }
        }
        let set = FeasibleSet {
            blocks: self.theta_blocks(),
        };
        if !set.contains(theta, FEASIBILITY_TOL) {
            return Err(Error::Infeasible(format!("theta = {theta:?}")));
        }
        Ok(())
    }

    fn check_gamma(&self, gamma: &[f64]) -> Result<()> {
        let set = FeasibleSet {
            blocks: self.gamma_blocks(),
        };
        if !set.contains(gamma, FEASIBILITY_TOL) {
            return Err(Error::Infeasible(format!("gamma = {gamma:?}")));
        }
        Ok(())
    }

    /// Score tensor `p_{h|l,m}(theta)`.
    pub fn tensor(&self, theta: &[f64]) -> Result<Tensor> {
        self.check_theta(theta)?;
        let (c, r) = (self.num_states(), self.num_scores());
        match self {
            Model::Preparata | Model::Reliability { .. } => {
                let cv = self.state_values();
                let rv = self.score_values();
                let top = rv[r - 1];
                let rf = r as f64;
                let mut prob = vec![0.0; r * c * c];
                for h in 0..r {
                    let frac = rv[h] / top;
                    for l in 0..c {
                        for m in 0..c {
                            let (cl, cm) = (cv[l], cv[m]);
                            prob[(h * c + l) * c + m] =
                                (2.0 / rf) * (1.0 - cl) * ((1.0 - cm) * (1.0 - frac) + cm * frac)
                                    + cl / rf;
                        }
                    }
                }
                Ok(Tensor::from_prob(r, c, prob))
            }
            Model::SocialRanking { distance, .. } => {
                let t = theta[0];
                let mut prob = vec![0.0; r * c * c];
                let mut log_prob = vec![0.0; r * c * c];
                for l in 0..c {
                    for m in 0..c {
                        let exps: Vec<f64> = (0..r)
                            .map(|h| {
                                let a = social_offset(r, c, distance, h, l, m);
                                -(a / t).powi(2)
                            })
                            .collect();
                        let lse = crate::math::log_sum_exp(&exps);
                        for h in 0..r {
                            let lp = exps[h] - lse;
                            log_prob[(h * c + l) * c + m] = lp;
                            prob[(h * c + l) * c + m] = lp.exp();
                        }
                    }
                }
                Ok(Tensor {
                    scores: r,
                    states: c,
                    prob,
                    log_prob,
                })
            }
            Model::Categorical { .. } => {
                // theta is laid out by (l, m) row, then h.
                let mut prob = vec![0.0; r * c * c];
                for l in 0..c {
                    for m in 0..c {
                        for h in 0..r {
                            prob[(h * c + l) * c + m] = theta[(l * c + m) * r + h].max(0.0);
                        }
                    }
                }
                Ok(Tensor::from_prob(r, c, prob))
            }
        }
    }

    /// State prior `p_l(gamma)`.
    pub fn prior(&self, gamma: &[f64]) -> Result<Vec<f64>> {
        self.check_gamma(gamma)?;
        Ok(match self {
            Model::Categorical { .. } => gamma.iter().map(|g| g.max(0.0)).collect(),
            _ => binomial_prior(self.num_states(), gamma[0]),
        })
    }

    pub fn gradients(&self, params: &Params) -> Result<ModelGradients> {
        self.check_theta(&params.theta)?;
        self.check_gamma(&params.gamma)?;
        let (c, r) = (self.num_states(), self.num_scores());
        let size = r * c * c;
        let tensor = match self {
            Model::Preparata | Model::Reliability { .. } => Vec::new(),
            Model::SocialRanking { distance, .. } => {
                let t = params.theta[0];
                let tab = self.tensor(&params.theta)?;
                let mut d = vec![0.0; size];
                for l in 0..c {
                    for m in 0..c {
                        // d e_h / d theta = 2 a_h^2 / theta^3
                        let de: Vec<f64> = (0..r)
                            .map(|h| {
                                2.0 * social_offset(r, c, distance, h, l, m).powi(2) / t.powi(3)
                            })
                            .collect();
                        let mean: f64 = (0..r).map(|h| tab.p(h, l, m) * de[h]).sum();
                        for h in 0..r {
                            d[(h * c + l) * c + m] = tab.p(h, l, m) * (de[h] - mean);
                        }
                    }
                }
                vec![d]
            }
            Model::Categorical { .. } => (0..size)
                .map(|k| {
                    let (lm, h) = (k / r, k % r);
                    let (l, m) = (lm / c, lm % c);
                    let mut d = vec![0.0; size];
                    d[(h * c + l) * c + m] = 1.0;
                    d
                })
                .collect(),
        };
        let prior = match self {
            Model::Categorical { .. } => (0..c)
                .map(|k| {
                    let mut d = vec![0.0; c];
                    d[k] = 1.0;
                    d
                })
                .collect(),
            _ => vec![binomial_prior_derivative(c, params.gamma[0])],
        };
        Ok(ModelGradients { tensor, prior })
    }

    /// Whether relaxed likelihoods are invariant under `gamma -> 1 - gamma`
    /// combined with reversing the state labels.
    pub fn has_label_swap_symmetry(&self) -> bool {
        match self {
            Model::SocialRanking {
                states, distance, ..
            } => distance.reversal_invariant(*states),
            _ => false,
        }
    }

    /// Map the mirrored hyperparameter of a symmetric model to the
    /// representative with `gamma <= 1/2`; identity otherwise.
    pub fn canonicalize(&self, params: &mut Params) {
        if self.has_label_swap_symmetry() && params.gamma[0] > 0.5 {
            params.gamma[0] = 1.0 - params.gamma[0];
        }
    }
}

/// `(r_R - r_h)/r_R - d(c_l, c_m)/c_C` with `r_h = h+1`, `c_l = l+1`.
fn social_offset(r: usize, c: usize, distance: &Distance, h: usize, l: usize, m: usize) -> f64 {
    let rr = r as f64;
    (rr - (h + 1) as f64) / rr - distance.eval(c, l, m) / c as f64
}

/// `Binomial(C-1, gamma)` over state indices `0..C`.
pub fn binomial_prior(states: usize, gamma: f64) -> Vec<f64> {
    let n = states - 1;
    (0..states)
        .map(|k| binomial(n, k) * gamma.powi(k as i32) * (1.0 - gamma).powi((n - k) as i32))
        .collect()
}

fn binomial_prior_derivative(states: usize, gamma: f64) -> Vec<f64> {
    let n = states - 1;
    (0..states)
        .map(|k| {
            let up = if k > 0 {
                k as f64 * gamma.powi(k as i32 - 1) * (1.0 - gamma).powi((n - k) as i32)
            } else {
                0.0
            };
            let down = if k < n {
                (n - k) as f64 * gamma.powi(k as i32) * (1.0 - gamma).powi((n - k) as i32 - 1)
            } else {
                0.0
            };
            binomial(n, k) * (up - down)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preparata_table() {
        let m = preparata_model();
        let t = m.tensor(&[]).unwrap();
        // healthy evaluator, healthy target: always score 0
        assert_eq!(t.p(0, 0, 0), 1.0);
        assert_eq!(t.p(1, 0, 0), 0.0);
        // healthy evaluator, faulty target: always score 1
        assert_eq!(t.p(1, 0, 1), 1.0);
        for mm in 0..2 {
            assert_eq!(t.p(0, 1, mm), 0.5);
            assert_eq!(t.p(1, 1, mm), 0.5);
        }
        let p = m.prior(&[0.3]).unwrap();
        assert!((p[1] - 0.3).abs() < 1e-15 && (p[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn reliability_reduces_to_preparata() {
        let a = reliability_model(2).unwrap().tensor(&[]).unwrap();
        let b = preparata_model().tensor(&[]).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn reliability_rows() {
        let t = reliability_model(5).unwrap().tensor(&[]).unwrap();
        let expect = [0.0, 0.1, 0.2, 0.3, 0.4];
        let sum: f64 = (0..5).map(|h| t.p(h, 0, 1)).sum();
        assert!((sum - 1.0).abs() < 1e-15);
        for (h, e) in expect.iter().enumerate() {
            assert!((t.p(h, 0, 1) - e).abs() < 1e-15);
            assert!((t.p(h, 1, 0) - 0.2).abs() < 1e-15);
            assert!((t.p(h, 1, 1) - 0.2).abs() < 1e-15);
        }
        assert!(reliability_model(1).is_err());
    }

    #[test]
    fn binomial_prior_values() {
        let m = social_ranking_model(3, 3, Distance::Absolute).unwrap();
        let p = m.prior(&[0.3]).unwrap();
        for (a, b) in p.iter().zip([0.49, 0.42, 0.09]) {
            assert!((a - b).abs() < 1e-15);
        }
        let g = m.gradients(&Params::new(vec![0.5], vec![0.0])).unwrap();
        assert!((g.prior[0][0] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn social_ranking_peaks_at_top_score_on_the_diagonal() {
        let m = social_ranking_model(3, 3, Distance::Absolute).unwrap();
        let t = m.tensor(&[0.5]).unwrap();
        for l in 0..3 {
            assert!(t.p(0, l, l) < t.p(1, l, l) && t.p(1, l, l) < t.p(2, l, l));
        }
        assert!(matches!(m.tensor(&[0.0]), Err(Error::InvalidModel(_))));
        assert!(matches!(m.tensor(&[-1.0]), Err(Error::InvalidModel(_))));
        assert!(matches!(m.tensor(&[20.0]), Err(Error::Infeasible(_))));
    }

    #[test]
    fn invalid_distance_tables() {
        let bad_diag = Distance::Table(vec![0.0, 1.0, 1.0, 0.5]);
        assert!(social_ranking_model(2, 3, bad_diag).is_err());
        let zero_off = Distance::Table(vec![0.0, 0.0, 1.0, 0.0]);
        assert!(social_ranking_model(2, 3, zero_off).is_err());
        let short = Distance::Table(vec![0.0, 1.0]);
        assert!(social_ranking_model(2, 3, short).is_err());
        let ok = Distance::Table(vec![0.0, 1.0, 2.0, 0.0]);
        let m = social_ranking_model(2, 3, ok).unwrap();
        assert!(!m.has_label_swap_symmetry());
    }

    #[test]
    fn categorical_dimensions_and_uniform_point() {
        let m = categorical_model(2, 2).unwrap();
        assert_eq!(m.theta_dim(), 8);
        assert_eq!(m.gamma_dim(), 2);
        let set = m.feasible_set();
        assert_eq!(set.blocks().len(), 5);
        let uniform = Params::new(vec![0.5; 8], vec![0.5; 2]);
        assert!(m.is_feasible(&uniform));
        assert_eq!(set.centroid(), uniform.flatten());
        assert!(m.tensor(&[0.7; 8]).is_err());
    }

    #[test]
    fn infeasible_hyperparameters_are_rejected() {
        assert!(preparata_model().prior(&[1.2]).is_err());
        assert!(preparata_model().prior(&[f64::NAN]).is_err());
        assert!(categorical_model(3, 2)
            .unwrap()
            .prior(&[0.5, 0.5, 0.5])
            .is_err());
    }

    #[test]
    fn canonicalization_only_for_symmetric_models() {
        let social = social_ranking_model(3, 3, Distance::Absolute).unwrap();
        let mut p = Params::new(vec![0.5], vec![0.8]);
        social.canonicalize(&mut p);
        assert!((p.gamma[0] - 0.2).abs() < 1e-15);
        let mut q = Params::gamma_only(0.8);
        preparata_model().canonicalize(&mut q);
        assert_eq!(q.gamma[0], 0.8);
    }
}
