//! Exact single-hop Bayesian self-classification.
//!
//! The posterior of agent `i` given the scores it gave and received factors
//! over three disjoint neighbor classes (mutual, in-only, out-only), so only
//! the histograms in [`NeighborCounts`] are needed. Everything is computed in
//! the log domain; the per-class factors underflow for in-degrees in the
//! hundreds.

use std::io::Write;

use crate::error::{Error, Result};
use crate::graph::NeighborCounts;
use crate::math::{log_sum_exp, weighted_log};
use crate::models::{Model, Params};

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierOutput {
    /// `u_i`: posterior over states, one row per agent.
    pub posteriors: Vec<Vec<f64>>,
    /// `log v_i(c_l)`: unnormalized log posterior.
    pub log_unnormalized: Vec<Vec<f64>>,
    /// `log Z_i`.
    pub log_normalizer: Vec<f64>,
    /// MAP state index per agent.
    pub labels: Vec<usize>,
}

impl ClassifierOutput {
    pub fn n_agents(&self) -> usize {
        self.posteriors.len()
    }

    /// CSV rows `agent,u_1,...,u_C,map_label` with 1-based agent ids and labels.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let c = self.posteriors.first().map_or(0, Vec::len);
        let mut header = vec!["agent".to_string()];
        header.extend((1..=c).map(|l| format!("u_{l}")));
        header.push("map_label".into());
        wtr.write_record(&header)?;
        for (i, (u, &label)) in self.posteriors.iter().zip(&self.labels).enumerate() {
            let mut row = vec![(i + 1).to_string()];
            row.extend(u.iter().map(f64::to_string));
            row.push((label + 1).to_string());
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Per-state log factors shared by every agent.
struct Factors {
    log_prior: Vec<f64>,
    /// `[l][h][k]`: log sum_m p_{k|m,l} p_{h|l,m} p_m (gave h, received k).
    mutual: Vec<Vec<Vec<f64>>>,
    /// `[l][h]`: log sum_m p_{h|m,l} p_m (received h).
    received: Vec<Vec<f64>>,
    /// `[l][h]`: log sum_m p_{h|l,m} p_m (gave h).
    given: Vec<Vec<f64>>,
}

impl Factors {
    fn new(model: &Model, params: &Params) -> Result<Self> {
        let tensor = model.tensor(&params.theta)?;
        let prior = model.prior(&params.gamma)?;
        let log_prior: Vec<f64> = prior.iter().map(|p| p.ln()).collect();
        let (c, r) = (model.num_states(), model.num_scores());
        let mut terms = vec![0.0; c];
        let mut mutual = vec![vec![vec![0.0; r]; r]; c];
        let mut received = vec![vec![0.0; r]; c];
        let mut given = vec![vec![0.0; r]; c];
        for l in 0..c {
            for h in 0..r {
                for (k, slot) in mutual[l][h].iter_mut().enumerate() {
                    for (m, t) in terms.iter_mut().enumerate() {
                        *t = tensor.log_p(k, m, l) + tensor.log_p(h, l, m) + log_prior[m];
                    }
                    *slot = log_sum_exp(&terms);
                }
                for (m, t) in terms.iter_mut().enumerate() {
                    *t = tensor.log_p(h, m, l) + log_prior[m];
                }
                received[l][h] = log_sum_exp(&terms);
                for (m, t) in terms.iter_mut().enumerate() {
                    *t = tensor.log_p(h, l, m) + log_prior[m];
                }
                given[l][h] = log_sum_exp(&terms);
            }
        }
        Ok(Self {
            log_prior,
            mutual,
            received,
            given,
        })
    }

    fn log_v(&self, counts: &NeighborCounts, i: usize, l: usize) -> f64 {
        let r = counts.score_levels();
        let mut acc = self.log_prior[l];
        for h in 0..r {
            for k in 0..r {
                acc += weighted_log(counts.mutual(i, h, k) as f64, self.mutual[l][h][k]);
            }
            acc += weighted_log(counts.in_only(i)[h] as f64, self.received[l][h]);
            acc += weighted_log(counts.out_only(i)[h] as f64, self.given[l][h]);
        }
        acc
    }
}

pub fn soft_classify(
    counts: &NeighborCounts,
    model: &Model,
    params: &Params,
) -> Result<ClassifierOutput> {
    if counts.score_levels() != model.num_scores() {
        return Err(Error::InvalidInput(format!(
            "counts use {} score levels, model has {}",
            counts.score_levels(),
            model.num_scores()
        )));
    }
    let factors = Factors::new(model, params)?;
    let c = model.num_states();
    let n = counts.n_agents();
    let mut out = ClassifierOutput {
        posteriors: Vec::with_capacity(n),
        log_unnormalized: Vec::with_capacity(n),
        log_normalizer: Vec::with_capacity(n),
        labels: Vec::with_capacity(n),
    };
    for i in 0..n {
        let log_v: Vec<f64> = (0..c).map(|l| factors.log_v(counts, i, l)).collect();
        let log_z = log_sum_exp(&log_v);
        if !log_z.is_finite() {
            return Err(Error::DegeneratePosterior { agent: i });
        }
        let u: Vec<f64> = log_v.iter().map(|&lv| (lv - log_z).exp()).collect();
        out.labels.push(map_label(&log_v));
        out.posteriors.push(u);
        out.log_unnormalized.push(log_v);
        out.log_normalizer.push(log_z);
    }
    Ok(out)
}

/// Argmax with lowest-index tie-break.
pub fn map_label(u: &[f64]) -> usize {
    u.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(best, bv), (k, &v)| {
            if v > bv {
                (k, v)
            } else {
                (best, bv)
            }
        })
        .0
}

pub fn map_classify(output: &ClassifierOutput) -> Vec<usize> {
    output.posteriors.iter().map(|u| map_label(u)).collect()
}

pub fn misclassification_rate(labels: &[usize], truth: &[usize]) -> Result<f64> {
    if labels.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: truth.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::InvalidInput("no labels to compare".into()));
    }
    let wrong = labels.iter().zip(truth).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / labels.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{aggregate_counts, ScoreGraph};
    use crate::models::{categorical_model, preparata_model};

    #[test]
    fn map_examples() {
        assert_eq!(map_label(&[0.5, 0.25, 0.15, 0.1]), 0);
        assert_eq!(map_label(&[0.5, 0.5]), 0);
        assert_eq!(map_label(&[0.25; 4]), 0);
        assert_eq!(map_label(&[0.1, 0.2, 0.7]), 2);
    }

    #[test]
    fn misclassification_examples() {
        assert_eq!(misclassification_rate(&[0, 1, 1], &[0, 1, 1]).unwrap(), 0.0);
        assert_eq!(misclassification_rate(&[0, 1, 0], &[1, 0, 1]).unwrap(), 1.0);
        let r = misclassification_rate(&[0, 1, 1], &[0, 1, 2]).unwrap();
        assert!((r - 1.0 / 3.0).abs() < 1e-15);
        assert!(misclassification_rate(&[0], &[0, 1]).is_err());
        assert!(misclassification_rate(&[], &[]).is_err());
    }

    #[test]
    fn uniform_rows_give_back_the_prior() {
        // Agent 2 only receives scores; every row of the tensor is uniform.
        let model = categorical_model(3, 2).unwrap();
        let params = Params::new(vec![0.5; 18], vec![0.2, 0.5, 0.3]);
        let g =
            ScoreGraph::from_triples(3, 2, &[(0, 1, 0), (1, 0, 1), (0, 2, 1), (1, 2, 0)]).unwrap();
        let out = soft_classify(&aggregate_counts(&g), &model, &params).unwrap();
        for (a, b) in out.posteriors[2].iter().zip(&params.gamma) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_prior_pins_the_posterior() {
        let model = categorical_model(3, 2).unwrap();
        let params = Params::new(vec![0.5; 18], vec![1.0, 0.0, 0.0]);
        let g = ScoreGraph::from_triples(2, 2, &[(0, 1, 0), (1, 0, 1)]).unwrap();
        let out = soft_classify(&aggregate_counts(&g), &model, &params).unwrap();
        for u in &out.posteriors {
            assert_eq!(u, &vec![1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn impossible_evidence_is_reported() {
        // gamma = 0: everyone healthy, so a score 1 cannot occur.
        let g = ScoreGraph::from_triples(2, 2, &[(0, 1, 1), (1, 0, 0)]).unwrap();
        let err = soft_classify(
            &aggregate_counts(&g),
            &preparata_model(),
            &Params::gamma_only(0.0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegeneratePosterior { .. }));
    }

    #[test]
    fn csv_export() {
        let out = ClassifierOutput {
            posteriors: vec![vec![0.75, 0.25], vec![0.5, 0.5]],
            log_unnormalized: vec![vec![0.0; 2]; 2],
            log_normalizer: vec![0.0; 2],
            labels: vec![0, 0],
        };
        let mut buf = Vec::new();
        out.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "agent,u_1,u_2,map_label\n1,0.75,0.25,1\n2,0.5,0.5,1\n"
        );
    }
}
