//! Self-checks of the numerical invariants, run by `scorenet check`.

use rand::Rng;

use crate::distributed::{init_agents, push_sum_round};
use crate::error::Result;
use crate::estimators::{
    fr_binary_closed_form, fr_gradient, fr_objective, nr_gradient, nr_objective,
};
use crate::graph::{
    aggregate_counts, generate_scores, is_strongly_connected, make_comm_schedule, sample_topology,
    ScheduleFamily, TopologyFamily,
};
use crate::models::{
    categorical_model, preparata_model, reliability_model, social_ranking_model, Distance, Model,
    Params,
};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, worst: f64, tol: f64) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: worst <= tol,
        detail: format!("worst deviation {worst:.3e} (tolerance {tol:.0e})"),
    }
}

fn models() -> Result<Vec<Model>> {
    Ok(vec![
        preparata_model(),
        reliability_model(5)?,
        social_ranking_model(3, 3, Distance::Absolute)?,
        categorical_model(3, 2)?,
    ])
}

fn interior_point<R: Rng>(model: &Model, rng: &mut R) -> Params {
    Params::from_flat(model, &model.feasible_set().sample(rng, 0.1))
}

fn tensor_normalization(seed: u64) -> Result<CheckOutcome> {
    let mut rng = rng::stream(seed, &[1]);
    let mut worst: f64 = 0.0;
    for model in models()? {
        for _ in 0..20 {
            let p = interior_point(&model, &mut rng);
            let t = model.tensor(&p.theta)?;
            let (c, r) = (model.num_states(), model.num_scores());
            for l in 0..c {
                for m in 0..c {
                    let s: f64 = (0..r).map(|h| t.p(h, l, m)).sum();
                    worst = worst.max((s - 1.0).abs());
                }
            }
            let s: f64 = model.prior(&p.gamma)?.iter().sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    Ok(outcome("tensor and prior normalization", worst, 1e-12))
}

fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let den: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-8);
    num / den
}

fn central_difference(f: impl Fn(&[f64]) -> Result<f64>, z: &[f64]) -> Result<Vec<f64>> {
    let h = 1e-6;
    (0..z.len())
        .map(|k| {
            let mut zp = z.to_vec();
            let mut zm = z.to_vec();
            zp[k] += h;
            zm[k] -= h;
            Ok((f(&zp)? - f(&zm)?) / (2.0 * h))
        })
        .collect()
}

fn objective_gradients(seed: u64) -> Result<CheckOutcome> {
    let mut rng = rng::stream(seed, &[2]);
    let mut worst: f64 = 0.0;
    // Simplex-constrained models would need tangent-space differences;
    // they are covered by the test suite.
    for model in models()?.into_iter().take(3) {
        let truth = interior_point(&model, &mut rng);
        let topo = sample_topology(8, 20, &TopologyFamily::CyclicPlusRandom, rng.gen())?;
        let (graph, _) = generate_scores(&topo, &model, &truth, rng.gen())?;
        let counts = aggregate_counts(&graph);
        let phi = counts.phi();
        for _ in 0..5 {
            let p = interior_point(&model, &mut rng);
            let z = p.flatten();
            let at = |z: &[f64]| Params::from_flat(&model, z);
            let fd = central_difference(|z| nr_objective(&counts, &model, &at(z)), &z)?;
            worst = worst.max(relative_gap(&nr_gradient(&counts, &model, &p)?, &fd));
            let fd = central_difference(|z| fr_objective(&phi, &model, &at(z)), &z)?;
            worst = worst.max(relative_gap(&fr_gradient(&phi, &model, &p)?, &fd));
        }
    }
    Ok(outcome(
        "objective gradients vs finite differences",
        worst,
        1e-6,
    ))
}

fn label_swap(seed: u64) -> Result<CheckOutcome> {
    let mut rng = rng::stream(seed, &[3]);
    let model = social_ranking_model(3, 3, Distance::Absolute)?;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let p = interior_point(&model, &mut rng);
        let topo = sample_topology(10, 40, &TopologyFamily::CyclicPlusRandom, rng.gen())?;
        let (graph, _) = generate_scores(&topo, &model, &p, rng.gen())?;
        let counts = aggregate_counts(&graph);
        let q = Params::new(p.theta.clone(), vec![1.0 - p.gamma[0]]);
        worst = worst
            .max((nr_objective(&counts, &model, &p)? - nr_objective(&counts, &model, &q)?).abs());
        let phi = counts.phi();
        worst =
            worst.max((fr_objective(&phi, &model, &p)? - fr_objective(&phi, &model, &q)?).abs());
    }
    Ok(outcome(
        "label-swap symmetry of relaxed objectives",
        worst,
        1e-9,
    ))
}

fn push_sum(seed: u64) -> Result<Vec<CheckOutcome>> {
    let model = reliability_model(4)?;
    let topo = sample_topology(20, 80, &TopologyFamily::CyclicPlusRandom, seed)?;
    let (graph, _) = generate_scores(&topo, &model, &Params::gamma_only(0.3), seed)?;
    let counts = aggregate_counts(&graph);
    let phi = counts.phi();
    let totals: Vec<f64> = counts.totals().iter().map(|&c| c as f64).collect();
    let mass = counts.n_edges() as f64;
    let schedule = make_comm_schedule(20, ScheduleFamily::StaticCycle, 1, seed)?;
    let mut agents = init_agents(&counts, vec![vec![0.5]; 20])?;
    let mut drift: f64 = 0.0;
    for t in 0..3000 {
        push_sum_round(&mut agents, schedule.frame(t))?;
        for (h, &total) in totals.iter().enumerate() {
            let s: f64 = agents.iter().map(|a| a.xi[h]).sum();
            if total > 0.0 {
                drift = drift.max((s - total).abs() / total);
            }
        }
        let s: f64 = agents.iter().map(|a| a.eta).sum();
        drift = drift.max((s - mass).abs() / mass);
    }
    let err = agents
        .iter()
        .map(|a| crate::math::dist_inf(&a.phi(), &phi))
        .fold(0.0, f64::max);
    Ok(vec![
        outcome("push-sum mass conservation", drift, 1e-9),
        outcome("push-sum convergence on a static cycle", err, 1e-10),
    ])
}

fn schedules(seed: u64) -> Result<CheckOutcome> {
    let mut bad = 0usize;
    for n in [2usize, 5, 20] {
        for q in 1..=n.min(4) {
            let s = make_comm_schedule(n, ScheduleFamily::PeriodicEdgePartition, q, seed)?;
            bad += (0..s.frames().len())
                .filter(|&t| !is_strongly_connected(n, &s.window_union(t)))
                .count();
        }
    }
    Ok(CheckOutcome {
        name: "schedule window connectivity",
        passed: bad == 0,
        detail: format!("{bad} disconnected windows"),
    })
}

fn count_identities(seed: u64) -> Result<CheckOutcome> {
    let model = reliability_model(3)?;
    let topo = sample_topology(15, 90, &TopologyFamily::CyclicPlusRandom, seed)?;
    let (graph, _) = generate_scores(&topo, &model, &Params::gamma_only(0.4), seed)?;
    let counts = aggregate_counts(&graph);
    let r = counts.score_levels();
    let mut bad = 0usize;
    for i in 0..counts.n_agents() {
        for k in 0..r {
            let mutual: u64 = (0..r).map(|h| counts.mutual(i, h, k)).sum();
            if counts.received(i)[k] != counts.in_only(i)[k] + mutual {
                bad += 1;
            }
        }
    }
    let sum: u64 = counts.totals().iter().sum();
    if sum != graph.n_edges() as u64 {
        bad += 1;
    }
    Ok(CheckOutcome {
        name: "neighbor count identities",
        passed: bad == 0,
        detail: format!("{bad} violations"),
    })
}

fn closed_form() -> Result<CheckOutcome> {
    let model = preparata_model();
    let mut worst: f64 = 0.0;
    for k in 0..=100 {
        let phi2 = k as f64 / 100.0;
        let phi = [1.0 - phi2, phi2];
        let best = fr_objective(
            &phi,
            &model,
            &Params::gamma_only(fr_binary_closed_form(phi2)),
        )?;
        for g in 0..=1000 {
            let v = fr_objective(&phi, &model, &Params::gamma_only(g as f64 / 1000.0))?;
            worst = worst.max(best - v);
        }
    }
    Ok(outcome("binary closed form vs grid", worst, 1e-12))
}

pub fn run_checks(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = vec![
        tensor_normalization(seed)?,
        objective_gradients(seed)?,
        label_swap(seed)?,
    ];
    out.extend(push_sum(seed)?);
    out.push(schedules(seed)?);
    out.push(count_identities(seed)?);
    out.push(closed_form()?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_checks(7).unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
