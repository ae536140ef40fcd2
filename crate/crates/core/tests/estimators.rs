mod common;

use proptest::prelude::*;
use scorenet::estimators::{
    exact_loglikelihood, fr_binary_closed_form, fr_lipschitz_bound, fr_objective,
    lipschitz_estimate, nr_objective, projected_gradient_solve, stationarity_residual,
};
use scorenet::graph::{
    aggregate_counts, generate_scores, sample_topology, ScoreGraph, TopologyFamily,
};
use scorenet::models::{
    categorical_model, preparata_model, reliability_model, social_ranking_model, Distance, Params,
};
use scorenet::{estimate, EstimatorProblem, Objective, SolverConfig, StepRule};

use common::{
    all_models, edge_product_fr, naive_exact_loglik, naive_nr, random_instance, random_params,
};

#[test]
fn likelihoods_match_naive_definitions() {
    let mut rng = scorenet::rng::stream(5, &[]);
    for model in all_models() {
        for _ in 0..3 {
            let (graph, _, _) = random_instance(&model, 5, 12, &mut rng);
            let p = random_params(&model, &mut rng, 0.05);
            let counts = aggregate_counts(&graph);
            let exact = exact_loglikelihood(&graph, &model, &p).unwrap();
            let oracle = naive_exact_loglik(&graph, &model, &p);
            assert!(
                (exact - oracle).abs() < 1e-10 * oracle.abs().max(1.0),
                "{}",
                model.name()
            );
            let nr = nr_objective(&counts, &model, &p).unwrap();
            assert!((nr - naive_nr(&graph, &model, &p)).abs() < 1e-10 * nr.abs().max(1.0));
            let fr = fr_objective(&counts.phi(), &model, &p).unwrap();
            let n = graph.n_edges() as f64;
            assert!((-n * fr - edge_product_fr(&graph, &model, &p)).abs() < 1e-10 * n);
        }
    }
}

#[test]
fn relaxations_coincide_on_a_cycle() {
    // With in-degree one everywhere, NR's per-agent marginal is a single edge
    // factor, so NR and FR agree up to the sign and scale.
    let model = reliability_model(3).unwrap();
    let topo = sample_topology(9, 9, &TopologyFamily::CyclicPlusRandom, 0).unwrap();
    let (graph, _) = generate_scores(&topo, &model, &Params::gamma_only(0.3), 0).unwrap();
    let counts = aggregate_counts(&graph);
    for g in [0.1, 0.4, 0.8] {
        let p = Params::gamma_only(g);
        let nr = nr_objective(&counts, &model, &p).unwrap();
        let fr = fr_objective(&counts.phi(), &model, &p).unwrap();
        assert!((nr + 9.0 * fr).abs() < 1e-12);
    }
}

#[test]
fn solver_reaches_the_binary_closed_form() {
    let phi2 = 0.4;
    let problem = EstimatorProblem::new(
        preparata_model(),
        Objective::FullyRelaxed(vec![1.0 - phi2, phi2]),
    );
    let target = fr_binary_closed_form(phi2);
    for step in [StepRule::Backtracking, StepRule::Lipschitz] {
        let config = SolverConfig {
            step,
            ..SolverConfig::default()
        };
        let sol = projected_gradient_solve(&problem, &Params::gamma_only(0.5), &config).unwrap();
        assert!(sol.converged);
        assert!(
            (sol.params.gamma[0] - target).abs() < 1e-6,
            "{step:?}: {:?}",
            sol.params
        );
    }
}

#[test]
fn fixed_small_steps_decrease_the_cost_monotonically() {
    let model = social_ranking_model(3, 3, Distance::Absolute).unwrap();
    for seed in 0..50u64 {
        let mut rng = scorenet::rng::stream(seed, &[]);
        let (graph, _, _) = random_instance(&model, 20, 80, &mut rng);
        let problem = EstimatorProblem::new(
            model.clone(),
            Objective::FullyRelaxed(aggregate_counts(&graph).phi()),
        );
        let lip = lipschitz_estimate(&problem, 100, seed).unwrap();
        let config = SolverConfig {
            step: StepRule::Fixed(1.0 / lip),
            max_iters: 2000,
            tol: 1e-9,
        };
        let start = random_params(&model, &mut rng, 0.05);
        let sol = projected_gradient_solve(&problem, &start, &config).unwrap();
        for w in sol.trace.windows(2) {
            assert!(
                w[1].cost <= w[0].cost + 1e-12,
                "seed {seed}: {} -> {}",
                w[0].cost,
                w[1].cost
            );
        }
    }
}

#[test]
fn all_healthy_reports_put_the_estimate_on_the_boundary() {
    let topo = sample_topology(10, 40, &TopologyFamily::CyclicPlusRandom, 2).unwrap();
    let graph = ScoreGraph::new(topo, 2, vec![0; 40]).unwrap();
    let model = preparata_model();
    for objective in [
        Objective::NodeRelaxed(aggregate_counts(&graph)),
        Objective::FullyRelaxed(aggregate_counts(&graph).phi()),
        Objective::Exact(graph.clone()),
    ] {
        let problem = EstimatorProblem::new(model.clone(), objective);
        let p = estimate(&problem, &SolverConfig::default()).unwrap();
        assert!(
            p.gamma[0] >= 0.0 && p.gamma[0] < 1e-6,
            "{:?}: {:?}",
            problem.kind(),
            p
        );
    }
}

#[test]
fn symmetric_estimates_are_canonical() {
    let model = social_ranking_model(3, 3, Distance::Absolute).unwrap();
    let truth = Params::new(vec![0.5], vec![0.8]);
    let topo = sample_topology(40, 400, &TopologyFamily::CyclicPlusRandom, 4).unwrap();
    let (graph, _) = generate_scores(&topo, &model, &truth, 4).unwrap();
    let counts = aggregate_counts(&graph);
    for objective in [
        Objective::NodeRelaxed(counts.clone()),
        Objective::FullyRelaxed(counts.phi()),
    ] {
        let problem = EstimatorProblem::new(model.clone(), objective);
        let p = estimate(&problem, &SolverConfig::default()).unwrap();
        assert!(p.gamma[0] <= 0.5, "{p:?}");
        // gamma = 1/2 can be a genuine maximizer; the estimate must at least
        // beat the truth and its mirror image.
        let cost = problem.cost(&p.flatten()).unwrap();
        for g in [0.8, 0.2] {
            assert!(cost <= problem.cost(&[0.5, g]).unwrap() + 1e-12);
        }
    }
}

#[test]
fn estimates_are_stationary() {
    let mut rng = scorenet::rng::stream(8, &[]);
    for model in all_models() {
        let (graph, _, _) = random_instance(&model, 15, 60, &mut rng);
        let counts = aggregate_counts(&graph);
        for objective in [
            Objective::NodeRelaxed(counts.clone()),
            Objective::FullyRelaxed(counts.phi()),
        ] {
            let problem = EstimatorProblem::new(model.clone(), objective);
            let sol = projected_gradient_solve(
                &problem,
                &problem.default_start(),
                &SolverConfig::default(),
            )
            .unwrap();
            assert!(model.is_feasible(&sol.params));
            let res = stationarity_residual(&problem, &sol.params, 1e-2).unwrap();
            assert!(
                res < 1e-6,
                "{} {:?}: residual {res}",
                model.name(),
                problem.kind()
            );
        }
    }
}

#[test]
fn estimates_ignore_agent_labels() {
    let model = reliability_model(4).unwrap();
    let mut rng = scorenet::rng::stream(3, &[]);
    let (graph, _, _) = random_instance(&model, 12, 50, &mut rng);
    let triples: Vec<_> = graph
        .triples()
        .map(|(i, j, h)| ((i + 5) % 12, (j + 5) % 12, h))
        .collect();
    let moved = ScoreGraph::from_triples(12, 4, &triples).unwrap();
    let config = SolverConfig::default();
    let solve = |g: &ScoreGraph| {
        estimate(
            &EstimatorProblem::new(model.clone(), Objective::NodeRelaxed(aggregate_counts(g))),
            &config,
        )
        .unwrap()
    };
    assert!((solve(&graph).gamma[0] - solve(&moved).gamma[0]).abs() < 1e-12);
}

#[test]
fn exact_estimation_rejects_simplex_models_and_large_graphs() {
    let topo = sample_topology(13, 13, &TopologyFamily::CyclicPlusRandom, 0).unwrap();
    let (graph, _) =
        generate_scores(&topo, &preparata_model(), &Params::gamma_only(0.2), 0).unwrap();
    let problem = EstimatorProblem::new(preparata_model(), Objective::Exact(graph));
    assert!(estimate(&problem, &SolverConfig::default()).is_err());

    let model = categorical_model(2, 2).unwrap();
    let mut rng = scorenet::rng::stream(0, &[]);
    let (graph, _, _) = random_instance(&model, 4, 6, &mut rng);
    let problem = EstimatorProblem::new(model, Objective::Exact(graph));
    assert!(estimate(&problem, &SolverConfig::default()).is_err());
}

#[test]
fn trace_csv_has_a_row_per_iterate() {
    let problem = EstimatorProblem::new(preparata_model(), Objective::FullyRelaxed(vec![0.7, 0.3]));
    let config = SolverConfig {
        step: StepRule::Fixed(0.05),
        max_iters: 25,
        tol: 0.0,
    };
    let sol = projected_gradient_solve(&problem, &Params::gamma_only(0.5), &config).unwrap();
    assert_eq!(sol.trace.len(), 26);
    assert!(!sol.converged);
    let mut buf = Vec::new();
    sol.write_trace_csv(&mut buf, &preparata_model()).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("iter,objective,gamma"));
    assert_eq!(text.lines().count(), 27);
}

#[test]
fn lipschitz_bound_dominates_a_specific_mixture() {
    let model = social_ranking_model(3, 3, Distance::Absolute).unwrap();
    let bound = fr_lipschitz_bound(&model, 200, 1).unwrap();
    let problem = EstimatorProblem::new(model, Objective::FullyRelaxed(vec![0.2, 0.3, 0.5]));
    let one = lipschitz_estimate(&problem, 200, 1).unwrap();
    assert!(bound.is_finite() && bound > 0.0);
    assert!(one <= bound * (1.0 + 1e-9));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_is_a_global_maximizer(phi2 in 0.0f64..1.0) {
        let phi = [1.0 - phi2, phi2];
        let model = preparata_model();
        let best = fr_objective(&phi, &model, &Params::gamma_only(fr_binary_closed_form(phi2))).unwrap();
        for k in 0..=400 {
            let v = fr_objective(&phi, &model, &Params::gamma_only(k as f64 / 400.0)).unwrap();
            prop_assert!(best <= v + 1e-12);
        }
    }
}
