use std::fs;

use scorenet::experiments::config::{EstimatorId, ExperimentConfig};
use scorenet::experiments::output::{emit_outputs, emit_single, read_misclass_csv, read_rmse_csv};
use scorenet::experiments::{
    distributed_stepsize, param_errors, run_estimator, run_single, run_social_ranking_suite,
    run_sweep, sample_instance, trial_seed, ORACLE,
};
use scorenet::{map_classify, misclassification_rate, soft_classify};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text).unwrap()
}

const SMALL: &str = r#"
model = "reliability"
R = 3
gamma = 0.3
N = 10
sweep = [10, 40, 90]
trials = 3
estimators = ["NR", "FR", "FR-distributed", "exact"]
seed = 17
solver.T = 300
"#;

#[test]
fn sweep_matches_an_independent_recomputation() {
    let cfg = config(SMALL);
    let result = run_sweep(&cfg).unwrap();
    assert_eq!(result.points.len(), 3);
    let alpha = distributed_stepsize(&cfg).unwrap();
    for point in &result.points {
        let n = point.n_edges;
        let mut sq = vec![0.0; cfg.estimators.len()];
        let mut wrong = vec![0.0; cfg.estimators.len()];
        let mut oracle_wrong = 0.0;
        for k in 0..cfg.trials {
            let seed = trial_seed(cfg.seed, n, k);
            let inst = sample_instance(&cfg, n, seed).unwrap();
            let oracle = soft_classify(&inst.counts, &cfg.model, &cfg.truth).unwrap();
            oracle_wrong += misclassification_rate(&map_classify(&oracle), &inst.states).unwrap();
            for (e, &id) in cfg.estimators.iter().enumerate() {
                let (est, _) = run_estimator(&cfg, id, &inst, alpha, seed).unwrap();
                sq[e] += param_errors(&cfg.model, &cfg.truth, &est)[0].powi(2);
                let out = soft_classify(&inst.counts, &cfg.model, &est).unwrap();
                wrong[e] += misclassification_rate(&out.labels, &inst.states).unwrap();
            }
        }
        let t = cfg.trials as f64;
        for e in 0..cfg.estimators.len() {
            assert!((point.rmse[e][0] - (sq[e] / t).sqrt()).abs() < 1e-15);
            assert!((point.estimator_rates[e] - wrong[e] / t).abs() < 1e-15);
        }
        assert!((point.oracle_rate - oracle_wrong / t).abs() < 1e-15);
        assert!(point.max_spread.is_some());
    }
}

#[test]
fn sweeps_are_reproducible_and_seed_dependent() {
    let one = SMALL.replace("trials = 3", "trials = 1");
    let a = run_sweep(&config(&one)).unwrap();
    let b = run_sweep(&config(&one)).unwrap();
    assert_eq!(a.rmse_rows(), b.rmse_rows());
    assert_eq!(a.misclass_rows(), b.misclass_rows());
    let c = run_sweep(&config(&one.replace("seed = 17", "seed = 18"))).unwrap();
    assert_ne!(a.rmse_rows(), c.rmse_rows());
}

#[test]
fn output_files_parse_back() {
    let cfg = config(SMALL);
    let result = run_sweep(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_outputs(&result, &cfg, dir.path()).unwrap();

    let rmse = read_rmse_csv(fs::File::open(dir.path().join("rmse.csv")).unwrap()).unwrap();
    assert_eq!(rmse, result.rmse_rows());
    assert_eq!(rmse.len(), 3 * 4);
    let labels: Vec<&str> = rmse.iter().take(4).map(|r| r.estimator.as_str()).collect();
    assert_eq!(labels, ["NR", "FR", "FR-distributed", "exact"]);

    let misclass =
        read_misclass_csv(fs::File::open(dir.path().join("misclass.csv")).unwrap()).unwrap();
    assert_eq!(misclass, result.misclass_rows());
    assert_eq!(misclass.len(), 3 * 5);
    assert_eq!(misclass[0].classifier, ORACLE);

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["schema_version"], 1);
    assert_eq!(meta["config"]["N"], 10);
    assert_eq!(meta["points"].as_array().unwrap().len(), 3);
}

#[test]
fn single_run_writes_every_artifact() {
    let cfg = config(SMALL);
    let run = run_single(&cfg, 40).unwrap();
    assert_eq!(run.estimates.len(), 4);
    assert_eq!(run.instance.graph.n_edges(), 40);
    let dir = tempfile::tempdir().unwrap();
    emit_single(&run, &cfg, dir.path()).unwrap();
    for name in [
        "graph.txt",
        "states.txt",
        "soft.csv",
        "estimates.csv",
        "soft_NR.csv",
        "soft_FR.csv",
        "soft_FR-distributed.csv",
        "soft_exact.csv",
    ] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    let est = fs::read_to_string(dir.path().join("estimates.csv")).unwrap();
    assert_eq!(est.lines().count(), 1 + 5);
    assert!(run_single(&cfg, 5).is_err());
    assert!(run_single(&cfg, 91).is_err());
}

#[test]
fn social_suite_requires_three_states_and_levels() {
    let cfg = config(SMALL);
    assert!(run_social_ranking_suite(&cfg).is_err());
    let sr = config(
        r#"
        model = "social-ranking"
        C = 3
        R = 3
        theta = 0.5
        gamma = 0.3
        N = 8
        sweep = [8, 56]
        trials = 2
        estimators = ["NR", "FR"]
        "#,
    );
    let result = run_social_ranking_suite(&sr).unwrap();
    assert_eq!(
        result.params,
        vec!["theta".to_string(), "gamma".to_string()]
    );
    assert_eq!(result.rmse_rows().len(), 2 * 2 * 2);
    assert!(result
        .rmse_curve(EstimatorId::FullyRelaxed, "gamma")
        .is_some());
    assert!(result.rmse_curve(EstimatorId::Exact, "gamma").is_none());
}

#[test]
fn full_scale_overrides_the_sweep() {
    let mut cfg = config(SMALL);
    cfg.set_full_scale();
    assert_eq!((cfg.n_agents, cfg.trials), (300, 1000));
    assert_eq!(cfg.sweep, vec![300, 3000, 89_700]);
    // Exact enumeration cannot handle 300 agents.
    assert!(cfg.validate().is_err());
}
