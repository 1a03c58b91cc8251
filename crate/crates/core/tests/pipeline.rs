use ucpt::config::ExperimentConfig;
use ucpt::datagen::{cov_factor, NoiseSpec};
use ucpt::experiments::{size_experiment, Method, StripTiming};
use ucpt::io::{load_csv, write_csv, CsvSchema};
use ucpt::rng::hash_label;
use ucpt::{run_cusum_test, run_test, CovarianceSpec, DataMatrix, KernelKind, ScenarioConfig};

fn scenario() -> ScenarioConfig {
    let mut c = ScenarioConfig::null(NoiseSpec::StudentT { nu: 6.0 }, CovarianceSpec::Ar { rho: 0.5 }, 50, 8);
    c.b = 99;
    c.reps = 30;
    c.seed = 77;
    c
}

#[test]
fn csv_round_trip_preserves_test_result() {
    let config = scenario().with_shift(25, vec![1.0; 8]);
    let factor = cov_factor(&config.cov, config.p).unwrap();
    let data = config.generate(&factor, hash_label("pipeline"), 0).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    write_csv(&data, &path).unwrap();
    let back = load_csv(&path, &CsvSchema::default()).unwrap();
    assert_eq!(back, data);

    for kernel in [KernelKind::Linear, KernelKind::Sign] {
        let mut a = run_test(&data, &kernel, 0.05, 400, 5).unwrap();
        let mut b = run_test(&back, &kernel, 0.05, 400, 5).unwrap();
        a.elapsed_ms = None;
        b.elapsed_ms = None;
        assert_eq!(a, b);
        assert!(a.reject);
    }
    let c = run_cusum_test(&back, 10, 0.05, 400, 5).unwrap();
    assert!(c.reject);
}

#[test]
fn size_experiment_is_reproducible() {
    let config = scenario();
    let method = Method::Jmb { kernel: KernelKind::Sign };
    let mut a = size_experiment(&config, "repro", method).unwrap();
    let mut b = size_experiment(&config, "repro", method).unwrap();
    a.strip_timing();
    b.strip_timing();
    assert_eq!(a, b);
    assert_eq!(a.p_values.len(), 30);
    assert!(a.p_values.iter().all(|&p| p > 0.0 && p <= 1.0));

    let c = size_experiment(&config, "other-id", method).unwrap();
    assert_ne!(a.p_values, c.p_values);
}

#[test]
fn config_builds_expected_scenarios() {
    let cfg = ExperimentConfig::from_toml_str(
        "noise = \"contaminated_gaussian\"\neps = 0.1\nnu = 3.0\ncov = \"ar\"\nrho = 0.3\nn = 80\np = 5\nm = 20\ntheta = 1.5\n",
    )
    .unwrap();
    let s = cfg.scenario().unwrap();
    assert_eq!(s.noise, NoiseSpec::ContaminatedGaussian { eps: 0.1, nu: 3.0 });
    assert_eq!(s.cov, CovarianceSpec::Ar { rho: 0.3 });
    assert_eq!((s.n, s.p, s.m), (80, 5, Some(20)));
    assert_eq!(s.theta, vec![1.5, 0.0, 0.0, 0.0, 0.0]);
    assert_eq!((s.b, s.reps, s.alpha, s.seed), (200, 500, 0.05, 1));
    assert!(cfg.null_scenario().unwrap().is_null());

    let grid = cfg.power_grid().unwrap();
    assert_eq!(grid.len(), 3 * 8);
    assert_eq!(grid.iter().filter(|g| g.is_null()).count(), 3);
    assert_eq!(grid[1].m, Some(8));

    let paper = ExperimentConfig::from_json_str(r#"{"preset": "paper"}"#).unwrap();
    let s = paper.scenario().unwrap();
    assert_eq!((s.n, s.p), (500, 600));
}

#[test]
fn single_observation_is_rejected_with_clear_error() {
    let data = DataMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
    let err = run_test(&data, &KernelKind::Linear, 0.05, 10, 0).unwrap_err();
    assert!(matches!(err, ucpt::Error::InsufficientData { needed: 2, got: 1 }));
}
