use coxpp::harness::{run_checks, run_experiment, CheckGroup, ExperimentConfig, ValidationOptions};

fn sat(reps: u32) -> ExperimentConfig {
    ExperimentConfig {
        reps,
        sweep: vec![10.0, 20.0, 40.0, 80.0],
        ..ExperimentConfig::converge_sat(11)
    }
}

#[test]
fn stderr_shrinks_with_root_reps() {
    let small = run_experiment(&sat(2500), None, false).unwrap();
    let big = run_experiment(&sat(10_000), None, false).unwrap();
    for (s, b) in small.rows.iter().zip(&big.rows) {
        let ratio = s.distance.stderr / b.distance.stderr;
        assert!(
            (ratio / 2.0 - 1.0).abs() <= 0.2,
            "n={}: stderr ratio {ratio}",
            s.param
        );
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let cfg = ExperimentConfig {
        reps: 1000,
        ..sat(1000)
    };
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        pool.install(|| run_experiment(&cfg, Some(dir.path()), false))
            .unwrap();
        let checks = pool.install(|| {
            run_checks(&ValidationOptions {
                seed: 4,
                groups: vec![CheckGroup::Glauber],
                reps: Some(1000),
            })
        });
        (
            std::fs::read(dir.path().join("results.csv")).unwrap(),
            checks.to_csv().unwrap(),
        )
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn matched_sweeps_respect_bounds_at_small_reps() {
    let cox = ExperimentConfig {
        reps: 2000,
        calibration_reps: 20_000,
        sweep: vec![5.0, 10.0, 20.0, 40.0],
        ..ExperimentConfig::converge_cox(8)
    };
    for cfg in [sat(2000), cox] {
        let r = run_experiment(&cfg, None, false).unwrap();
        assert!(r.all_within_bound(), "{:?}", r.rows);
        assert!(r.fit.slope < 0.0);
        for row in &r.rows {
            assert!(row.count_tv.value <= row.count_tv.estimate);
            assert!(row.distance.estimate >= 0.0);
        }
    }
}
