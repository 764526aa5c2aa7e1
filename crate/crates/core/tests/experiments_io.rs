use beamspace::experiments::{
    emit_results, run_experiment, run_nmse_sweep, run_sumrate_sweep, Estimator, ExperimentConfig,
    ExperimentKind, OutputFormat, QSetting, ResultRow, ResultTable, CSV_HEADER,
};

fn small(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        n: 64,
        k: 4,
        n_rf: 4,
        l: 2,
        v: 4,
        q: QSetting::Single(32),
        snr_ul_db: vec![0.0, 10.0, 20.0],
        snr_dl_db: vec![-60.0, 0.0, 20.0],
        trials: 10,
        seed: 42,
        ..ExperimentConfig::new(kind)
    }
}

#[test]
fn single_trial_runs_are_identical() {
    let cfg = ExperimentConfig {
        trials: 1,
        ..small(ExperimentKind::NmseVsSnr)
    };
    let a = run_nmse_sweep(&cfg).unwrap();
    let b = run_nmse_sweep(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn thread_count_does_not_change_results() {
    let cfg = small(ExperimentKind::NmseVsQ);
    let one = run_experiment(&cfg, Some(1)).unwrap().to_csv();
    let three = run_experiment(&cfg, Some(3)).unwrap().to_csv();
    assert_eq!(one, three);
    let s1 = run_experiment(&small(ExperimentKind::SumRateVsDlSnr), Some(1)).unwrap();
    let s2 = run_experiment(&small(ExperimentKind::SumRateVsDlSnr), Some(2)).unwrap();
    assert_eq!(s1.to_json().unwrap(), s2.to_json().unwrap());
}

#[test]
fn seed_changes_results_and_hash() {
    let a = small(ExperimentKind::NmseVsSnr);
    let b = ExperimentConfig { seed: 43, ..a.clone() };
    assert_ne!(a.config_hash(), b.config_hash());
    assert_eq!(a.config_hash(), a.clone().config_hash());
    assert_eq!(a.config_hash().len(), 16);
    let (ta, tb) = (run_nmse_sweep(&a).unwrap(), run_nmse_sweep(&b).unwrap());
    assert_ne!(ta.rows[0].mean, tb.rows[0].mean);
}

#[test]
fn nmse_rows_carry_expected_labels() {
    let cfg = small(ExperimentKind::NmseVsSnr);
    let t = run_nmse_sweep(&cfg).unwrap();
    assert_eq!(t.len(), 3 * 3);
    for r in &t.rows {
        assert_eq!(r.experiment, "nmse_vs_snr/Q=32");
        assert_eq!(r.sweep_param, "snr_ul_db");
        assert_eq!(r.metric, "nmse");
        assert_eq!(r.trials + r.failures, 10);
        assert_eq!(r.seed, 42);
        assert_eq!(r.config_hash, cfg.config_hash());
        assert!(r.mean > 0.0 && r.stderr >= 0.0);
    }
    let sd: Vec<f64> = t.series("nmse_vs_snr/Q=32", Estimator::Sd).map(|r| r.mean).collect();
    assert!(sd[2] < sd[0]);
}

#[test]
fn smd_ignores_configured_q() {
    let cfg = ExperimentConfig {
        q: QSetting::Sweep(vec![16, 32, 48]),
        estimators: vec![Estimator::Smd],
        ..small(ExperimentKind::NmseVsQ)
    };
    let t = run_nmse_sweep(&cfg).unwrap();
    let means: Vec<f64> = t.series("nmse_vs_q/snr_ul_db=10", Estimator::Smd).map(|r| r.mean).collect();
    assert_eq!(means.len(), 3);
    assert!(means.iter().all(|m| *m == means[0]));
}

#[test]
fn sd_keeps_an_error_floor_at_high_snr() {
    let cfg = ExperimentConfig {
        snr_ul_db: vec![60.0],
        estimators: vec![Estimator::Sd],
        ..small(ExperimentKind::NmseVsSnr)
    };
    let t = run_nmse_sweep(&cfg).unwrap();
    assert!(t.rows[0].mean > 1e-4, "{}", t.rows[0].mean);
}

#[test]
fn perfect_csi_bounds_estimated_sum_rate() {
    let cfg = ExperimentConfig {
        n: 64,
        k: 4,
        n_rf: 4,
        l: 2,
        v: 4,
        q: QSetting::Single(32),
        snr_ul_db: vec![10.0],
        snr_dl_db: vec![20.0],
        trials: 500,
        seed: 7,
        estimators: vec![Estimator::Sd, Estimator::Omp, Estimator::Smd, Estimator::PerfectCsi],
        ..ExperimentConfig::new(ExperimentKind::SumRateVsDlSnr)
    };
    let t = run_sumrate_sweep(&cfg).unwrap();
    let id = "sum_rate_vs_dl_snr/Q=32/snr_ul_db=10";
    let perfect = t.series(id, Estimator::PerfectCsi).next().unwrap().clone();
    for est in [Estimator::Sd, Estimator::Omp, Estimator::Smd] {
        let r = t.series(id, est).next().unwrap();
        let margin = 3.0 * (r.stderr.powi(2) + perfect.stderr.powi(2)).sqrt();
        assert!(perfect.mean + margin >= r.mean, "{est:?}: {} vs {}", r.mean, perfect.mean);
    }
}

#[test]
fn sum_rate_vanishes_at_very_low_dl_snr() {
    let cfg = ExperimentConfig {
        estimators: vec![Estimator::Sd, Estimator::PerfectCsi],
        ..small(ExperimentKind::SumRateVsDlSnr)
    };
    let t = run_sumrate_sweep(&cfg).unwrap();
    for r in t.rows.iter().filter(|r| r.sweep_value == -60.0) {
        assert!(r.mean < 1e-3, "{r:?}");
    }
    assert!(t.rows.iter().all(|r| r.failures == 0));
}

#[test]
fn empty_table_is_header_only() {
    let t = ResultTable::default();
    assert_eq!(t.to_csv(), format!("{CSV_HEADER}\n"));
    assert_eq!(ResultTable::from_json(&t.to_json().unwrap()).unwrap(), t);
}

#[test]
fn csv_and_json_files() {
    let t = run_nmse_sweep(&small(ExperimentKind::NmseVsSnr)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let json = dir.path().join("r.json");
    emit_results(&t, &csv, OutputFormat::Csv).unwrap();
    emit_results(&t, &json, OutputFormat::Json).unwrap();

    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), t.len() + 1);
    for (line, row) in lines[1..].iter().zip(&t.rows) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 11);
        assert_eq!(f[5].parse::<f64>().unwrap(), row.mean);
        assert_eq!(f[6].parse::<f64>().unwrap(), row.stderr);
    }

    let back = ResultTable::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(back, t);
    let value: serde_json::Value = serde_json::from_str(&t.to_json().unwrap()).unwrap();
    let keys: Vec<&str> = value[0].as_object().unwrap().keys().map(|k| k.as_str()).collect();
    let mut expected: Vec<&str> = CSV_HEADER.split(',').collect();
    let mut got = keys.clone();
    expected.sort_unstable();
    got.sort_unstable();
    assert_eq!(got, expected);

    assert!(emit_results(&t, &dir.path().join("missing/r.csv"), OutputFormat::Csv).is_err());
}

#[test]
fn non_finite_means_survive_json() {
    let row = ResultRow {
        experiment: "x".into(),
        estimator: "sd".into(),
        sweep_param: "snr_ul_db".into(),
        sweep_value: 0.0,
        metric: "nmse".into(),
        mean: f64::NAN,
        stderr: 0.0,
        trials: 0,
        failures: 3,
        seed: 1,
        config_hash: "00".into(),
    };
    let t = ResultTable { rows: vec![row] };
    let json = t.to_json().unwrap();
    assert!(json.contains("null"));
    let back = ResultTable::from_json(&json).unwrap();
    assert!(back.rows[0].mean.is_nan());
    assert_eq!(back.rows[0].failures, 3);
}
